#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace camel {

/// Selects the kernel implementation. Every data-parallel kernel keeps a
/// serial reference path; both produce identical results because work is
/// partitioned the same way in either mode.
enum class Exec { serial, parallel };

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

/// Fixed partition count used to derive per-partition random streams, so
/// results do not depend on the thread count.
inline constexpr std::size_t kSamplePartitions = 64;

/// body(i) for i in [0, count). The parallel path rethrows the first
/// exception raised by any iteration once the loop has finished.
template <class F>
void for_each_index(long count, Exec exec, F&& body)
{
    if(exec == Exec::serial) {
        for(long i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
#pragma omp parallel for schedule(dynamic, 1)
    for(long i = 0; i < count; ++i) {
        try {
            body(i);
        } catch(...) {
            std::lock_guard<std::mutex> lock(mu);
            if(!err)
                err = std::current_exception();
        }
    }
    if(err)
        std::rethrow_exception(err);
}

} // namespace camel
