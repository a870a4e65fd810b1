#include "camel/parallel.hpp"

#include <omp.h>

namespace camel {

int max_threads() { return omp_get_max_threads(); }

} // namespace camel
