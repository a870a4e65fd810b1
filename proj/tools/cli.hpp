#pragma once

#include <iosfwd>

namespace camel::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;

/// camel <index|capacity|nonsqueeze|quantize|evolve> [--config PATH] [--seed N]
///       [--out PATH] [--format json|csv] [--tol X]
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace camel::cli
