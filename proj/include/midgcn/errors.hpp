#pragma once

#include <stdexcept>
#include <string>

namespace midgcn {

// Invalid configuration, option, or out-of-range parameter. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data: missing files, bad indices,
// shape mismatches. CLI exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite values, degenerate denominators,
// eigensolver non-convergence. CLI exit code 4.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace midgcn
