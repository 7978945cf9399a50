#pragma once

#include <stdexcept>
#include <string>

namespace rta {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid argument or inconsistent dimensions supplied by the caller.
struct input_error : error {
    using error::error;
};

/// Malformed file contents (CSV, model JSON, report JSON).
struct parse_error : error {
    using error::error;
};

/// Filesystem problems (missing path, unwritable output).
struct io_error : error {
    using error::error;
};

/// Numerical failure: non-finite intermediates, diverging training, ...
struct numeric_error : error {
    using error::error;
};

/// Power iteration did not converge; carries the last estimate and residual.
struct spectral_error : numeric_error {
    spectral_error(const std::string& msg, double last_estimate_, double residual_)
        : numeric_error(msg), last_estimate(last_estimate_), residual(residual_) {}
    double last_estimate;
    double residual;
};

/// A provable inequality failed empirically. Signals an implementation bug,
/// never a property of the data.
struct theory_violation : error {
    using error::error;
};

}  // namespace rta
