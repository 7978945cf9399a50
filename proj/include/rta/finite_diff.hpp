#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "rta/errors.hpp"
#include "rta/matrix.hpp"

namespace rta {

/// Central-difference gradient oracle: (fn(x + h e_i) - fn(x - h e_i)) / 2h.
/// Used to cross-check every analytic gradient in the library.
inline Vector finite_diff_grad(const std::function<double(const Vector&)>& fn, const Vector& x,
                               double h) {
    if (h <= 0.0) throw input_error("finite_diff_grad: h must be > 0");
    Vector grad(x.size());
    Vector probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = fn(probe);
        probe[i] = x[i] - h;
        const double down = fn(probe);
        probe[i] = x[i];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw numeric_error("finite_diff_grad: non-finite value at coordinate " +
                                std::to_string(i));
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace rta
