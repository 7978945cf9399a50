#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "rta/errors.hpp"
#include "rta/matrix.hpp"
#include "rta/rng.hpp"

namespace rta {

namespace detail {

// Largest eigenvalue and eigenvector of the symmetric 2x2 matrix [[a,b],[b,c]].
struct Sym2Top {
    double lambda;
    double u, v;
};

inline Sym2Top sym2_top(double a, double b, double c) {
    const double half_trace = 0.5 * (a + c);
    const double half_gap = 0.5 * (a - c);
    const double disc = std::sqrt(half_gap * half_gap + b * b);
    const double lambda = half_trace + disc;
    // Pick the better-conditioned eigenvector formula.
    double u = b, v = lambda - a;
    const double u2 = lambda - c, v2 = b;
    if (u2 * u2 + v2 * v2 > u * u + v * v) {
        u = u2;
        v = v2;
    }
    const double norm = std::sqrt(u * u + v * v);
    if (norm == 0.0) return {lambda, 1.0, 0.0};
    return {lambda, u / norm, v / norm};
}

}  // namespace detail

/// Largest singular value of W via power iteration on W^T W.
///
/// A two-vector block is iterated (orthogonal iteration with Rayleigh-Ritz on
/// the 2-dim subspace) so that a nearly degenerate top singular pair does not
/// stall the estimate; a single-vector iteration cannot reach the accuracy the
/// norm-bound checks demand when sigma_1 ~ sigma_2. The start block is the
/// normalized all-ones vector perturbed by seeded uniform noise of magnitude
/// 1e-3, plus one seeded noise vector orthogonalized against it.
///
/// Converges when |sigma_k - sigma_{k-1}| <= tol * max(1, sigma_k) and the top
/// Ritz pair residual is below 1e-9 * max(1, lambda).
inline double spectral_norm(const DenseMatrix& w, double tol = 1e-10, int max_iter = 10000) {
    if (w.empty()) throw input_error("spectral_norm: empty matrix");
    if (tol <= 0.0) throw input_error("spectral_norm: tol must be > 0");
    if (!all_finite(w.values())) throw input_error("spectral_norm: non-finite entries");

    const std::size_t r = w.cols();
    if (r == 1) {
        // W^T W is scalar: sigma is the column norm.
        return l2_norm(w.values());
    }

    const auto apply_b = [&](const Vector& v) { return matvec_transpose(w, matvec(w, v)); };

    RngStream rng(0x5eedULL, StreamPurpose::Noise);
    const auto fresh_vector = [&](bool ones_base) {
        Vector v(r);
        for (std::size_t i = 0; i < r; ++i)
            v[i] = (ones_base ? 1.0 : 0.0) + (ones_base ? 1e-3 : 1.0) * rng.uniform(-1.0, 1.0);
        return v;
    };

    const auto normalize = [](Vector& v) {
        const double n = l2_norm(v);
        if (n > 0.0) scale_inplace(v, 1.0 / n);
        return n;
    };

    Vector q1 = fresh_vector(true);
    normalize(q1);
    Vector q2 = fresh_vector(false);

    // Orthonormalize q2 against q1, redrawing if it degenerates.
    const auto reorthogonalize_q2 = [&]() {
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double c = dot(q2, q1);
            for (std::size_t i = 0; i < r; ++i) q2[i] -= c * q1[i];
            if (normalize(q2) > 1e-12) return;
            q2 = fresh_vector(false);
        }
        throw numeric_error("spectral_norm: failed to build orthogonal start block");
    };
    reorthogonalize_q2();

    double sigma_prev = std::numeric_limits<double>::quiet_NaN();
    double sigma = 0.0;
    double residual = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        const Vector y1 = apply_b(q1);
        const Vector y2 = apply_b(q2);

        const double s11 = dot(q1, y1);
        const double s22 = dot(q2, y2);
        const double s12 = 0.5 * (dot(q1, y2) + dot(q2, y1));
        const auto top = detail::sym2_top(s11, s12, s22);
        const double lambda = std::max(top.lambda, 0.0);
        sigma = std::sqrt(lambda);

        // Residual of the top Ritz pair: ||B v - lambda v||.
        Vector res(r);
        for (std::size_t i = 0; i < r; ++i)
            res[i] = top.u * y1[i] + top.v * y2[i] - lambda * (top.u * q1[i] + top.v * q2[i]);
        residual = l2_norm(res);

        if (!std::isfinite(sigma))
            throw numeric_error("spectral_norm: iteration produced non-finite estimate");

        if (iter > 0 && std::fabs(sigma - sigma_prev) <= tol * std::max(1.0, sigma) &&
            residual <= 1e-9 * std::max(1.0, lambda))
            return sigma;
        sigma_prev = sigma;

        // Advance the subspace: Q <- orth(B Q).
        q1 = y1;
        if (normalize(q1) == 0.0) {
            // q1 fell into the kernel; either W = 0 or the start was unlucky.
            bool all_zero = true;
            for (double v : w.values())
                if (v != 0.0) {
                    all_zero = false;
                    break;
                }
            if (all_zero) return 0.0;
            q1 = fresh_vector(true);
            normalize(q1);
        }
        q2 = y2;
        reorthogonalize_q2();
    }
    throw spectral_error("spectral_norm: no convergence after " + std::to_string(max_iter) +
                             " iterations (estimate " + std::to_string(sigma) + ", residual " +
                             std::to_string(residual) + ")",
                         sigma, residual);
}

}  // namespace rta
