#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "rta/errors.hpp"
#include "rta/matrix.hpp"

namespace rta {

/// The matrix functional L_alpha(W) is selected by the norm in which the loss
/// is Lipschitz.
enum class AlphaNorm { L1, L2, Linf };

inline const char* to_string(AlphaNorm a) {
    switch (a) {
        case AlphaNorm::L1: return "1";
        case AlphaNorm::L2: return "2";
        case AlphaNorm::Linf: return "inf";
    }
    return "?";
}

enum class LossTag { SoftmaxCE, Euclid };

/// Classification label (class index) or regression target.
using Label = std::variant<std::size_t, Vector>;

/// A loss function together with the Lipschitz metadata (C, alpha) the
/// robustness bounds consume. Softmax cross-entropy is 2-Lipschitz in the sup
/// norm; the Euclidean loss ||pred - target||_2 is 1-Lipschitz in the L2 norm.
/// upper_bound (C2) is only known per evaluation set for cross-entropy; the
/// audit fills it in empirically.
struct LossKind {
    LossTag tag = LossTag::SoftmaxCE;
    double lipschitz_constant = 2.0;
    AlphaNorm lipschitz_norm = AlphaNorm::Linf;
    std::optional<double> upper_bound;

    static LossKind softmax_ce() { return {LossTag::SoftmaxCE, 2.0, AlphaNorm::Linf, std::nullopt}; }
    static LossKind euclid() { return {LossTag::Euclid, 1.0, AlphaNorm::L2, std::nullopt}; }

    const char* name() const { return tag == LossTag::SoftmaxCE ? "ce" : "euclid"; }
};

/// Numerically stable softmax: shifts by max(logits) before exponentiating.
inline Vector softmax(const Vector& logits) {
    if (logits.empty()) throw input_error("softmax: empty logits");
    if (!all_finite(logits)) throw input_error("softmax: non-finite logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    Vector p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

/// -log softmax(logits)_y, evaluated in shifted form so large logits stay
/// finite.
inline double ce_loss(const Vector& logits, std::size_t y) {
    if (y >= logits.size())
        throw input_error("ce_loss: class index " + std::to_string(y) + " out of range for " +
                          std::to_string(logits.size()) + " logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return std::log(sum) - (logits[y] - m);
}

/// ||pred - target||_2 (the unsquared form; only this is 1-Lipschitz).
inline double euclid_loss(const Vector& pred, const Vector& target) {
    if (pred.size() != target.size())
        throw input_error("euclid_loss: pred dim " + std::to_string(pred.size()) +
                          " vs target dim " + std::to_string(target.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double loss_value(const LossKind& kind, const Vector& output, const Label& y) {
    if (kind.tag == LossTag::SoftmaxCE) {
        if (!std::holds_alternative<std::size_t>(y))
            throw input_error("loss_value: cross-entropy needs a class index label");
        return ce_loss(output, std::get<std::size_t>(y));
    }
    if (!std::holds_alternative<Vector>(y))
        throw input_error("loss_value: euclid loss needs a vector target");
    return euclid_loss(output, std::get<Vector>(y));
}

/// d loss / d output. At the Euclid singularity (output == target) the
/// gradient is defined as zero.
inline Vector loss_grad(const LossKind& kind, const Vector& output, const Label& y) {
    if (kind.tag == LossTag::SoftmaxCE) {
        const std::size_t cls = std::get<std::size_t>(y);
        if (cls >= output.size()) throw input_error("loss_grad: class index out of range");
        Vector g = softmax(output);
        g[cls] -= 1.0;
        return g;
    }
    const Vector& target = std::get<Vector>(y);
    Vector g = sub(output, target);
    const double n = l2_norm(g);
    if (n == 0.0) return Vector(output.size(), 0.0);
    scale_inplace(g, 1.0 / n);
    return g;
}

}  // namespace rta
