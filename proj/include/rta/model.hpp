#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rta/errors.hpp"
#include "rta/loss.hpp"
#include "rta/matrix.hpp"

namespace rta {

enum class Activation { ReLU, Identity, Tanh };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Identity: return "identity";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "identity") return Activation::Identity;
    if (s == "tanh") return Activation::Tanh;
    throw parse_error("unknown activation '" + s + "'");
}

inline double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::Identity: return z;
        case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

// ReLU uses subgradient 0 at z == 0.
inline double activation_derivative(Activation a, double pre, double post) {
    switch (a) {
        case Activation::ReLU: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Identity: return 1.0;
        case Activation::Tanh: return 1.0 - post * post;
    }
    return 1.0;
}

/// One affine layer with an elementwise activation.
struct Layer {
    DenseMatrix weight;  // out x in
    Vector bias;         // out
    Activation activation = Activation::ReLU;

    void validate() const {
        if (weight.empty()) throw input_error("Layer: empty weight");
        if (bias.size() != weight.rows())
            throw input_error("Layer: bias dim " + std::to_string(bias.size()) +
                              " does not match weight rows " + std::to_string(weight.rows()));
    }
};

/// The representation function g: R^d -> R^r, a chain of affine layers.
struct MlpRepresentation {
    std::vector<Layer> layers;

    std::size_t input_dim() const {
        if (layers.empty()) throw input_error("MlpRepresentation: no layers");
        return layers.front().weight.cols();
    }
    std::size_t output_dim() const {
        if (layers.empty()) throw input_error("MlpRepresentation: no layers");
        return layers.back().weight.rows();
    }

    void validate() const {
        if (layers.empty()) throw input_error("MlpRepresentation: no layers");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            layers[k].validate();
            if (k > 0 && layers[k].weight.cols() != layers[k - 1].weight.rows())
                throw input_error("MlpRepresentation: layer " + std::to_string(k) +
                                  " input dim does not match previous layer output");
        }
    }

    /// The r-dimensional identity representation: one Identity layer with
    /// weight I and zero bias.
    static MlpRepresentation identity(std::size_t d) {
        MlpRepresentation rep;
        rep.layers.push_back({DenseMatrix::identity(d), Vector(d, 0.0), Activation::Identity});
        return rep;
    }
};

/// The linear head W (optionally with bias) producing logits or regression
/// outputs.
struct LinearHead {
    DenseMatrix weight;  // c x r
    std::optional<Vector> bias;

    void validate() const {
        if (weight.empty()) throw input_error("LinearHead: empty weight");
        if (bias && bias->size() != weight.rows())
            throw input_error("LinearHead: bias dim does not match weight rows");
    }
};

/// f(x) = head.weight * g(x) (+ head.bias). freeze_rep realizes linear
/// probing: representation parameters receive zero gradients during training.
struct ComposedModel {
    MlpRepresentation rep;
    LinearHead head;
    bool freeze_rep = false;

    void validate() const {
        rep.validate();
        head.validate();
        if (head.weight.cols() != rep.output_dim())
            throw input_error("ComposedModel: head expects dim " +
                              std::to_string(head.weight.cols()) + " but representation outputs " +
                              std::to_string(rep.output_dim()));
    }

    std::size_t input_dim() const { return rep.input_dim(); }
    std::size_t output_dim() const { return head.weight.rows(); }
};

namespace detail {

struct ForwardTrace {
    Vector input;
    std::vector<Vector> pre;   // pre-activation per layer
    std::vector<Vector> post;  // activation output per layer
    const Vector& output() const { return post.back(); }
};

inline ForwardTrace rep_forward_trace(const MlpRepresentation& rep, const Vector& x) {
    if (x.size() != rep.input_dim())
        throw input_error("rep_forward: input dim " + std::to_string(x.size()) +
                          " does not match representation input dim " +
                          std::to_string(rep.input_dim()));
    ForwardTrace trace;
    trace.input = x;
    const Vector* cur = &trace.input;
    for (std::size_t k = 0; k < rep.layers.size(); ++k) {
        const Layer& layer = rep.layers[k];
        Vector z = matvec(layer.weight, *cur);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];
        Vector a(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) a[i] = apply_activation(layer.activation, z[i]);
        if (!all_finite(a))
            throw numeric_error("rep_forward: non-finite value in layer " + std::to_string(k));
        trace.pre.push_back(std::move(z));
        trace.post.push_back(std::move(a));
        cur = &trace.post.back();
    }
    return trace;
}

/// Backpropagates d(objective)/d(rep output) through the layers; returns
/// d(objective)/d(input).
inline Vector rep_backward_input(const MlpRepresentation& rep, const ForwardTrace& trace,
                                 Vector grad_out) {
    for (std::size_t k = rep.layers.size(); k-- > 0;) {
        const Layer& layer = rep.layers[k];
        for (std::size_t i = 0; i < grad_out.size(); ++i)
            grad_out[i] *= activation_derivative(layer.activation, trace.pre[k][i], trace.post[k][i]);
        grad_out = matvec_transpose(layer.weight, grad_out);
        if (!all_finite(grad_out))
            throw numeric_error("input_gradient: non-finite value in layer " + std::to_string(k));
    }
    return grad_out;
}

}  // namespace detail

/// g(x)
inline Vector rep_forward(const MlpRepresentation& rep, const Vector& x) {
    return detail::rep_forward_trace(rep, x).output();
}

/// f(x) = W g(x) (+ bias)
inline Vector model_forward(const ComposedModel& model, const Vector& x) {
    Vector logits = matvec(model.head.weight, rep_forward(model.rep, x));
    if (model.head.bias)
        for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += (*model.head.bias)[i];
    return logits;
}

/// Exact reverse-mode gradient of loss(f(x), y) with respect to the input.
inline Vector input_gradient(const ComposedModel& model, const LossKind& loss, const Vector& x,
                             const Label& y) {
    const auto trace = detail::rep_forward_trace(model.rep, x);
    Vector logits = matvec(model.head.weight, trace.output());
    if (model.head.bias)
        for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += (*model.head.bias)[i];
    const Vector dlogits = loss_grad(loss, logits, y);
    Vector grad_rep = matvec_transpose(model.head.weight, dlogits);
    return detail::rep_backward_input(model.rep, trace, std::move(grad_rep));
}

/// Gradient of ||g(x) - g(anchor)||_2 with respect to x; zero at the
/// singularity g(x) == g(anchor).
inline Vector rep_distance_gradient(const MlpRepresentation& rep, const Vector& anchor,
                                    const Vector& x) {
    if (anchor.size() != x.size()) throw input_error("rep_distance_gradient: dim mismatch");
    const Vector g_anchor = rep_forward(rep, anchor);
    const auto trace = detail::rep_forward_trace(rep, x);
    Vector diff = sub(trace.output(), g_anchor);
    const double n = l2_norm(diff);
    if (n == 0.0) return Vector(x.size(), 0.0);
    scale_inplace(diff, 1.0 / n);
    return detail::rep_backward_input(rep, trace, std::move(diff));
}

/// Per-parameter gradients, shaped exactly like the model.
struct ParamGrads {
    std::vector<DenseMatrix> layer_weight;
    std::vector<Vector> layer_bias;
    DenseMatrix head_weight;
    std::optional<Vector> head_bias;

    static ParamGrads zeros_like(const ComposedModel& model) {
        ParamGrads g;
        for (const Layer& layer : model.rep.layers) {
            g.layer_weight.emplace_back(layer.weight.rows(), layer.weight.cols());
            g.layer_bias.emplace_back(layer.bias.size(), 0.0);
        }
        g.head_weight = DenseMatrix(model.head.weight.rows(), model.head.weight.cols());
        if (model.head.bias) g.head_bias = Vector(model.head.bias->size(), 0.0);
        return g;
    }
};

struct Sample {
    Vector x;
    Label y;
};

/// Mean loss gradient over a batch for every weight and bias. When
/// model.freeze_rep is set the representation blocks stay identically zero.
inline ParamGrads param_gradients(const ComposedModel& model, const LossKind& loss,
                                  std::span<const Sample> batch) {
    if (batch.empty()) throw input_error("param_gradients: empty batch");
    ParamGrads grads = ParamGrads::zeros_like(model);

    for (const Sample& sample : batch) {
        const auto trace = detail::rep_forward_trace(model.rep, sample.x);
        Vector logits = matvec(model.head.weight, trace.output());
        if (model.head.bias)
            for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += (*model.head.bias)[i];
        const Vector dlogits = loss_grad(loss, logits, sample.y);

        const Vector& g_out = trace.output();
        for (std::size_t i = 0; i < dlogits.size(); ++i) {
            auto row = grads.head_weight.row(i);
            for (std::size_t j = 0; j < g_out.size(); ++j) row[j] += dlogits[i] * g_out[j];
        }
        if (grads.head_bias)
            for (std::size_t i = 0; i < dlogits.size(); ++i) (*grads.head_bias)[i] += dlogits[i];

        if (model.freeze_rep) continue;

        Vector grad = matvec_transpose(model.head.weight, dlogits);
        for (std::size_t k = model.rep.layers.size(); k-- > 0;) {
            const Layer& layer = model.rep.layers[k];
            for (std::size_t i = 0; i < grad.size(); ++i)
                grad[i] *= activation_derivative(layer.activation, trace.pre[k][i], trace.post[k][i]);
            const Vector& layer_in = k == 0 ? trace.input : trace.post[k - 1];
            for (std::size_t i = 0; i < grad.size(); ++i) {
                auto row = grads.layer_weight[k].row(i);
                for (std::size_t j = 0; j < layer_in.size(); ++j) row[j] += grad[i] * layer_in[j];
            }
            for (std::size_t i = 0; i < grad.size(); ++i) grads.layer_bias[k][i] += grad[i];
            if (k > 0) grad = matvec_transpose(layer.weight, grad);
        }
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (auto& m : grads.layer_weight) scale_inplace(m.values(), inv_n);
    for (auto& b : grads.layer_bias) scale_inplace(b, inv_n);
    scale_inplace(grads.head_weight.values(), inv_n);
    if (grads.head_bias) scale_inplace(*grads.head_bias, inv_n);
    return grads;
}

}  // namespace rta
