#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rta/attack.hpp"
#include "rta/data.hpp"
#include "rta/errors.hpp"
#include "rta/loss.hpp"
#include "rta/model.hpp"
#include "rta/rng.hpp"

namespace rta {

enum class TrainMethod { PretrainAdv, LP, FT, LPFT };

inline const char* to_string(TrainMethod m) {
    switch (m) {
        case TrainMethod::PretrainAdv: return "pretrain";
        case TrainMethod::LP: return "lp";
        case TrainMethod::FT: return "ft";
        case TrainMethod::LPFT: return "lpft";
    }
    return "?";
}

struct TrainConfig {
    TrainMethod method = TrainMethod::LP;
    int epochs = 30;
    int batch_size = 16;
    double lr0 = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0;
    LossKind loss = LossKind::softmax_ce();
    std::optional<AttackConfig> adversarial;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 0) throw input_error("train: epochs must be >= 0");
        if (batch_size < 1) throw input_error("train: batch size must be >= 1");
        if (lr0 < 0.0) throw input_error("train: lr0 must be >= 0");
        if (momentum < 0.0 || momentum >= 1.0) throw input_error("train: momentum must be in [0,1)");
        if (weight_decay < 0.0) throw input_error("train: weight decay must be >= 0");
        if (adversarial) adversarial->validate();
    }
};

struct TrainLog {
    std::vector<double> epoch_loss;  // mean clean loss per epoch
    std::vector<double> epoch_lr;    // lr used at the last step of the epoch
    long total_steps = 0;
};

inline double cosine_lr(double lr0, long t, long total) {
    if (total < 1) throw input_error("cosine_lr: total steps must be >= 1");
    if (t < 0 || t > total) throw input_error("cosine_lr: step out of range");
    return lr0 * (1.0 + std::cos(3.141592653589793238462643383279 * static_cast<double>(t) /
                                 static_cast<double>(total))) /
           2.0;
}

/// v <- momentum v + (grad + decay p); p <- p - lr v.
inline void sgd_step(std::span<double> params, std::span<const double> grads,
                     std::span<double> velocity, double lr, double momentum, double weight_decay) {
    if (params.size() != grads.size() || params.size() != velocity.size())
        throw input_error("sgd_step: shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] + (grads[i] + weight_decay * params[i]);
        params[i] -= lr * velocity[i];
    }
}

namespace detail {

enum class DecayPolicy { HeadWeightOnly, AllWeights };

inline void apply_sgd(ComposedModel& model, const ParamGrads& grads, ParamGrads& velocity,
                      double lr, double momentum, double decay, DecayPolicy policy) {
    const double layer_decay = policy == DecayPolicy::AllWeights ? decay : 0.0;
    for (std::size_t k = 0; k < model.rep.layers.size(); ++k) {
        sgd_step(model.rep.layers[k].weight.values(), grads.layer_weight[k].values(),
                 velocity.layer_weight[k].values(), lr, momentum, layer_decay);
        sgd_step(model.rep.layers[k].bias, grads.layer_bias[k], velocity.layer_bias[k], lr,
                 momentum, 0.0);
    }
    sgd_step(model.head.weight.values(), grads.head_weight.values(), velocity.head_weight.values(),
             lr, momentum, decay);
    if (model.head.bias)
        sgd_step(*model.head.bias, *grads.head_bias, *velocity.head_bias, lr, momentum, 0.0);
}

inline void check_params_finite(const ComposedModel& model, int epoch) {
    for (const Layer& layer : model.rep.layers)
        if (!all_finite(layer.weight.values()) || !all_finite(layer.bias))
            throw numeric_error("training diverged: non-finite parameters after epoch " +
                                std::to_string(epoch));
    if (!all_finite(model.head.weight.values()) ||
        (model.head.bias && !all_finite(*model.head.bias)))
        throw numeric_error("training diverged: non-finite parameters after epoch " +
                            std::to_string(epoch));
}

/// SGD + momentum + cosine annealing (stepped per gradient step) over
/// shuffled minibatches; the last partial batch is kept. When cfg.adversarial
/// is set, every batch is replaced by PGD adversarial examples first.
inline void train_loop(ComposedModel& model, const Dataset& ds, const TrainConfig& cfg,
                       DecayPolicy policy, TrainLog* log, int threads = 1) {
    cfg.validate();
    ds.validate();
    model.validate();
    const std::size_t n = ds.size();
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    const long batches = static_cast<long>((n + bs - 1) / bs);
    const long total = static_cast<long>(cfg.epochs) * batches;
    if (total == 0) return;

    ParamGrads velocity = ParamGrads::zeros_like(model);
    std::vector<std::size_t> order(n);
    long t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        RngStream shuffle(cfg.seed, StreamPurpose::Shuffle, static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        double last_lr = 0.0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t stop = std::min(start + bs, n);
            std::vector<Sample> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i)
                batch.push_back({ds.inputs[order[i]], ds.labels[order[i]]});

            for (const Sample& s : batch) {
                loss_sum += loss_value(cfg.loss, model_forward(model, s.x), s.y);
                ++loss_count;
            }

            if (cfg.adversarial) {
                std::vector<Vector> xs;
                std::vector<Label> ys;
                for (const Sample& s : batch) {
                    xs.push_back(s.x);
                    ys.push_back(s.y);
                }
                std::vector<AttackResult> adv(batch.size());
                detail::run_batch(batch.size(), threads, [&](std::size_t j) {
                    const std::uint64_t stream_index =
                        static_cast<std::uint64_t>(epoch) * n + order[start + j];
                    adv[j] = pgd(model, cfg.loss, xs[j], ys[j], *cfg.adversarial, nullptr,
                                 stream_index);
                });
                for (std::size_t j = 0; j < batch.size(); ++j) batch[j].x = adv[j].x_adv;
            }

            const ParamGrads grads = param_gradients(model, cfg.loss, batch);
            last_lr = cosine_lr(cfg.lr0, t, total);
            apply_sgd(model, grads, velocity, last_lr, cfg.momentum, cfg.weight_decay, policy);
            ++t;
        }

        check_params_finite(model, epoch);
        const double epoch_mean = loss_sum / static_cast<double>(loss_count);
        if (!std::isfinite(epoch_mean))
            throw numeric_error("training diverged: non-finite loss in epoch " +
                                std::to_string(epoch));
        if (log) {
            log->epoch_loss.push_back(epoch_mean);
            log->epoch_lr.push_back(last_lr);
        }
    }
    if (log) log->total_steps += t;
}

}  // namespace detail

/// Fresh MLP: hidden dims chain into the representation, linear head with
/// bias on top. Weights seeded uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)],
/// biases zero.
inline ComposedModel init_model(std::size_t input_dim, const std::vector<std::size_t>& rep_dims,
                                std::size_t output_dim, Activation activation, std::uint64_t seed) {
    if (input_dim == 0 || output_dim == 0) throw input_error("init_model: zero dimension");
    RngStream rng(seed, StreamPurpose::Init);
    ComposedModel model;
    std::size_t in = input_dim;
    if (rep_dims.empty()) {
        model.rep = MlpRepresentation::identity(input_dim);
    } else {
        for (std::size_t out : rep_dims) {
            if (out == 0) throw input_error("init_model: zero layer dimension");
            Layer layer{DenseMatrix(out, in), Vector(out, 0.0), activation};
            const double scale = 1.0 / std::sqrt(static_cast<double>(in));
            for (double& v : layer.weight.values()) v = rng.uniform(-scale, scale);
            model.rep.layers.push_back(std::move(layer));
            in = out;
        }
    }
    model.head.weight = DenseMatrix(output_dim, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : model.head.weight.values()) v = rng.uniform(-scale, scale);
    model.head.bias = Vector(output_dim, 0.0);
    return model;
}

/// Min-max training: each minibatch is attacked (MaxLoss PGD) before the
/// gradient step. cfg.adversarial must be present; epsilon 0 reduces to
/// standard training on the same trajectory.
inline ComposedModel adversarial_pretrain(const ComposedModel& model, const Dataset& ds,
                                          const TrainConfig& cfg, TrainLog* log = nullptr,
                                          int threads = 1) {
    if (!cfg.adversarial) throw input_error("adversarial_pretrain: cfg.adversarial missing");
    ComposedModel out = model;
    out.freeze_rep = false;
    detail::train_loop(out, ds, cfg, detail::DecayPolicy::AllWeights, log, threads);
    return out;
}

/// Trains a fresh head on a frozen representation. Weight decay touches the
/// head weight matrix only; the representation is bit-identical afterwards.
inline LinearHead linear_probe(const MlpRepresentation& rep, const Dataset& ds,
                               const TrainConfig& cfg, TrainLog* log = nullptr, int threads = 1) {
    ds.validate();
    const std::size_t r = rep.output_dim();
    const std::size_t c = ds.target_dim();
    ComposedModel model;
    model.rep = rep;
    model.head.weight = DenseMatrix(c, r);
    RngStream rng(cfg.seed, StreamPurpose::Init);
    const double scale = 1.0 / std::sqrt(static_cast<double>(r));
    for (double& v : model.head.weight.values()) v = rng.uniform(-scale, scale);
    model.head.bias = Vector(c, 0.0);
    model.freeze_rep = true;
    detail::train_loop(model, ds, cfg, detail::DecayPolicy::HeadWeightOnly, log, threads);
    return model.head;
}

/// Updates every parameter; weight decay applies to all weight matrices,
/// never to biases.
inline ComposedModel full_finetune(const ComposedModel& model, const Dataset& ds,
                                   const TrainConfig& cfg, TrainLog* log = nullptr,
                                   int threads = 1) {
    ComposedModel out = model;
    out.freeze_rep = false;
    detail::train_loop(out, ds, cfg, detail::DecayPolicy::AllWeights, log, threads);
    return out;
}

/// Linear probing for cfg.epochs, then full finetuning for ceil(epochs/2).
inline ComposedModel lp_ft(const ComposedModel& model, const Dataset& ds, const TrainConfig& cfg,
                           TrainLog* log = nullptr, int threads = 1) {
    LinearHead head = linear_probe(model.rep, ds, cfg, log, threads);
    ComposedModel probed;
    probed.rep = model.rep;
    probed.head = std::move(head);
    probed.freeze_rep = false;
    TrainConfig ft_cfg = cfg;
    ft_cfg.method = TrainMethod::FT;
    ft_cfg.epochs = (cfg.epochs + 1) / 2;
    return full_finetune(probed, ds, ft_cfg, log, threads);
}

}  // namespace rta
