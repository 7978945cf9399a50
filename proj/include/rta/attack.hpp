#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "rta/errors.hpp"
#include "rta/loss.hpp"
#include "rta/matrix.hpp"
#include "rta/model.hpp"
#include "rta/rng.hpp"

namespace rta {

enum class AttackNorm { Linf, L2 };

inline const char* to_string(AttackNorm n) { return n == AttackNorm::Linf ? "linf" : "l2"; }

inline AttackNorm attack_norm_from_string(const std::string& s) {
    if (s == "linf") return AttackNorm::Linf;
    if (s == "l2") return AttackNorm::L2;
    throw parse_error("unknown attack norm '" + s + "'");
}

struct AttackConfig {
    AttackNorm norm = AttackNorm::Linf;
    double epsilon = 0.0;
    int steps = 20;
    double relative_step_size = 0.7;
    int restarts = 1;
    bool random_start = true;
    std::uint64_t seed = 0;

    double step_size() const { return relative_step_size * epsilon; }

    void validate() const {
        if (epsilon < 0.0) throw input_error("attack: epsilon must be >= 0");
        if (steps < 1) throw input_error("attack: steps must be >= 1");
        if (relative_step_size <= 0.0) throw input_error("attack: relative step size must be > 0");
        if (restarts < 1) throw input_error("attack: restarts must be >= 1");
    }
};

struct AttackResult {
    Vector x_adv;
    double delta_norm = 0.0;
    double objective_value = 0.0;
    int restarts_used = 0;
};

inline double attack_norm_of(const Vector& delta, AttackNorm norm) {
    return norm == AttackNorm::Linf ? linf_norm(delta) : l2_norm(delta);
}

/// Projects delta onto the epsilon-ball: clamp for Linf, rescale for L2.
inline Vector project(Vector delta, AttackNorm norm, double epsilon) {
    if (epsilon < 0.0) throw input_error("project: epsilon must be >= 0");
    if (norm == AttackNorm::Linf) {
        for (double& v : delta) v = std::clamp(v, -epsilon, epsilon);
    } else {
        const double n = l2_norm(delta);
        if (n > epsilon) scale_inplace(delta, epsilon == 0.0 ? 0.0 : epsilon / n);
    }
    return delta;
}

namespace detail {

struct PgdObjective {
    std::function<double(const Vector&)> value;  // of the perturbed point
    std::function<Vector(const Vector&)> grad;
};

inline Vector random_direction(RngStream& rng, std::size_t d, AttackNorm norm) {
    Vector dir(d);
    if (norm == AttackNorm::Linf) {
        for (double& v : dir) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
        return dir;
    }
    double n = 0.0;
    do {
        for (double& v : dir) v = rng.gaussian();
        n = l2_norm(dir);
    } while (n < 1e-12);
    scale_inplace(dir, 1.0 / n);
    return dir;
}

inline Vector random_ball_point(RngStream& rng, std::size_t d, AttackNorm norm, double eps) {
    Vector delta(d);
    if (norm == AttackNorm::Linf) {
        for (double& v : delta) v = rng.uniform(-eps, eps);
        return delta;
    }
    delta = random_direction(rng, d, norm);
    const double radius = eps * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    scale_inplace(delta, radius);
    return delta;
}

inline AttackResult pgd_core(const PgdObjective& obj, const Vector& x, const AttackConfig& cfg,
                             const Vector* warm_start, std::uint64_t sample_index) {
    cfg.validate();
    const std::size_t d = x.size();

    if (cfg.epsilon == 0.0) {
        AttackResult res;
        res.x_adv = x;
        res.delta_norm = 0.0;
        res.objective_value = obj.value(x);
        res.restarts_used = 0;
        return res;
    }

    RngStream rng(cfg.seed, StreamPurpose::Attack, sample_index);
    const double step = cfg.step_size();

    Vector best_delta(d, 0.0);
    double best_value = 0.0;
    bool have_best = false;
    auto consider = [&](const Vector& delta) {
        const double v = obj.value(add(x, delta));
        if (!have_best || v > best_value) {
            best_value = v;
            best_delta = delta;
            have_best = true;
        }
    };

    const int total_restarts = cfg.restarts + (warm_start ? 1 : 0);
    for (int r = 0; r < total_restarts; ++r) {
        Vector delta;
        if (warm_start && r == 0) {
            if (warm_start->size() != d) throw input_error("pgd: warm start dimension mismatch");
            delta = sub(*warm_start, x);
            if (attack_norm_of(delta, cfg.norm) > cfg.epsilon + 1e-9)
                throw input_error("pgd: warm start outside the epsilon ball");
            delta = project(std::move(delta), cfg.norm, cfg.epsilon);
        } else if (cfg.random_start) {
            delta = random_ball_point(rng, d, cfg.norm, cfg.epsilon);
        } else {
            delta.assign(d, 0.0);
        }
        consider(delta);

        for (int s = 0; s < cfg.steps; ++s) {
            Vector g;
            try {
                g = obj.grad(add(x, delta));
            } catch (const numeric_error& e) {
                throw numeric_error("pgd step " + std::to_string(s) + ": " + e.what());
            }
            if (!all_finite(g))
                throw numeric_error("pgd step " + std::to_string(s) + ": non-finite gradient");

            Vector dir;
            if (cfg.norm == AttackNorm::Linf) {
                dir.resize(d);
                for (std::size_t i = 0; i < d; ++i)
                    dir[i] = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
            } else {
                const double n = l2_norm(g);
                if (n > 0.0) {
                    dir = std::move(g);
                    scale_inplace(dir, 1.0 / n);
                } else {
                    dir.assign(d, 0.0);
                }
            }
            // Zero gradient at the start of a restart (the rep-distance
            // singularity at delta = 0): take a seeded random direction.
            if (s == 0 && l2_norm(dir) == 0.0) dir = random_direction(rng, d, cfg.norm);
            if (l2_norm(dir) == 0.0) break;

            for (std::size_t i = 0; i < d; ++i) delta[i] += step * dir[i];
            delta = project(std::move(delta), cfg.norm, cfg.epsilon);
            consider(delta);
        }
    }

    AttackResult res;
    res.x_adv = add(x, best_delta);
    res.delta_norm = attack_norm_of(best_delta, cfg.norm);
    res.objective_value = best_value;
    res.restarts_used = total_restarts;
    return res;
}

template <typename Fn>
inline void run_batch(std::size_t n, int threads, Fn&& per_index) {
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    auto work = [&](std::size_t w) {
        for (std::size_t i = w; i < n; i += workers) {
            try {
                per_index(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        const std::string at = "sample " + std::to_string(i) + ": ";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const theory_violation& e) {
            throw theory_violation(at + e.what());
        } catch (const input_error& e) {
            throw input_error(at + e.what());
        } catch (const numeric_error& e) {
            throw numeric_error(at + e.what());
        } catch (const io_error& e) {
            throw io_error(at + e.what());
        } catch (const parse_error& e) {
            throw parse_error(at + e.what());
        }
    }
}

}  // namespace detail

/// PGD maximizing loss(f(x + delta), y).
inline AttackResult pgd(const ComposedModel& model, const LossKind& loss, const Vector& x,
                        const Label& y, const AttackConfig& cfg, const Vector* warm_start = nullptr,
                        std::uint64_t sample_index = 0) {
    detail::PgdObjective obj;
    obj.value = [&](const Vector& p) { return loss_value(loss, model_forward(model, p), y); };
    obj.grad = [&](const Vector& p) { return input_gradient(model, loss, p, y); };
    return detail::pgd_core(obj, x, cfg, warm_start, sample_index);
}

/// PGD maximizing the representation displacement ||g(x + delta) - g(x)||_2.
inline AttackResult pgd(const MlpRepresentation& rep, const Vector& x, const AttackConfig& cfg,
                        const Vector* warm_start = nullptr, std::uint64_t sample_index = 0) {
    const Vector g_x = rep_forward(rep, x);
    detail::PgdObjective obj;
    obj.value = [&](const Vector& p) { return euclid_loss(rep_forward(rep, p), g_x); };
    obj.grad = [&](const Vector& p) { return rep_distance_gradient(rep, x, p); };
    return detail::pgd_core(obj, x, cfg, warm_start, sample_index);
}

/// Per-sample attacks with independent RNG streams derived from
/// (cfg.seed, sample index); results do not depend on thread count or order.
inline std::vector<AttackResult> batch_attack(const ComposedModel& model, const LossKind& loss,
                                              const std::vector<Vector>& inputs,
                                              const std::vector<Label>& labels,
                                              const AttackConfig& cfg, int threads = 1,
                                              const std::vector<Vector>* warm_starts = nullptr) {
    if (labels.size() != inputs.size()) throw input_error("batch_attack: labels/inputs mismatch");
    if (warm_starts && warm_starts->size() != inputs.size())
        throw input_error("batch_attack: warm starts/inputs mismatch");
    std::vector<AttackResult> out(inputs.size());
    detail::run_batch(inputs.size(), threads, [&](std::size_t i) {
        const Vector* warm = warm_starts ? &(*warm_starts)[i] : nullptr;
        out[i] = pgd(model, loss, inputs[i], labels[i], cfg, warm, i);
    });
    return out;
}

inline std::vector<AttackResult> batch_attack(const MlpRepresentation& rep,
                                              const std::vector<Vector>& inputs,
                                              const AttackConfig& cfg, int threads = 1,
                                              const std::vector<Vector>* warm_starts = nullptr) {
    if (warm_starts && warm_starts->size() != inputs.size())
        throw input_error("batch_attack: warm starts/inputs mismatch");
    std::vector<AttackResult> out(inputs.size());
    detail::run_batch(inputs.size(), threads, [&](std::size_t i) {
        const Vector* warm = warm_starts ? &(*warm_starts)[i] : nullptr;
        out[i] = pgd(rep, inputs[i], cfg, warm, i);
    });
    return out;
}

}  // namespace rta
