#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rta/attack.hpp"
#include "rta/data.hpp"
#include "rta/errors.hpp"
#include "rta/loss.hpp"
#include "rta/matrix.hpp"
#include "rta/model.hpp"
#include "rta/spectral.hpp"

namespace rta {

inline constexpr double kLemmaSlack = 1e-9;

/// L_alpha(W): spectral norm for alpha=2, sum of row norms for alpha=1,
/// max row norm for alpha=inf.
inline double l_alpha(const DenseMatrix& w, AlphaNorm alpha) {
    if (w.empty()) throw input_error("l_alpha: empty matrix");
    switch (alpha) {
        case AlphaNorm::L2: return spectral_norm(w);
        case AlphaNorm::L1: {
            double s = 0.0;
            for (std::size_t i = 0; i < w.rows(); ++i) s += l2_norm(w.row(i));
            return s;
        }
        case AlphaNorm::Linf: {
            double m = 0.0;
            for (std::size_t i = 0; i < w.rows(); ++i) m = std::max(m, l2_norm(w.row(i)));
            return m;
        }
    }
    throw input_error("l_alpha: bad alpha");
}

struct AsScoreResult {
    double score = 0.0;
    Vector per_sample;
};

/// Mean over inputs of the attained max ||g(x+delta) - g(x)||_2. Labels are
/// never consulted.
inline AsScoreResult as_score(const MlpRepresentation& rep, const std::vector<Vector>& inputs,
                              const AttackConfig& cfg, int threads = 1,
                              const std::vector<Vector>* warm_starts = nullptr) {
    if (inputs.empty()) throw input_error("as_score: no inputs");
    const auto results = batch_attack(rep, inputs, cfg, threads, warm_starts);
    AsScoreResult out;
    out.per_sample.reserve(results.size());
    for (const AttackResult& r : results) out.per_sample.push_back(r.objective_value);
    out.score = mean(out.per_sample);
    return out;
}

struct LemmaOneAudit {
    double clean_loss_avg = 0.0;
    double adv_loss_avg = 0.0;
    double diff = 0.0;
    double lipschitz_C = 0.0;
    double l_alpha = 0.0;
    double lhs = 0.0;
    double as_score = 0.0;
    Vector per_sample_sensitivities;
};

namespace detail {

inline LemmaOneAudit lemma1_assemble(const Vector& clean_losses, const Vector& adv_losses,
                                     const DenseMatrix& head_weight, const LossKind& loss,
                                     const Vector& sensitivities) {
    if (clean_losses.size() != adv_losses.size() || clean_losses.size() != sensitivities.size())
        throw input_error("lemma1: per-sample arrays disagree in length");
    if (clean_losses.empty()) throw input_error("lemma1: empty evaluation set");

    LemmaOneAudit audit;
    audit.clean_loss_avg = mean(clean_losses);
    audit.adv_loss_avg = mean(adv_losses);
    audit.diff = audit.adv_loss_avg - audit.clean_loss_avg;
    audit.lipschitz_C = loss.lipschitz_constant;
    audit.l_alpha = rta::l_alpha(head_weight, loss.lipschitz_norm);
    audit.per_sample_sensitivities = sensitivities;
    audit.as_score = mean(sensitivities);

    const double denom = audit.l_alpha * audit.lipschitz_C;
    if (denom == 0.0) {
        if (std::abs(audit.diff) > 1e-12)
            throw numeric_error("lemma1: zero L_alpha(W) with nonzero loss gap");
        audit.lhs = 0.0;
    } else {
        audit.lhs = audit.diff / denom;
    }

    if (audit.lhs > audit.as_score + kLemmaSlack) {
        std::string msg = "lemma 1 violated: lhs " + std::to_string(audit.lhs) + " > as_score " +
                          std::to_string(audit.as_score) + " + 1e-9; per-sample (i, clean, adv, sens):";
        for (std::size_t i = 0; i < clean_losses.size() && i < 5; ++i)
            msg += " (" + std::to_string(i) + ", " + std::to_string(clean_losses[i]) + ", " +
                   std::to_string(adv_losses[i]) + ", " + std::to_string(sensitivities[i]) + ")";
        throw theory_violation(msg);
    }
    return audit;
}

}  // namespace detail

/// Runs MaxLoss attacks on f for the LHS and rep-displacement attacks on g
/// for the RHS, then checks lhs <= as_score. A violation is a bug, not a
/// finding, and raises theory_violation.
inline LemmaOneAudit lemma1_audit(const ComposedModel& model, const Dataset& ds,
                                  const LossKind& loss, const AttackConfig& cfg, int threads = 1) {
    ds.validate();
    const auto loss_attacks = batch_attack(model, loss, ds.inputs, ds.labels, cfg, threads);
    Vector clean(ds.size()), adv(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        clean[i] = loss_value(loss, model_forward(model, ds.inputs[i]), ds.labels[i]);
        adv[i] = loss_attacks[i].objective_value;
    }
    const auto as = as_score(model.rep, ds.inputs, cfg, threads);
    return detail::lemma1_assemble(clean, adv, model.head.weight, loss, as.per_sample);
}

struct HoeffdingTerm {
    double C2 = 0.0;
    long n = 0;
    double rho = 0.0;
    double value = 0.0;
};

inline HoeffdingTerm hoeffding_term(double c2, long n, double rho) {
    if (c2 <= 0.0) throw input_error("hoeffding_term: C2 must be > 0");
    if (n < 1) throw input_error("hoeffding_term: n must be >= 1");
    if (rho <= 0.0 || rho >= 1.0) throw input_error("hoeffding_term: rho must be in (0,1)");
    HoeffdingTerm h;
    h.C2 = c2;
    h.n = n;
    h.rho = rho;
    h.value = c2 * std::sqrt(std::log(rho / 2.0) / (-2.0 * static_cast<double>(n)));
    return h;
}

inline double theorem1_rhs(const LemmaOneAudit& audit, const HoeffdingTerm& h) {
    return audit.l_alpha * audit.lipschitz_C * audit.as_score + h.value;
}

inline std::size_t argmax_class(const Vector& logits) {
    if (logits.empty()) throw input_error("argmax_class: empty logits");
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = i;
    return best;
}

struct MarginResult {
    std::size_t predicted = 0;
    double margin = 0.0;
};

/// Predicted class and min over j != y of |f_y - f_j| / ||W_y - W_j||_2.
/// Ties in the argmax go to the lowest index and give margin 0.
inline MarginResult criterion_margin(const ComposedModel& model, const Vector& x) {
    if (model.output_dim() < 2) throw input_error("criterion_margin: needs a classifier (c >= 2)");
    const Vector logits = model_forward(model, x);
    MarginResult res;
    res.predicted = argmax_class(logits);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.size(); ++j) {
        if (j == res.predicted) continue;
        const double num = std::abs(logits[res.predicted] - logits[j]);
        const double den = l2_norm(sub(Vector(model.head.weight.row(res.predicted).begin(),
                                              model.head.weight.row(res.predicted).end()),
                                       Vector(model.head.weight.row(j).begin(),
                                              model.head.weight.row(j).end())));
        if (den == 0.0) {
            if (num == 0.0) {
                margin = 0.0;
                continue;
            }
            throw numeric_error("criterion_margin: head rows " + std::to_string(res.predicted) +
                                " and " + std::to_string(j) +
                                " coincide but logits differ (bias-only separation); margin "
                                "undefined");
        }
        margin = std::min(margin, num / den);
    }
    res.margin = margin;
    return res;
}

struct CriterionRecord {
    std::size_t sample_index = 0;
    std::size_t predicted = 0;
    double margin = 0.0;
    double sensitivity = 0.0;
    bool fulfilled = false;
    bool robust_under_attack = false;
    bool correct = false;
};

/// Per-point margin criterion: sensitivity (PGD lower bound on the max rep
/// displacement) against the normalized logit margin, plus an argmax-flip
/// probe under the matching MaxLoss attack.
inline CriterionRecord criterion_check(const ComposedModel& model, const Vector& x,
                                       std::optional<std::size_t> y_true, const AttackConfig& cfg,
                                       std::uint64_t sample_index = 0) {
    CriterionRecord rec;
    rec.sample_index = sample_index;
    const MarginResult mr = criterion_margin(model, x);
    rec.predicted = mr.predicted;
    rec.margin = mr.margin;

    const AttackResult rep_res = pgd(model.rep, x, cfg, nullptr, sample_index);
    rec.sensitivity = rep_res.objective_value;
    rec.fulfilled = rec.sensitivity <= rec.margin;

    const Label attack_label{y_true ? *y_true : rec.predicted};
    const AttackResult loss_res =
        pgd(model, LossKind::softmax_ce(), x, attack_label, cfg, nullptr, sample_index);
    rec.robust_under_attack = argmax_class(model_forward(model, loss_res.x_adv)) == rec.predicted;
    rec.correct = y_true && *y_true == rec.predicted;
    return rec;
}

/// Fraction of points whose prediction equals the true label and survives
/// the MaxLoss attack unchanged.
inline double robust_accuracy(const ComposedModel& model, const Dataset& ds,
                              const AttackConfig& cfg, int threads = 1,
                              const LossKind& loss = LossKind::softmax_ce()) {
    ds.validate();
    if (!ds.is_classification()) throw input_error("robust_accuracy: needs a classification dataset");
    const auto attacks = batch_attack(model, loss, ds.inputs, ds.labels, cfg, threads);
    std::size_t robust = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::size_t clean_pred = argmax_class(model_forward(model, ds.inputs[i]));
        const std::size_t adv_pred = argmax_class(model_forward(model, attacks[i].x_adv));
        if (clean_pred == std::get<std::size_t>(ds.labels[i]) && adv_pred == clean_pred) ++robust;
    }
    return static_cast<double>(robust) / static_cast<double>(ds.size());
}

/// (robust - clean)/clean; the sign matches the published tables rather
/// than the inline formula (see README).
inline double relative_diff(double clean_loss, double robust_loss) {
    if (clean_loss <= 0.0) throw input_error("relative_diff: clean loss must be > 0");
    return (robust_loss - clean_loss) / clean_loss;
}

struct EpsSweepPoint {
    double epsilon = 0.0;
    double robust_accuracy = 0.0;
    std::vector<AttackResult> loss_attacks;
    std::vector<bool> robust;
};

/// Warm-start chained robust accuracy over ascending epsilons. A point found
/// non-robust at some epsilon stays non-robust at every larger one (the
/// witnessing perturbation lies in every larger ball), so the sequence is
/// non-increasing by construction.
inline std::vector<EpsSweepPoint> chained_robust_accuracy(const ComposedModel& model,
                                                          const Dataset& ds, const LossKind& loss,
                                                          AttackConfig cfg,
                                                          const std::vector<double>& epsilons,
                                                          int threads = 1) {
    ds.validate();
    if (!ds.is_classification())
        throw input_error("chained_robust_accuracy: needs a classification dataset");
    if (epsilons.empty()) throw input_error("chained_robust_accuracy: no epsilons");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (epsilons[i] < epsilons[i - 1])
            throw input_error("chained_robust_accuracy: epsilons must be ascending");

    std::vector<std::size_t> clean_pred(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        clean_pred[i] = argmax_class(model_forward(model, ds.inputs[i]));

    std::vector<EpsSweepPoint> points;
    std::vector<Vector> warm;
    std::vector<bool> still_robust(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        still_robust[i] = clean_pred[i] == std::get<std::size_t>(ds.labels[i]);

    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        cfg.epsilon = epsilons[k];
        const std::vector<Vector>* warm_ptr = k == 0 ? nullptr : &warm;
        auto attacks = batch_attack(model, loss, ds.inputs, ds.labels, cfg, threads, warm_ptr);

        EpsSweepPoint pt;
        pt.epsilon = epsilons[k];
        std::size_t robust = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const bool survives = argmax_class(model_forward(model, attacks[i].x_adv)) == clean_pred[i];
            still_robust[i] = still_robust[i] && survives;
            if (still_robust[i]) ++robust;
        }
        pt.robust_accuracy = static_cast<double>(robust) / static_cast<double>(ds.size());
        pt.robust = still_robust;
        warm.clear();
        for (const auto& r : attacks) warm.push_back(r.x_adv);
        pt.loss_attacks = std::move(attacks);
        points.push_back(std::move(pt));
    }
    return points;
}

}  // namespace rta
