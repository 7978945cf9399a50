#pragma once

#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rta/attack.hpp"
#include "rta/data.hpp"
#include "rta/errors.hpp"
#include "rta/model.hpp"
#include "rta/theory.hpp"

namespace rta {

inline constexpr const char* kToolVersion = "0.1.0";

struct CriterionSummary {
    double prop_fulfilled = 0.0;
    double rob_fulfilled = 0.0;
    long n_evaluated = 0;
    long n_fulfilled = 0;
};

struct AuditMetrics {
    double clean_loss = 0.0;
    double adv_loss = 0.0;
    double diff_loss = 0.0;
    std::optional<double> clean_acc;
    std::optional<double> robust_acc;
    double l_alpha_1 = 0.0;
    double l_alpha_2 = 0.0;
    double l_alpha_inf = 0.0;
    std::string alpha_used;
    double lemma1_lhs = 0.0;
    double as_score = 0.0;
    HoeffdingTerm hoeffding;
    double theorem1_rhs = 0.0;
    std::optional<double> relative_diff;
    std::optional<CriterionSummary> criterion;
};

struct RepLayerDesc {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string activation;
};

struct AuditReport {
    std::string tool_version = kToolVersion;
    std::string timestamp;
    std::uint64_t seed = 0;
    std::string dataset_name;
    std::string dataset_kind;
    std::size_t dataset_n = 0;
    std::size_t dataset_d = 0;
    std::vector<RepLayerDesc> rep_layers;
    std::size_t head_rows = 0;
    std::size_t head_cols = 0;
    bool head_bias = false;
    AttackConfig attack;
    std::string loss_name;
    AuditMetrics metrics;
    std::vector<std::string> notes;
    std::optional<std::vector<CriterionRecord>> per_sample;
};

struct AuditOptions {
    double rho = 0.05;
    double c2_factor = 1.5;
    bool per_sample = false;
    int threads = 1;
};

/// Carries warm starts and cumulative robustness flags between the audits of
/// a chained epsilon sweep.
struct SweepState {
    bool active = false;
    std::vector<Vector> loss_warm;
    std::vector<Vector> rep_warm;
    std::vector<bool> still_robust;
};

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// One full audit: MaxLoss attacks on f, rep-displacement attacks on g, the
/// Lemma 1 / Theorem 1 quantities, and (for classifiers) accuracies and the
/// margin criterion. With a SweepState, attacks warm-start from the previous
/// epsilon and robustness flags accumulate, making sweeps monotone.
inline AuditReport run_audit(const ComposedModel& model, const Dataset& ds, const LossKind& loss,
                             const AttackConfig& cfg, const AuditOptions& opts = {},
                             SweepState* state = nullptr) {
    model.validate();
    ds.validate();
    cfg.validate();
    if (ds.dim() != model.input_dim())
        throw input_error("audit: dataset dim " + std::to_string(ds.dim()) +
                          " does not match model input dim " + std::to_string(model.input_dim()));
    const std::size_t n = ds.size();
    const bool classification = ds.is_classification();
    const bool chained = state && state->active;

    const std::vector<Vector>* loss_warm = chained ? &state->loss_warm : nullptr;
    const auto loss_attacks =
        batch_attack(model, loss, ds.inputs, ds.labels, cfg, opts.threads, loss_warm);

    Vector clean_losses(n), adv_losses(n);
    std::vector<std::size_t> clean_pred(n), adv_pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector clean_logits = model_forward(model, ds.inputs[i]);
        clean_losses[i] = loss_value(loss, clean_logits, ds.labels[i]);
        adv_losses[i] = loss_attacks[i].objective_value;
        if (classification) {
            clean_pred[i] = argmax_class(clean_logits);
            adv_pred[i] = argmax_class(model_forward(model, loss_attacks[i].x_adv));
        }
    }

    const std::vector<Vector>* rep_warm = chained ? &state->rep_warm : nullptr;
    const auto rep_attacks = batch_attack(model.rep, ds.inputs, cfg, opts.threads, rep_warm);
    Vector sensitivities(n);
    for (std::size_t i = 0; i < n; ++i) sensitivities[i] = rep_attacks[i].objective_value;

    const LemmaOneAudit lemma =
        detail::lemma1_assemble(clean_losses, adv_losses, model.head.weight, loss, sensitivities);

    AuditReport report;
    report.timestamp = utc_timestamp();
    report.seed = cfg.seed;
    report.dataset_name = ds.name;
    report.dataset_kind = classification ? "classification" : "regression";
    report.dataset_n = n;
    report.dataset_d = ds.dim();
    for (const Layer& layer : model.rep.layers)
        report.rep_layers.push_back(
            {layer.weight.rows(), layer.weight.cols(), to_string(layer.activation)});
    report.head_rows = model.head.weight.rows();
    report.head_cols = model.head.weight.cols();
    report.head_bias = model.head.bias.has_value();
    report.attack = cfg;
    report.loss_name = loss.name();

    AuditMetrics& m = report.metrics;
    m.clean_loss = lemma.clean_loss_avg;
    m.adv_loss = lemma.adv_loss_avg;
    m.diff_loss = lemma.diff;
    m.l_alpha_1 = l_alpha(model.head.weight, AlphaNorm::L1);
    m.l_alpha_2 = l_alpha(model.head.weight, AlphaNorm::L2);
    m.l_alpha_inf = l_alpha(model.head.weight, AlphaNorm::Linf);
    m.alpha_used = to_string(loss.lipschitz_norm);
    m.lemma1_lhs = lemma.lhs;
    m.as_score = lemma.as_score;

    double max_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_loss = std::max({max_loss, clean_losses[i], adv_losses[i]});
    const double c2 = std::max(opts.c2_factor * max_loss, 1e-12);
    m.hoeffding = hoeffding_term(c2, static_cast<long>(n), opts.rho);
    m.theorem1_rhs = theorem1_rhs(lemma, m.hoeffding);
    if (m.clean_loss > 0.0) m.relative_diff = relative_diff(m.clean_loss, m.adv_loss);

    if (classification) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (clean_pred[i] == std::get<std::size_t>(ds.labels[i])) ++correct;
        m.clean_acc = static_cast<double>(correct) / static_cast<double>(n);

        if (state && !state->active) {
            state->still_robust.assign(n, false);
            for (std::size_t i = 0; i < n; ++i)
                state->still_robust[i] = clean_pred[i] == std::get<std::size_t>(ds.labels[i]);
        }
        std::size_t robust = 0;
        std::vector<CriterionRecord> records;
        records.reserve(n);
        CriterionSummary crit;
        crit.n_evaluated = static_cast<long>(n);
        std::size_t robust_fulfilled = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool survives = adv_pred[i] == clean_pred[i];
            bool counted_robust;
            if (state) {
                state->still_robust[i] = state->still_robust[i] && survives;
                counted_robust = state->still_robust[i];
            } else {
                counted_robust =
                    survives && clean_pred[i] == std::get<std::size_t>(ds.labels[i]);
            }
            if (counted_robust) ++robust;

            CriterionRecord rec;
            rec.sample_index = i;
            const MarginResult mr = criterion_margin(model, ds.inputs[i]);
            rec.predicted = mr.predicted;
            rec.margin = mr.margin;
            rec.sensitivity = sensitivities[i];
            rec.fulfilled = rec.sensitivity <= rec.margin;
            rec.robust_under_attack = survives;
            rec.correct = clean_pred[i] == std::get<std::size_t>(ds.labels[i]);
            if (rec.fulfilled) {
                ++crit.n_fulfilled;
                if (rec.robust_under_attack) ++robust_fulfilled;
            }
            records.push_back(rec);
        }
        m.robust_acc = static_cast<double>(robust) / static_cast<double>(n);
        crit.prop_fulfilled = static_cast<double>(crit.n_fulfilled) / static_cast<double>(n);
        crit.rob_fulfilled = crit.n_fulfilled == 0 ? 1.0
                                                   : static_cast<double>(robust_fulfilled) /
                                                         static_cast<double>(crit.n_fulfilled);
        m.criterion = crit;
        if (opts.per_sample) report.per_sample = std::move(records);
    }

    if (state) {
        state->active = true;
        state->loss_warm.clear();
        state->rep_warm.clear();
        for (const auto& r : loss_attacks) state->loss_warm.push_back(r.x_adv);
        for (const auto& r : rep_attacks) state->rep_warm.push_back(r.x_adv);
    }

    report.notes.push_back(
        "relative_diff = (adv_loss - clean_loss) / clean_loss; positive means the attack "
        "raised the loss");
    report.notes.push_back(
        "sensitivity is a PGD lower bound on the true max displacement; 'fulfilled' is an "
        "empirical predicate, not a certificate");
    return report;
}

inline nlohmann::ordered_json report_to_json(const AuditReport& r) {
    nlohmann::ordered_json j;
    j["tool_version"] = r.tool_version;
    j["timestamp"] = r.timestamp;
    j["seed"] = r.seed;
    j["dataset"] = {{"name", r.dataset_name},
                    {"kind", r.dataset_kind},
                    {"n", r.dataset_n},
                    {"d", r.dataset_d}};
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const RepLayerDesc& l : r.rep_layers)
        layers.push_back({{"rows", l.rows}, {"cols", l.cols}, {"activation", l.activation}});
    j["model"] = {{"rep_layers", layers},
                  {"head", {{"rows", r.head_rows}, {"cols", r.head_cols}, {"bias", r.head_bias}}}};
    j["attack"] = {{"norm", to_string(r.attack.norm)},
                   {"epsilon", r.attack.epsilon},
                   {"steps", r.attack.steps},
                   {"relative_step_size", r.attack.relative_step_size},
                   {"restarts", r.attack.restarts},
                   {"random_start", r.attack.random_start},
                   {"seed", r.attack.seed}};
    j["loss"] = r.loss_name;

    nlohmann::ordered_json m;
    m["clean_loss"] = r.metrics.clean_loss;
    m["adv_loss"] = r.metrics.adv_loss;
    m["diff_loss"] = r.metrics.diff_loss;
    m["clean_acc"] = r.metrics.clean_acc ? nlohmann::ordered_json(*r.metrics.clean_acc)
                                         : nlohmann::ordered_json(nullptr);
    m["robust_acc"] = r.metrics.robust_acc ? nlohmann::ordered_json(*r.metrics.robust_acc)
                                           : nlohmann::ordered_json(nullptr);
    m["l_alpha"] = {{"1", r.metrics.l_alpha_1},
                    {"2", r.metrics.l_alpha_2},
                    {"inf", r.metrics.l_alpha_inf}};
    m["alpha_used"] = r.metrics.alpha_used;
    m["lemma1_lhs"] = r.metrics.lemma1_lhs;
    m["as_score"] = r.metrics.as_score;
    m["hoeffding"] = {{"C2", r.metrics.hoeffding.C2},
                      {"n", r.metrics.hoeffding.n},
                      {"rho", r.metrics.hoeffding.rho},
                      {"value", r.metrics.hoeffding.value}};
    m["theorem1_rhs"] = r.metrics.theorem1_rhs;
    m["relative_diff"] = r.metrics.relative_diff ? nlohmann::ordered_json(*r.metrics.relative_diff)
                                                 : nlohmann::ordered_json(nullptr);
    if (r.metrics.criterion) {
        m["criterion"] = {{"prop_fulfilled", r.metrics.criterion->prop_fulfilled},
                          {"rob_fulfilled", r.metrics.criterion->rob_fulfilled},
                          {"n_evaluated", r.metrics.criterion->n_evaluated},
                          {"n_fulfilled", r.metrics.criterion->n_fulfilled},
                          {"certified", false}};
    } else {
        m["criterion"] = nullptr;
    }
    j["metrics"] = m;
    j["notes"] = r.notes;
    if (r.per_sample) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const CriterionRecord& rec : *r.per_sample)
            arr.push_back({{"index", rec.sample_index},
                           {"predicted", rec.predicted},
                           {"margin", rec.margin},
                           {"sensitivity", rec.sensitivity},
                           {"fulfilled", rec.fulfilled},
                           {"robust_under_attack", rec.robust_under_attack},
                           {"correct", rec.correct}});
        j["per_sample"] = arr;
    }
    return j;
}

/// Validates a JSON value against the subset of JSON Schema used by
/// schemas/audit_report.schema.json: type, required, properties, items,
/// enum, const, minimum, maximum. Returns human-readable problems.
inline void schema_validate_impl(const nlohmann::json& inst, const nlohmann::json& schema,
                                 const std::string& path, std::vector<std::string>& out) {
    if (schema.contains("type")) {
        const auto holds = [&](const std::string& t) {
            if (t == "object") return inst.is_object();
            if (t == "array") return inst.is_array();
            if (t == "string") return inst.is_string();
            if (t == "integer") return inst.is_number_integer() || inst.is_number_unsigned();
            if (t == "number") return inst.is_number();
            if (t == "boolean") return inst.is_boolean();
            if (t == "null") return inst.is_null();
            return false;
        };
        const auto& ty = schema.at("type");
        bool ok = false;
        if (ty.is_string()) {
            ok = holds(ty.get<std::string>());
        } else {
            for (const auto& t : ty)
                if (holds(t.get<std::string>())) {
                    ok = true;
                    break;
                }
        }
        if (!ok) {
            out.push_back(path + ": type mismatch (expected " + ty.dump() + ")");
            return;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& v : schema.at("enum"))
            if (v == inst) {
                ok = true;
                break;
            }
        if (!ok) out.push_back(path + ": not in enum " + schema.at("enum").dump());
    }
    if (schema.contains("const") && schema.at("const") != inst)
        out.push_back(path + ": expected const " + schema.at("const").dump());
    if (inst.is_number()) {
        if (schema.contains("minimum") && inst.get<double>() < schema.at("minimum").get<double>())
            out.push_back(path + ": below minimum " + schema.at("minimum").dump());
        if (schema.contains("maximum") && inst.get<double>() > schema.at("maximum").get<double>())
            out.push_back(path + ": above maximum " + schema.at("maximum").dump());
    }
    if (inst.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema.at("required"))
                if (!inst.contains(key.get<std::string>()))
                    out.push_back(path + ": missing required '" + key.get<std::string>() + "'");
        if (schema.contains("properties"))
            for (auto it = schema.at("properties").begin(); it != schema.at("properties").end();
                 ++it)
                if (inst.contains(it.key()))
                    schema_validate_impl(inst.at(it.key()), it.value(), path + "." + it.key(), out);
    }
    if (inst.is_array() && schema.contains("items")) {
        std::size_t i = 0;
        for (const auto& item : inst)
            schema_validate_impl(item, schema.at("items"), path + "[" + std::to_string(i++) + "]",
                                 out);
    }
}

inline std::vector<std::string> schema_validate(const nlohmann::json& instance,
                                                const nlohmann::json& schema) {
    std::vector<std::string> problems;
    schema_validate_impl(instance, schema, "$", problems);
    return problems;
}

inline std::string render_table(const AuditReport& r) {
    const auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    const auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("-"); };
    std::string out;
    const auto row = [&](const std::string& k, const std::string& v) {
        out += k;
        out += std::string(k.size() < 24 ? 24 - k.size() : 1, ' ');
        out += v;
        out += '\n';
    };
    row("dataset", r.dataset_name + " (n=" + std::to_string(r.dataset_n) +
                       ", d=" + std::to_string(r.dataset_d) + ", " + r.dataset_kind + ")");
    row("loss / attack",
        r.loss_name + " / " + to_string(r.attack.norm) + " eps=" + num(r.attack.epsilon));
    row("clean acc", opt(r.metrics.clean_acc));
    row("robust acc", opt(r.metrics.robust_acc));
    row("clean loss", num(r.metrics.clean_loss));
    row("adv loss", num(r.metrics.adv_loss));
    row("diff loss", num(r.metrics.diff_loss));
    row("relative diff", opt(r.metrics.relative_diff));
    row("L_1 / L_2 / L_inf", num(r.metrics.l_alpha_1) + " / " + num(r.metrics.l_alpha_2) + " / " +
                                 num(r.metrics.l_alpha_inf));
    row("lemma1 lhs", num(r.metrics.lemma1_lhs));
    row("AS score", num(r.metrics.as_score));
    row("theorem1 rhs", num(r.metrics.theorem1_rhs) + "  (C2=" + num(r.metrics.hoeffding.C2) +
                            ", rho=" + num(r.metrics.hoeffding.rho) + ")");
    if (r.metrics.criterion) {
        row("prop. fulfilled", num(r.metrics.criterion->prop_fulfilled));
        row("rob. fulfilled", num(r.metrics.criterion->rob_fulfilled) + "  (over " +
                                  std::to_string(r.metrics.criterion->n_fulfilled) +
                                  " fulfilled)");
    }
    return out;
}

}  // namespace rta
