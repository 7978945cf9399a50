// rta: train composed models, attack them, and audit the robustness-transfer
// bounds. See README.md for the full command reference.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rta/attack.hpp"
#include "rta/data.hpp"
#include "rta/errors.hpp"
#include "rta/model_io.hpp"
#include "rta/report.hpp"
#include "rta/theory.hpp"
#include "rta/train.hpp"

namespace {

using nlohmann::ordered_json;

rta::LossKind loss_from_string(const std::string& s) {
    if (s == "ce") return rta::LossKind::softmax_ce();
    if (s == "euclid") return rta::LossKind::euclid();
    throw rta::input_error("unknown loss '" + s + "' (expected ce or euclid)");
}

struct AttackFlags {
    std::string norm = "linf";
    double eps = 0.05;
    int steps = -1;       // -1: per-loss default (ce 20, euclid 50)
    double rel_step = -1; // -1: per-loss default (ce 0.7, euclid 1.0)
    int restarts = 1;
    bool no_random_start = false;
    std::uint64_t seed = 0;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--attack-norm", norm, "attack norm: linf or l2")
            ->check(CLI::IsMember({"linf", "l2"}));
        cmd->add_option("--eps", eps, "perturbation budget epsilon")->check(CLI::NonNegativeNumber);
        cmd->add_option("--steps", steps, "PGD steps (default 20 for ce, 50 for euclid)");
        cmd->add_option("--rel-step", rel_step,
                        "step size relative to epsilon (default 0.7 for ce, 1.0 for euclid)");
        cmd->add_option("--restarts", restarts, "random restarts");
        cmd->add_flag("--no-random-start", no_random_start, "start PGD from delta = 0");
    }

    rta::AttackConfig build(const rta::LossKind& loss) const {
        rta::AttackConfig cfg;
        cfg.norm = rta::attack_norm_from_string(norm);
        cfg.epsilon = eps;
        const bool euclid = loss.tag == rta::LossTag::Euclid;
        cfg.steps = steps > 0 ? steps : (euclid ? 50 : 20);
        cfg.relative_step_size = rel_step > 0 ? rel_step : (euclid ? 1.0 : 0.7);
        cfg.restarts = restarts;
        cfg.random_start = !no_random_start;
        cfg.seed = seed;
        cfg.validate();
        return cfg;
    }
};

struct TrainFlags {
    int epochs = 30;
    int batch_size = 16;
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0;
    double adv_eps = 0.0;
    std::string adv_norm = "linf";
    int adv_steps = 10;
    double adv_rel_step = 0.7;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--batch-size", batch_size, "minibatch size");
        cmd->add_option("--lr", lr, "initial learning rate (cosine-annealed per step)");
        cmd->add_option("--momentum", momentum, "SGD momentum");
        cmd->add_option("--weight-decay", weight_decay, "L2 weight decay (weights only)");
        cmd->add_option("--adv-eps", adv_eps, "adversarial training epsilon (pretrain)");
        cmd->add_option("--adv-norm", adv_norm, "adversarial training norm")
            ->check(CLI::IsMember({"linf", "l2"}));
        cmd->add_option("--adv-steps", adv_steps, "PGD steps during adversarial training");
        cmd->add_option("--adv-rel-step", adv_rel_step, "relative step size during training");
    }

    rta::TrainConfig build(const rta::LossKind& loss, std::uint64_t seed, bool adversarial) const {
        rta::TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.lr0 = lr;
        cfg.momentum = momentum;
        cfg.weight_decay = weight_decay;
        cfg.loss = loss;
        cfg.seed = seed;
        if (adversarial) {
            rta::AttackConfig atk;
            atk.norm = rta::attack_norm_from_string(adv_norm);
            atk.epsilon = adv_eps;
            atk.steps = adv_steps;
            atk.relative_step_size = adv_rel_step;
            atk.restarts = 1;
            atk.random_start = true;
            atk.seed = seed;
            cfg.adversarial = atk;
        }
        cfg.validate();
        return cfg;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rta::io_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw rta::io_error("write failed: " + path);
}

void emit_json(const ordered_json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

rta::Dataset load_dataset(const std::string& path,
                          const std::optional<std::pair<double, double>>& range = std::nullopt) {
    rta::Dataset ds = rta::load_csv(path);
    ds.feature_range = range;
    return ds;
}

void write_train_log(const std::string& path, const std::string& method, std::uint64_t seed,
                     const rta::TrainLog& log) {
    ordered_json j;
    j["method"] = method;
    j["seed"] = seed;
    j["total_steps"] = log.total_steps;
    ordered_json epochs = ordered_json::array();
    for (std::size_t i = 0; i < log.epoch_loss.size(); ++i)
        epochs.push_back({{"epoch", i}, {"clean_loss", log.epoch_loss[i]}, {"lr", log.epoch_lr[i]}});
    j["epochs"] = epochs;
    write_text(path, j.dump(2) + "\n");
}

struct GenBlobsArgs {
    std::size_t k = 3, d = 20, n = 100;
    double sep = 8.0, spread = 1.0;
    std::uint64_t seed = 0;
    std::string out;
};

struct GenFactorsArgs {
    std::size_t d = 20, n = 300, factors = 4, target = 0;
    double noise = 0.01;
    std::uint64_t seed = 0;
    std::string out;
};

struct TrainArgs {
    std::string data, method, rep_model, loss = "ce", out, log;
    std::vector<std::size_t> hidden{32, 16};
    std::string activation = "relu";
    std::uint64_t seed = 0;
    int threads = 1;
    TrainFlags flags;
};

struct AuditArgs {
    std::string model, data, loss = "ce", out;
    std::uint64_t seed = 0;
    double rho = 0.05, c2_factor = 1.5;
    bool per_sample = false, table = false;
    int threads = 1;
    AttackFlags attack;
};

struct SweepArgs {
    AuditArgs base;
    std::vector<double> sweep_eps, sweep_severity, sweep_decay;
    std::vector<double> feature_range{0.0, 1.0};
    std::string train_data;
    TrainFlags train_flags;
};

struct CompareArgs {
    std::string model, data, loss = "ce", out;
    double split_fraction = 0.8;
    std::uint64_t seed = 0;
    int threads = 1;
    TrainFlags train_flags;
    AttackFlags attack;
};

int run_gen_blobs(const GenBlobsArgs& a) {
    const rta::Dataset ds = rta::gen_blobs(a.k, a.d, a.n, a.sep, a.spread, a.seed);
    rta::save_csv(ds, a.out);
    std::cout << "wrote " << ds.size() << " rows (d=" << ds.dim() << ", k=" << a.k << ") to "
              << a.out << "\n";
    return 0;
}

int run_gen_factors(const GenFactorsArgs& a) {
    const rta::Dataset ds =
        rta::gen_factor_regression(a.d, a.n, a.factors, a.target, a.seed, a.noise);
    rta::save_csv(ds, a.out);
    std::cout << "wrote " << ds.size() << " rows (d=" << ds.dim() << ", target factor " << a.target
              << ") to " << a.out << "\n";
    return 0;
}

int run_train(const TrainArgs& a) {
    const rta::LossKind loss = loss_from_string(a.loss);
    const rta::Dataset ds = load_dataset(a.data);
    rta::TrainLog log;
    rta::ComposedModel result;

    if (a.method == "pretrain") {
        if (!a.rep_model.empty())
            throw rta::input_error("--rep-model is only for lp/ft/lpft; pretrain builds a fresh "
                                   "model from --hidden");
        const rta::ComposedModel init = rta::init_model(
            ds.dim(), a.hidden, ds.target_dim(), rta::activation_from_string(a.activation), a.seed);
        const rta::TrainConfig cfg = a.flags.build(loss, a.seed, true);
        result = rta::adversarial_pretrain(init, ds, cfg, &log, a.threads);
    } else if (a.method == "lp") {
        if (a.rep_model.empty()) throw rta::input_error("--method lp requires --rep-model");
        const rta::ComposedModel base = rta::load_model(a.rep_model);
        const rta::TrainConfig cfg = a.flags.build(loss, a.seed, false);
        result.rep = base.rep;
        result.head = rta::linear_probe(base.rep, ds, cfg, &log, a.threads);
        result.freeze_rep = true;
    } else if (a.method == "ft") {
        if (a.rep_model.empty()) throw rta::input_error("--method ft requires --rep-model");
        const rta::ComposedModel base = rta::load_model(a.rep_model);
        if (base.output_dim() != ds.target_dim())
            throw rta::input_error("ft: model outputs " + std::to_string(base.output_dim()) +
                                   " but dataset needs " + std::to_string(ds.target_dim()));
        const rta::TrainConfig cfg = a.flags.build(loss, a.seed, false);
        result = rta::full_finetune(base, ds, cfg, &log, a.threads);
    } else if (a.method == "lpft") {
        if (a.rep_model.empty()) throw rta::input_error("--method lpft requires --rep-model");
        const rta::ComposedModel base = rta::load_model(a.rep_model);
        const rta::TrainConfig cfg = a.flags.build(loss, a.seed, false);
        result = rta::lp_ft(base, ds, cfg, &log, a.threads);
    } else {
        throw rta::input_error("unknown method '" + a.method + "'");
    }

    rta::save_model(result, a.out);
    const std::string log_path = a.log.empty() ? a.out + ".log.json" : a.log;
    write_train_log(log_path, a.method, a.seed, log);
    std::cout << "wrote model to " << a.out << " (log: " << log_path << ")\n";
    return 0;
}

rta::AuditReport audit_once(const AuditArgs& a, const rta::ComposedModel& model,
                            const rta::Dataset& ds, rta::SweepState* state = nullptr,
                            double epsilon_override = -1.0) {
    const rta::LossKind loss = loss_from_string(a.loss);
    AttackFlags flags = a.attack;
    flags.seed = a.seed;
    rta::AttackConfig cfg = flags.build(loss);
    if (epsilon_override >= 0.0) cfg.epsilon = epsilon_override;
    rta::AuditOptions opts;
    opts.rho = a.rho;
    opts.c2_factor = a.c2_factor;
    opts.per_sample = a.per_sample;
    opts.threads = a.threads;
    return rta::run_audit(model, ds, loss, cfg, opts, state);
}

int run_audit_cmd(const AuditArgs& a) {
    const rta::ComposedModel model = rta::load_model(a.model);
    const rta::Dataset ds = load_dataset(a.data);
    const rta::AuditReport report = audit_once(a, model, ds);
    if (a.table) std::cout << rta::render_table(report);
    if (!a.table || !a.out.empty()) emit_json(rta::report_to_json(report), a.out);
    return 0;
}

int run_sweep(const SweepArgs& s) {
    const int axes = (s.sweep_eps.empty() ? 0 : 1) + (s.sweep_severity.empty() ? 0 : 1) +
                     (s.sweep_decay.empty() ? 0 : 1);
    if (axes != 1)
        throw rta::input_error("sweep: exactly one of --sweep-eps, --sweep-severity, "
                               "--sweep-decay is required");
    const rta::ComposedModel model = rta::load_model(s.base.model);
    ordered_json out = ordered_json::array();

    if (!s.sweep_eps.empty()) {
        for (std::size_t i = 1; i < s.sweep_eps.size(); ++i)
            if (s.sweep_eps[i] < s.sweep_eps[i - 1])
                throw rta::input_error("sweep: --sweep-eps must be ascending (attacks chain)");
        const rta::Dataset ds = load_dataset(s.base.data);
        rta::SweepState state;
        for (double eps : s.sweep_eps) {
            rta::AuditReport report = audit_once(s.base, model, ds, &state, eps);
            report.notes.push_back("sweep: epsilon=" + std::to_string(eps));
            out.push_back(rta::report_to_json(report));
        }
    } else if (!s.sweep_severity.empty()) {
        if (s.feature_range.size() != 2 || s.feature_range[0] >= s.feature_range[1])
            throw rta::input_error("sweep: --feature-range must be lo,hi with lo < hi");
        rta::Dataset base =
            load_dataset(s.base.data, std::pair{s.feature_range[0], s.feature_range[1]});
        for (double severity : s.sweep_severity) {
            // One noise seed for the whole sweep: each severity scales the
            // same underlying draws.
            const rta::Dataset shifted = rta::corrupt_gaussian(base, severity, s.base.seed);
            rta::AuditReport report = audit_once(s.base, model, shifted);
            report.notes.push_back("sweep: severity=" + std::to_string(severity));
            out.push_back(rta::report_to_json(report));
        }
    } else {
        const rta::Dataset eval_ds = load_dataset(s.base.data);
        const rta::Dataset train_ds =
            s.train_data.empty() ? eval_ds : load_dataset(s.train_data);
        const rta::LossKind loss = loss_from_string(s.base.loss);
        for (double decay : s.sweep_decay) {
            if (decay < 0.0) throw rta::input_error("sweep: negative weight decay");
            rta::TrainConfig cfg = s.train_flags.build(loss, s.base.seed, false);
            cfg.weight_decay = decay;
            rta::ComposedModel probed;
            probed.rep = model.rep;
            probed.head = rta::linear_probe(model.rep, train_ds, cfg);
            probed.freeze_rep = true;
            rta::AuditReport report = audit_once(s.base, probed, eval_ds);
            report.notes.push_back("sweep: weight_decay=" + std::to_string(decay));
            out.push_back(rta::report_to_json(report));
        }
    }
    emit_json(out, s.base.out);
    return 0;
}

int run_compare(const CompareArgs& a) {
    const rta::LossKind loss = loss_from_string(a.loss);
    const rta::ComposedModel pre = rta::load_model(a.model);
    const rta::Dataset full = load_dataset(a.data);
    if (!full.is_classification())
        throw rta::input_error("compare-transfer: needs a classification dataset");
    auto [train_ds, test_ds] = rta::split(full, a.split_fraction, a.seed);
    if (train_ds.target_dim() != full.target_dim())
        throw rta::input_error("compare-transfer: the train split is missing a class; use a "
                               "larger --split fraction or more data");

    AttackFlags atk = a.attack;
    atk.seed = a.seed;
    const rta::AttackConfig cfg = atk.build(loss);
    const rta::TrainConfig tcfg = a.train_flags.build(loss, a.seed, false);

    const rta::AsScoreResult pre_as = rta::as_score(pre.rep, test_ds.inputs, cfg, a.threads);

    const auto eval_method = [&](const rta::ComposedModel& m) {
        ordered_json j;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < test_ds.size(); ++i)
            if (rta::argmax_class(rta::model_forward(m, test_ds.inputs[i])) ==
                std::get<std::size_t>(test_ds.labels[i]))
                ++correct;
        j["clean_acc"] = static_cast<double>(correct) / static_cast<double>(test_ds.size());
        j["robust_acc"] = rta::robust_accuracy(m, test_ds, cfg, a.threads, loss);
        const rta::AsScoreResult as = rta::as_score(m.rep, test_ds.inputs, cfg, a.threads);
        j["as_score"] = as.score;
        j["as_equals_pre_transfer"] =
            std::memcmp(&as.score, &pre_as.score, sizeof(double)) == 0;
        return j;
    };

    rta::ComposedModel lp_model;
    lp_model.rep = pre.rep;
    lp_model.head = rta::linear_probe(pre.rep, train_ds, tcfg);
    lp_model.freeze_rep = true;

    // FT gets a fresh seeded head for the downstream classes, then every
    // parameter updates.
    rta::ComposedModel ft_init;
    ft_init.rep = pre.rep;
    {
        const std::size_t r = pre.rep.output_dim();
        const std::size_t c = train_ds.target_dim();
        ft_init.head.weight = rta::DenseMatrix(c, r);
        rta::RngStream rng(tcfg.seed, rta::StreamPurpose::Init);
        const double scale = 1.0 / std::sqrt(static_cast<double>(r));
        for (double& v : ft_init.head.weight.values()) v = rng.uniform(-scale, scale);
        ft_init.head.bias = rta::Vector(c, 0.0);
        ft_init.freeze_rep = false;
    }
    const rta::ComposedModel ft_model = rta::full_finetune(ft_init, train_ds, tcfg);
    const rta::ComposedModel lpft_model = rta::lp_ft(pre, train_ds, tcfg);

    ordered_json j;
    j["tool_version"] = rta::kToolVersion;
    j["timestamp"] = rta::utc_timestamp();
    j["seed"] = a.seed;
    j["dataset"] = {{"name", full.name},
                    {"n_train", train_ds.size()},
                    {"n_test", test_ds.size()},
                    {"d", full.dim()}};
    j["attack"] = {{"norm", rta::to_string(cfg.norm)}, {"epsilon", cfg.epsilon}};
    j["pre_transfer_as_score"] = pre_as.score;
    j["methods"] = {{"lp", eval_method(lp_model)},
                    {"ft", eval_method(ft_model)},
                    {"lpft", eval_method(lpft_model)}};
    emit_json(j, a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robustness transfer audit toolkit"};
    app.require_subcommand(1);

    GenBlobsArgs blobs_args;
    GenFactorsArgs factors_args;
    TrainArgs train_args;
    AuditArgs audit_args;
    SweepArgs sweep_args;
    CompareArgs compare_args;

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
    gen->require_subcommand(1);
    auto* blobs = gen->add_subcommand("blobs", "Gaussian class blobs in [0,1]^d");
    blobs->add_option("--k", blobs_args.k, "number of classes (>= 2)");
    blobs->add_option("--d", blobs_args.d, "input dimension");
    blobs->add_option("--n", blobs_args.n, "points per class");
    blobs->add_option("--sep", blobs_args.sep, "center separation");
    blobs->add_option("--spread", blobs_args.spread, "per-class standard deviation");
    blobs->add_option("--seed", blobs_args.seed, "generator seed");
    blobs->add_option("--out", blobs_args.out, "output CSV path")->required();
    blobs->callback([&] { run_gen_blobs(blobs_args); });

    auto* factors = gen->add_subcommand("factors", "latent-factor regression dataset");
    factors->add_option("--d", factors_args.d, "input dimension");
    factors->add_option("--n", factors_args.n, "number of points");
    factors->add_option("--factors", factors_args.factors, "number of latent factors");
    factors->add_option("--target", factors_args.target, "which factor is the regression target");
    factors->add_option("--noise", factors_args.noise, "observation noise scale");
    factors->add_option("--seed", factors_args.seed, "generator seed");
    factors->add_option("--out", factors_args.out, "output CSV path")->required();
    factors->callback([&] { run_gen_factors(factors_args); });

    auto* train = app.add_subcommand("train", "train a model (pretrain / lp / ft / lpft)");
    train->add_option("--data", train_args.data, "training CSV")->required();
    train->add_option("--method", train_args.method, "pretrain | lp | ft | lpft")
        ->required()
        ->check(CLI::IsMember({"pretrain", "lp", "ft", "lpft"}));
    train->add_option("--rep-model", train_args.rep_model,
                      "source model file (required for lp/ft/lpft)");
    train->add_option("--hidden", train_args.hidden, "hidden layer sizes for pretrain")
        ->delimiter(',');
    train->add_option("--activation", train_args.activation, "relu | identity | tanh")
        ->check(CLI::IsMember({"relu", "identity", "tanh"}));
    train->add_option("--loss", train_args.loss, "ce | euclid")
        ->check(CLI::IsMember({"ce", "euclid"}));
    train->add_option("--seed", train_args.seed, "training seed");
    train->add_option("--threads", train_args.threads, "threads for in-training attacks");
    train->add_option("--out", train_args.out, "output model path")->required();
    train->add_option("--log", train_args.log, "training log path (default <out>.log.json)");
    train_args.flags.add_options(train);
    train->callback([&] { run_train(train_args); });

    auto* audit = app.add_subcommand("audit", "audit a model against the bounds");
    audit->add_option("--model", audit_args.model, "model file")->required();
    audit->add_option("--data", audit_args.data, "evaluation CSV")->required();
    audit->add_option("--loss", audit_args.loss, "ce | euclid")
        ->check(CLI::IsMember({"ce", "euclid"}));
    audit->add_option("--seed", audit_args.seed, "attack seed");
    audit->add_option("--rho", audit_args.rho, "confidence parameter rho in (0,1)");
    audit->add_option("--c2-factor", audit_args.c2_factor,
                      "C2 = factor * max observed loss");
    audit->add_flag("--per-sample", audit_args.per_sample, "include per-sample records");
    audit->add_flag("--table", audit_args.table, "print a text table instead of JSON on stdout");
    audit->add_option("--threads", audit_args.threads, "attack worker threads");
    audit->add_option("--out", audit_args.out, "report path (default stdout)");
    audit_args.attack.add_options(audit);
    audit->callback([&] { run_audit_cmd(audit_args); });

    auto* sweep = app.add_subcommand("sweep", "audit along one sweep axis");
    sweep->add_option("--model", sweep_args.base.model, "model file")->required();
    sweep->add_option("--data", sweep_args.base.data, "evaluation CSV")->required();
    sweep->add_option("--loss", sweep_args.base.loss, "ce | euclid")
        ->check(CLI::IsMember({"ce", "euclid"}));
    sweep->add_option("--seed", sweep_args.base.seed, "attack / corruption / training seed");
    sweep->add_option("--rho", sweep_args.base.rho, "confidence parameter rho");
    sweep->add_option("--c2-factor", sweep_args.base.c2_factor, "C2 factor");
    sweep->add_option("--threads", sweep_args.base.threads, "attack worker threads");
    sweep->add_option("--out", sweep_args.base.out, "report path (default stdout)");
    sweep->add_option("--sweep-eps", sweep_args.sweep_eps,
                      "ascending epsilons; attacks warm-start from the previous epsilon")
        ->delimiter(',');
    sweep->add_option("--sweep-severity", sweep_args.sweep_severity,
                      "Gaussian corruption severities")
        ->delimiter(',');
    sweep->add_option("--sweep-decay", sweep_args.sweep_decay,
                      "weight decays; re-trains a linear probe per value")
        ->delimiter(',');
    sweep->add_option("--feature-range", sweep_args.feature_range,
                      "lo,hi clamp range for corruption (default 0,1)")
        ->delimiter(',');
    sweep->add_option("--train-data", sweep_args.train_data,
                      "probe training CSV for --sweep-decay (default: --data)");
    sweep_args.base.attack.add_options(sweep);
    sweep_args.train_flags.add_options(sweep);
    sweep->callback([&] { run_sweep(sweep_args); });

    auto* compare = app.add_subcommand("compare-transfer",
                                       "compare LP / FT / LP-FT on a downstream task");
    compare->add_option("--model", compare_args.model, "pretrained model file")->required();
    compare->add_option("--data", compare_args.data, "downstream CSV (split internally)")
        ->required();
    compare->add_option("--loss", compare_args.loss, "ce | euclid")
        ->check(CLI::IsMember({"ce", "euclid"}));
    compare->add_option("--split", compare_args.split_fraction, "train fraction of --data");
    compare->add_option("--seed", compare_args.seed, "seed for split, training, and attacks");
    compare->add_option("--threads", compare_args.threads, "attack worker threads");
    compare->add_option("--out", compare_args.out, "report path (default stdout)");
    compare_args.train_flags.add_options(compare);
    compare_args.attack.add_options(compare);
    compare->callback([&] { run_compare(compare_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const rta::theory_violation& e) {
        std::cerr << "theory violation: " << e.what() << "\n";
        return 4;
    } catch (const rta::spectral_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const rta::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const rta::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const rta::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const rta::input_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
