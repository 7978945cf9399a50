#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rta/errors.hpp"
#include "rta/matrix.hpp"
#include "rta/model.hpp"
#include "rta/rng.hpp"

namespace rta {

/// Inputs plus either class-index labels or regression targets.
/// feature_range is the [lo, hi] interval used to clamp corrupted features.
struct Dataset {
    std::vector<Vector> inputs;
    std::vector<Label> labels;
    std::string name;
    std::optional<std::pair<double, double>> feature_range;

    std::size_t size() const { return inputs.size(); }
    std::size_t dim() const {
        if (inputs.empty()) throw input_error("Dataset: empty");
        return inputs.front().size();
    }
    bool is_classification() const {
        if (labels.empty()) throw input_error("Dataset: empty");
        return std::holds_alternative<std::size_t>(labels.front());
    }
    std::size_t num_classes() const {
        std::size_t k = 0;
        for (const Label& y : labels) {
            if (!std::holds_alternative<std::size_t>(y))
                throw input_error("Dataset: num_classes on a regression dataset");
            k = std::max(k, std::get<std::size_t>(y) + 1);
        }
        return k;
    }
    std::size_t target_dim() const {
        if (labels.empty()) throw input_error("Dataset: empty");
        if (is_classification()) return num_classes();
        return std::get<Vector>(labels.front()).size();
    }

    void validate() const {
        if (inputs.empty()) throw input_error("Dataset: empty");
        if (labels.size() != inputs.size())
            throw input_error("Dataset: " + std::to_string(inputs.size()) + " inputs but " +
                              std::to_string(labels.size()) + " labels");
        const std::size_t d = inputs.front().size();
        for (const Vector& x : inputs)
            if (x.size() != d) throw input_error("Dataset: ragged input dimensions");
    }

    std::vector<Sample> samples() const {
        std::vector<Sample> out;
        out.reserve(inputs.size());
        for (std::size_t i = 0; i < inputs.size(); ++i) out.push_back({inputs[i], labels[i]});
        return out;
    }
};

namespace detail {

inline Vector random_unit(RngStream& rng, std::size_t d) {
    Vector u(d);
    double n = 0.0;
    do {
        for (double& v : u) v = rng.gaussian();
        n = l2_norm(u);
    } while (n < 1e-12);
    scale_inplace(u, 1.0 / n);
    return u;
}

}  // namespace detail

/// k Gaussian blobs around well-separated random unit directions, rescaled
/// per coordinate so features span [0,1] exactly.
inline Dataset gen_blobs(std::size_t k, std::size_t d, std::size_t n_per_class, double separation,
                         double spread, std::uint64_t seed) {
    if (k < 2) throw input_error("gen_blobs: need at least 2 classes");
    if (d == 0 || n_per_class == 0) throw input_error("gen_blobs: zero dimension or count");
    if (separation <= 0.0 || spread < 0.0)
        throw input_error("gen_blobs: separation must be > 0 and spread >= 0");

    RngStream rng(seed, StreamPurpose::Data);

    // Centers: rejection-sample unit directions with pairwise angle >= 60
    // degrees (dot <= 0.5).
    std::vector<Vector> centers;
    std::size_t tries = 0;
    while (centers.size() < k) {
        if (++tries > 100000)
            throw input_error("gen_blobs: cannot place " + std::to_string(k) +
                              " centers with 60-degree separation in dimension " +
                              std::to_string(d) + "; reduce k or increase d");
        Vector u = detail::random_unit(rng, d);
        bool ok = true;
        for (const Vector& c : centers)
            if (dot(c, u) > 0.5) {
                ok = false;
                break;
            }
        if (ok) centers.push_back(std::move(u));
    }

    Dataset ds;
    ds.name = "blobs";
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            Vector x(d);
            for (std::size_t j = 0; j < d; ++j)
                x[j] = separation * centers[c][j] + spread * rng.gaussian();
            ds.inputs.push_back(std::move(x));
            ds.labels.emplace_back(c);
        }
    }

    // Per-coordinate min-max rescale into [0,1].
    for (std::size_t j = 0; j < d; ++j) {
        double lo = ds.inputs[0][j], hi = lo;
        for (const Vector& x : ds.inputs) {
            lo = std::min(lo, x[j]);
            hi = std::max(hi, x[j]);
        }
        const double range = hi - lo;
        for (Vector& x : ds.inputs) x[j] = range > 0.0 ? (x[j] - lo) / range : 0.5;
    }
    ds.feature_range = {0.0, 1.0};
    return ds;
}

/// Latent factors z ~ uniform[0,1]^m pushed through tanh(A z) plus seeded
/// noise; the target is one factor. Inputs depend only on (d, n, m, seed), so
/// re-targeting keeps them identical.
inline Dataset gen_factor_regression(std::size_t d, std::size_t n, std::size_t n_factors,
                                     std::size_t target_factor, std::uint64_t seed,
                                     double noise_scale = 0.01,
                                     const std::optional<DenseMatrix>& mixing = std::nullopt) {
    if (n == 0 || d == 0 || n_factors == 0) throw input_error("gen_factor_regression: zero size");
    if (target_factor >= n_factors)
        throw input_error("gen_factor_regression: target_factor out of range");
    if (n_factors > d) throw input_error("gen_factor_regression: n_factors must be <= d");
    if (noise_scale < 0.0) throw input_error("gen_factor_regression: negative noise");

    DenseMatrix a(d, n_factors);
    if (mixing) {
        if (mixing->rows() != d || mixing->cols() != n_factors)
            throw input_error("gen_factor_regression: mixing matrix must be d x n_factors");
        a = *mixing;
    } else {
        RngStream init(seed, StreamPurpose::Init);
        for (double& v : a.values()) v = init.gaussian();
    }

    RngStream rng(seed, StreamPurpose::Data);
    RngStream noise(seed, StreamPurpose::Noise);
    Dataset ds;
    ds.name = "factors";
    for (std::size_t i = 0; i < n; ++i) {
        Vector z(n_factors);
        for (double& v : z) v = rng.uniform();
        Vector x = matvec(a, z);
        for (double& v : x) v = std::tanh(v) + noise_scale * noise.gaussian();
        ds.inputs.push_back(std::move(x));
        ds.labels.emplace_back(Vector{z[target_factor]});
    }
    ds.feature_range = {-1.0, 1.0};
    return ds;
}

/// Adds N(0, severity^2) noise to every feature, clamped to the dataset's
/// feature range. Labels untouched.
inline Dataset corrupt_gaussian(const Dataset& ds, double severity, std::uint64_t seed) {
    ds.validate();
    if (severity < 0.0) throw input_error("corrupt_gaussian: negative severity");
    if (!ds.feature_range)
        throw input_error("corrupt_gaussian: dataset has no feature_range to clamp to");
    if (severity == 0.0) return ds;

    const auto [lo, hi] = *ds.feature_range;
    RngStream rng(seed, StreamPurpose::Noise);
    Dataset out = ds;
    for (Vector& x : out.inputs)
        for (double& v : x) v = std::clamp(v + severity * rng.gaussian(), lo, hi);
    return out;
}

namespace detail {

inline void append_csv_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

inline double parse_csv_double(const std::string& cell, std::size_t line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw parse_error("csv line " + std::to_string(line) + ": non-numeric cell '" + cell + "'");
    }
    if (pos != cell.size())
        throw parse_error("csv line " + std::to_string(line) + ": non-numeric cell '" + cell + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace detail

/// Header `f0,...,f{d-1},label` for classification or
/// `f0,...,f{d-1},t0,...,t{m-1}` for regression. \n newlines, decimal floats.
inline void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();
    const std::size_t d = ds.dim();
    const bool cls = ds.is_classification();
    const std::size_t m = cls ? 1 : std::get<Vector>(ds.labels.front()).size();

    std::string out;
    for (std::size_t j = 0; j < d; ++j) {
        if (j) out += ',';
        out += "f" + std::to_string(j);
    }
    if (cls) {
        out += ",label";
    } else {
        for (std::size_t j = 0; j < m; ++j) out += ",t" + std::to_string(j);
    }
    out += '\n';

    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out += ',';
            detail::append_csv_double(out, ds.inputs[i][j]);
        }
        if (cls) {
            out += ',' + std::to_string(std::get<std::size_t>(ds.labels[i]));
        } else {
            const Vector& t = std::get<Vector>(ds.labels[i]);
            if (t.size() != m)
                throw input_error("save_csv: ragged regression targets at row " + std::to_string(i));
            for (double v : t) {
                out += ',';
                detail::append_csv_double(out, v);
            }
        }
        out += '\n';
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path.string() + " for writing");
    f << out;
    if (!f) throw io_error("write failed: " + path.string());
}

inline Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path.string());

    std::string line;
    if (!std::getline(f, line)) throw parse_error("csv: empty file " + path.string());
    const auto header = detail::split_csv_line(line);

    std::size_t d = 0;
    while (d < header.size() && header[d] == "f" + std::to_string(d)) ++d;
    if (d == 0) throw parse_error("csv line 1: header must start with f0,f1,...");

    bool cls = false;
    std::size_t m = 0;
    if (d + 1 == header.size() && header[d] == "label") {
        cls = true;
    } else {
        m = header.size() - d;
        if (m == 0) throw parse_error("csv line 1: no label column");
        for (std::size_t j = 0; j < m; ++j)
            if (header[d + j] != "t" + std::to_string(j))
                throw parse_error("csv line 1: unknown label column '" + header[d + j] + "'");
    }

    Dataset ds;
    ds.name = path.stem().string();
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw parse_error("csv line " + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " cells, got " +
                              std::to_string(cells.size()));
        Vector x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = detail::parse_csv_double(cells[j], lineno);
        ds.inputs.push_back(std::move(x));
        if (cls) {
            const double raw = detail::parse_csv_double(cells[d], lineno);
            if (raw < 0.0 || raw != std::floor(raw))
                throw parse_error("csv line " + std::to_string(lineno) +
                                  ": class label must be a non-negative integer");
            ds.labels.emplace_back(static_cast<std::size_t>(raw));
        } else {
            Vector t(m);
            for (std::size_t j = 0; j < m; ++j) t[j] = detail::parse_csv_double(cells[d + j], lineno);
            ds.labels.emplace_back(std::move(t));
        }
    }
    if (ds.inputs.empty()) throw parse_error("csv: no data rows in " + path.string());
    return ds;
}

/// Seeded permutation, then prefix split. Both parts non-empty.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
    ds.validate();
    if (fraction <= 0.0 || fraction >= 1.0) throw input_error("split: fraction must be in (0,1)");
    const std::size_t n = ds.size();
    const std::size_t n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw input_error("split: fraction leaves an empty part for n=" + std::to_string(n));

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    RngStream rng(seed, StreamPurpose::Shuffle);
    for (std::size_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

    Dataset train, test;
    train.name = ds.name + "-train";
    test.name = ds.name + "-test";
    train.feature_range = test.feature_range = ds.feature_range;
    for (std::size_t i = 0; i < n; ++i) {
        Dataset& part = i < n_train ? train : test;
        part.inputs.push_back(ds.inputs[perm[i]]);
        part.labels.push_back(ds.labels[perm[i]]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace rta
