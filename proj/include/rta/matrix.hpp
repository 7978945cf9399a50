#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "rta/errors.hpp"

namespace rta {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    DenseMatrix(std::size_t rows, std::size_t cols, Vector values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_)
            throw input_error("DenseMatrix: value count " + std::to_string(values_.size()) +
                              " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        DenseMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != m.cols_) throw input_error("DenseMatrix::from_rows: ragged rows");
            std::size_t j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return values_.empty(); }

    Vector& values() { return values_; }
    const Vector& values() const { return values_; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    bool operator==(const DenseMatrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector values_;
};

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Sum with pairwise splitting; keeps floating drift negligible at the
/// dataset sizes used here and is independent of any evaluation order.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw input_error("mean: empty sequence");
    return pairwise_sum(xs) / static_cast<double>(xs.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw input_error("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double l1_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return s;
}

inline double linf_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
}

/// result_i = sum_j W_ij g_j
inline Vector matvec(const DenseMatrix& w, const Vector& g) {
    if (w.cols() != g.size())
        throw input_error("matvec: matrix is " + std::to_string(w.rows()) + "x" +
                          std::to_string(w.cols()) + " but vector has dim " +
                          std::to_string(g.size()));
    Vector out(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) out[i] = dot(w.row(i), g);
    return out;
}

/// result_j = sum_i W_ij y_i  (i.e. W^T y)
inline Vector matvec_transpose(const DenseMatrix& w, const Vector& y) {
    if (w.rows() != y.size())
        throw input_error("matvec_transpose: matrix has " + std::to_string(w.rows()) +
                          " rows but vector has dim " + std::to_string(y.size()));
    Vector out(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const auto row = w.row(i);
        for (std::size_t j = 0; j < w.cols(); ++j) out[j] += row[j] * y[i];
    }
    return out;
}

inline Vector sub(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw input_error("sub: dimension mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector add(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw input_error("add: dimension mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline void scale_inplace(Vector& a, double c) {
    for (double& v : a) v *= c;
}

}  // namespace rta
