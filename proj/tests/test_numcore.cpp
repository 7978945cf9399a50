#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rta/finite_diff.hpp"
#include "rta/matrix.hpp"
#include "rta/rng.hpp"
#include "rta/spectral.hpp"
#include "test_support.hpp"

using namespace rta;

TEST(Matrix, ConstructAndIndex) {
    DenseMatrix m(2, 3, 1.5);
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 2), 1.5);
    m(0, 1) = -2.0;
    EXPECT_EQ(m.values()[1], -2.0);
    EXPECT_THROW(DenseMatrix(2, 2, Vector{1.0, 2.0, 3.0}), input_error);
    EXPECT_THROW(DenseMatrix::from_rows({{1.0, 2.0}, {3.0}}), input_error);
}

TEST(Matrix, IdentityAndRows) {
    const DenseMatrix id = DenseMatrix::identity(3);
    EXPECT_EQ(id(0, 0), 1.0);
    EXPECT_EQ(id(0, 1), 0.0);
    const DenseMatrix m = DenseMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    const auto r1 = m.row(1);
    ASSERT_EQ(r1.size(), 2u);
    EXPECT_EQ(r1[0], 3.0);
    EXPECT_EQ(r1[1], 4.0);
    EXPECT_TRUE(m == DenseMatrix(2, 2, Vector{1.0, 2.0, 3.0, 4.0}));
}

TEST(Matrix, MatvecExamples) {
    const DenseMatrix m = DenseMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    const Vector y = matvec(m, Vector{1.0, 1.0});
    ASSERT_EQ(y.size(), 2u);
    EXPECT_DOUBLE_EQ(y[0], 3.0);
    EXPECT_DOUBLE_EQ(y[1], 7.0);
    EXPECT_THROW(matvec(m, Vector{1.0, 2.0, 3.0}), input_error);
}

TEST(Matrix, MatvecTransposeAdjoint) {
    RngStream rng(7, StreamPurpose::Data);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseMatrix w = support::random_matrix(rng, 4, 6);
        const Vector x = support::random_vector(rng, 6);
        const Vector y = support::random_vector(rng, 4);
        // <Wx, y> == <x, W^T y>
        EXPECT_NEAR(dot(matvec(w, x), y), dot(x, matvec_transpose(w, y)), 1e-12);
    }
}

TEST(Matrix, Norms) {
    const Vector v{3.0, -4.0};
    EXPECT_DOUBLE_EQ(l2_norm(v), 5.0);
    EXPECT_DOUBLE_EQ(l1_norm(v), 7.0);
    EXPECT_DOUBLE_EQ(linf_norm(v), 4.0);
    EXPECT_DOUBLE_EQ(l2_norm(Vector{}), 0.0);
}

TEST(Matrix, VectorOps) {
    Vector a{1.0, 2.0};
    const Vector b{0.5, -1.0};
    const Vector s = sub(a, b);
    EXPECT_DOUBLE_EQ(s[0], 0.5);
    EXPECT_DOUBLE_EQ(s[1], 3.0);
    const Vector p = add(a, b);
    EXPECT_DOUBLE_EQ(p[0], 1.5);
    EXPECT_DOUBLE_EQ(p[1], 1.0);
    scale_inplace(a, 2.0);
    EXPECT_DOUBLE_EQ(a[1], 4.0);
    EXPECT_THROW(sub(a, Vector{1.0}), input_error);
}

TEST(Matrix, PairwiseSumAndMean) {
    Vector v(1000);
    double naive = 0.0;
    RngStream rng(3, StreamPurpose::Data);
    for (double& x : v) {
        x = rng.uniform(-1.0, 1.0);
        naive += x;
    }
    EXPECT_NEAR(pairwise_sum(v), naive, 1e-10);
    EXPECT_NEAR(mean(v), naive / 1000.0, 1e-12);
    EXPECT_DOUBLE_EQ(pairwise_sum(Vector{1.0, 2.0, 3.0, 4.0}), 10.0);
    EXPECT_THROW(mean(Vector{}), input_error);
}

TEST(Matrix, AllFinite) {
    EXPECT_TRUE(all_finite(Vector{0.0, -1.0, 1e300}));
    EXPECT_FALSE(all_finite(Vector{0.0, std::numeric_limits<double>::quiet_NaN()}));
    EXPECT_FALSE(all_finite(Vector{std::numeric_limits<double>::infinity()}));
    EXPECT_TRUE(all_finite(Vector{}));
}

TEST(Spectral, KnownMatrices) {
    EXPECT_NEAR(spectral_norm(DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})), 2.0, 1e-9);
    EXPECT_NEAR(spectral_norm(DenseMatrix::from_rows({{3.0, 0.0}, {0.0, 4.0}})), 4.0, 1e-9);
    EXPECT_NEAR(spectral_norm(DenseMatrix::identity(5)), 1.0, 1e-9);
    EXPECT_NEAR(spectral_norm(DenseMatrix(3, 3, 0.0)), 0.0, 1e-12);
    // Single column: sigma is the column norm.
    EXPECT_DOUBLE_EQ(spectral_norm(DenseMatrix(2, 1, Vector{3.0, 4.0})), 5.0);
}

TEST(Spectral, RankOneOuterProduct) {
    const Vector u{1.0, -2.0, 2.0};
    const Vector v{2.0, 1.0};
    DenseMatrix w(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) w(i, j) = u[i] * v[j];
    EXPECT_NEAR(spectral_norm(w), l2_norm(u) * l2_norm(v), 1e-9);
}

TEST(Spectral, Scaling) {
    RngStream rng(21, StreamPurpose::Data);
    const DenseMatrix w = support::random_matrix(rng, 5, 4);
    const double s = spectral_norm(w);
    DenseMatrix w3 = w;
    scale_inplace(w3.values(), -3.0);
    EXPECT_NEAR(spectral_norm(w3), 3.0 * s, 1e-8 * std::max(1.0, 3.0 * s));
}

TEST(Spectral, AgreesWithJacobiOracle) {
    RngStream rng(42, StreamPurpose::Data);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t rows = 1 + rng.uniform_index(8);
        const std::size_t cols = 1 + rng.uniform_index(8);
        const DenseMatrix w = support::random_matrix(rng, rows, cols, -5.0, 5.0);
        const double got = spectral_norm(w);
        const double want = support::oracle_spectral_norm(w);
        EXPECT_NEAR(got, want, 1e-8 * std::max(1.0, want)) << "trial " << trial;
    }
}

TEST(Spectral, OperatorNormBound) {
    RngStream rng(43, StreamPurpose::Data);
    for (int trial = 0; trial < 100; ++trial) {
        const DenseMatrix w = support::random_matrix(rng, 6, 5, -2.0, 2.0);
        const double s = spectral_norm(w);
        const Vector g = support::random_vector(rng, 5, -3.0, 3.0);
        EXPECT_LE(l2_norm(matvec(w, g)), s * l2_norm(g) + 1e-9);
    }
}

TEST(Spectral, InputValidation) {
    EXPECT_THROW(spectral_norm(DenseMatrix()), input_error);
    EXPECT_THROW(spectral_norm(DenseMatrix::identity(2), 0.0), input_error);
    DenseMatrix bad(2, 2, 1.0);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(spectral_norm(bad), input_error);
}

TEST(Spectral, NonConvergenceCarriesEstimate) {
    const DenseMatrix w = DenseMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}});
    try {
        spectral_norm(w, 1e-10, 1);
        FAIL() << "expected spectral_error";
    } catch (const spectral_error& e) {
        EXPECT_TRUE(std::isfinite(e.last_estimate));
        EXPECT_GE(e.residual, 0.0);
    }
}

TEST(FiniteDiff, QuadraticGradient) {
    const auto fn = [](const Vector& x) { return x[0] * x[0] + 3.0 * x[1]; };
    const Vector g = finite_diff_grad(fn, Vector{2.0, -1.0}, 1e-5);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_NEAR(g[0], 4.0, 1e-8);
    EXPECT_NEAR(g[1], 3.0, 1e-8);
}

TEST(FiniteDiff, Validation) {
    const auto fn = [](const Vector& x) { return x[0]; };
    EXPECT_THROW(finite_diff_grad(fn, Vector{1.0}, 0.0), input_error);
    EXPECT_THROW(finite_diff_grad(fn, Vector{1.0}, -1e-5), input_error);
    const auto bad = [](const Vector& x) {
        return x[1] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
    };
    try {
        finite_diff_grad(bad, Vector{0.0, 0.5}, 1e-3);
        FAIL() << "expected numeric_error";
    } catch (const numeric_error& e) {
        EXPECT_NE(std::string(e.what()).find("coordinate 1"), std::string::npos);
    }
}

TEST(Rng, DeterministicStreams) {
    RngStream a(9, StreamPurpose::Attack, 4);
    RngStream b(9, StreamPurpose::Attack, 4);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    RngStream c(9, StreamPurpose::Attack, 5);
    bool differs = false;
    RngStream a2(9, StreamPurpose::Attack, 4);
    for (int i = 0; i < 10; ++i) differs |= (a2.next_u64() != c.next_u64());
    EXPECT_TRUE(differs);
}

TEST(Rng, PurposeSeparation) {
    RngStream shuffle(9, StreamPurpose::Shuffle, 0);
    RngStream noise(9, StreamPurpose::Noise, 0);
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs |= (shuffle.next_u64() != noise.next_u64());
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformRanges) {
    RngStream rng(1, StreamPurpose::Data);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        const double v = rng.uniform(-2.0, 3.0);
        EXPECT_GE(v, -2.0);
        EXPECT_LT(v, 3.0);
        const std::size_t k = rng.uniform_index(7);
        EXPECT_LT(k, 7u);
    }
}

TEST(Rng, GaussianMoments) {
    RngStream rng(2, StreamPurpose::Noise);
    const int n = 20000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        s += g;
        s2 += g * g;
    }
    EXPECT_NEAR(s / n, 0.0, 0.03);
    EXPECT_NEAR(s2 / n, 1.0, 0.05);
}
