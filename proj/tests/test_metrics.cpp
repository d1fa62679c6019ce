#include "jdr/metrics.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace jdr;

namespace {

Matrix unit(Index n, Index k) {
    Matrix e = Matrix::Zero(n, 1);
    e(k, 0) = 1.0;
    return e;
}

}  // namespace

TEST(SubspaceDistance, Extremes) {
    const Matrix U = oracle::random_orthonormal(6, 2, 1);
    EXPECT_LE(subspace_distance(U, U), 1e-14);
    EXPECT_DOUBLE_EQ(subspace_distance(unit(2, 0), unit(2, 1)), 1.0);
}

TEST(SubspaceDistance, AngleInPlane) {
    for (double theta : {0.1, 0.7, 1.3, 2.9}) {
        Matrix u(3, 1);
        u << std::cos(theta), std::sin(theta), 0.0;
        EXPECT_NEAR(subspace_distance(unit(3, 0), u), std::abs(std::sin(theta)), 1e-14);
    }
}

TEST(SubspaceDistance, MatchesGramSchmidtOracle) {
    const Matrix U = oracle::random_orthonormal(8, 3, 2);
    const Matrix raw = oracle::random_gaussian(8, 3, 3);
    EXPECT_NEAR(subspace_distance(U, raw), oracle::projection_residual(U, raw), 1e-12);
}

TEST(SubspaceDistance, Symmetric) {
    const Matrix U = oracle::random_orthonormal(7, 3, 4), W = oracle::random_orthonormal(7, 3, 5);
    EXPECT_NEAR(subspace_distance(U, W), subspace_distance(W, U), 1e-8);
}

TEST(SubspaceDistance, RotationInvariant) {
    const Matrix U = oracle::random_orthonormal(7, 3, 6), W = oracle::random_orthonormal(7, 3, 7);
    const Matrix R = oracle::random_orthonormal(3, 3, 8);
    EXPECT_NEAR(subspace_distance(U, W * R), subspace_distance(U, W), 1e-8);
}

TEST(SubspaceDistance, Errors) {
    try {
        subspace_distance(Matrix::Identity(3, 1), Matrix::Identity(4, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    try {
        subspace_distance(2.0 * Matrix::Identity(3, 1), Matrix::Identity(3, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotOrthonormal);
    }
}

TEST(Nsee, Composition) {
    const Matrix U = oracle::random_orthonormal(6, 2, 9), V = oracle::random_orthonormal(5, 2, 10);
    EXPECT_LE(nsee(U, U, V, V), 1e-14);
    // Orthogonal complements on both sides.
    Matrix Ue = Matrix::Identity(4, 2), Uo = Matrix::Zero(4, 2);
    Uo(2, 0) = Uo(3, 1) = 1.0;
    EXPECT_DOUBLE_EQ(nsee(Ue, Uo, Ue, Uo), 1.0);
    // One perfect, the other at distance sqrt(r)/2: rotate both columns by 30 degrees.
    const double c = std::cos(M_PI / 6), s = std::sin(M_PI / 6);
    Matrix half = Matrix::Zero(4, 2);
    half(0, 0) = c;
    half(2, 0) = s;
    half(1, 1) = c;
    half(3, 1) = s;
    EXPECT_NEAR(subspace_distance(Ue, half), std::sqrt(2.0) / 2.0, 1e-14);
    EXPECT_NEAR(nsee(Ue, Ue, Ue, half), 0.5, 1e-14);
}

TEST(Nsee, AlwaysInUnitInterval) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Matrix U = oracle::random_orthonormal(6, 3, seed), V = oracle::random_orthonormal(4, 3, seed + 100);
        const double e = nsee(U, oracle::random_gaussian(6, 3, seed + 200), V, oracle::random_gaussian(4, 3, seed + 300));
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 1.0 + 1e-12);
    }
}

TEST(Slope, PowerLaws) {
    const std::vector<double> xs{1000, 2000, 4000, 8000};
    std::vector<double> inv_root, linear;
    for (double x : xs) {
        inv_root.push_back(3.0 / std::sqrt(x));
        linear.push_back(0.2 * x);
    }
    EXPECT_NEAR(fit_loglog_slope(xs, inv_root).slope, -0.5, 1e-10);
    EXPECT_NEAR(fit_loglog_slope(xs, linear).slope, 1.0, 1e-10);
    const auto fit = fit_loglog_slope(xs, inv_root);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
    EXPECT_EQ(fit.points.size(), 4u);
}

TEST(Slope, ReferenceMSweepSeries) {
    // Reference log-log points of a bilinear m-sweep.
    const std::vector<double> lx{6.91, 7.60, 8.52, 9.21}, ly{-0.215, -0.489, -0.929, -1.271};
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        xs.push_back(std::exp(lx[i]));
        ys.push_back(std::exp(ly[i]));
    }
    const double slope = fit_loglog_slope(xs, ys).slope;
    EXPECT_GE(slope, -0.65);
    EXPECT_LE(slope, -0.35);
}

TEST(Slope, Errors) {
    EXPECT_THROW(fit_loglog_slope({1.0, 2.0}, {1.0, 0.0}), Error);
    try {
        fit_loglog_slope({1.0, -2.0}, {1.0, 1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveValue);
    }
    EXPECT_THROW(fit_loglog_slope({1.0}, {1.0}), Error);
    EXPECT_THROW(fit_loglog_slope({2.0, 1.0}, {1.0, 1.0}), Error);
}

TEST(Recall, Examples) {
    EXPECT_DOUBLE_EQ(recall_at_k({0.1, 0.9, 0.3}, {1}, 1), 1.0);
    EXPECT_DOUBLE_EQ(recall_at_k({0.1, 0.9, 0.3}, {0}, 2), 0.0);
    EXPECT_DOUBLE_EQ(recall_at_k({0.9, 0.8, 0.1}, {0, 2}, 2), 0.5);
    // Ties go to the smaller index.
    EXPECT_DOUBLE_EQ(recall_at_k({0.5, 0.5, 0.5}, {0}, 1), 1.0);
    EXPECT_DOUBLE_EQ(recall_at_k({0.5, 0.5, 0.5}, {2}, 1), 0.0);
    try {
        recall_at_k({1.0}, {}, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyPositives);
    }
}

TEST(Recall, MonotoneInK) {
    const Matrix s = oracle::random_gaussian(40, 1, 11);
    const std::vector<double> scores(s.data(), s.data() + 40);
    const std::vector<Index> pos{1, 5, 7, 20, 33};
    double prev = 0.0;
    for (Index k = 1; k <= 40; ++k) {
        const double r = recall_at_k(scores, pos, k);
        EXPECT_GE(r, prev);
        prev = r;
    }
    EXPECT_DOUBLE_EQ(prev, 1.0);
}
