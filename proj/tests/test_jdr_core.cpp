#include "jdr/jdr.hpp"
#include "jdr/metrics.hpp"
#include "jdr/synth.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace jdr;

namespace {

WhitenedSampleSet raw_whitened(const Matrix& A, const Matrix& B, const Vector& y) {
    WhitenedSampleSet w;
    w.A = A;
    w.B = B;
    w.y = y;
    w.state = identity_normalization(A.cols(), B.cols());
    return w;
}

SampleSet bilinear(Index n1, Index n2, Index r, Index m, std::uint64_t seed, GroundTruth* truth = nullptr) {
    SyntheticSpec spec;
    spec.n1 = n1;
    spec.n2 = n2;
    spec.r = r;
    spec.m = m;
    spec.seed = seed;
    const auto t = make_ground_truth(spec);
    if (truth) *truth = t;
    return generate(spec, t);
}

}  // namespace

TEST(Proxy, SingleRankOneTerm) {
    const auto p = build_proxy(raw_whitened((Matrix(1, 2) << 1, 0).finished(), (Matrix(1, 2) << 0, 1).finished(),
                                            Vector::Constant(1, 2.0)));
    EXPECT_EQ(p.X0, (Matrix(2, 2) << 0, 2, 0, 0).finished());
    EXPECT_EQ(p.m_used, 1);
}

TEST(Proxy, ZeroResponsesGiveZero) {
    const auto p = build_proxy(raw_whitened(oracle::random_gaussian(20, 3, 1), oracle::random_gaussian(20, 4, 2),
                                            Vector::Zero(20)));
    EXPECT_EQ(p.X0.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Proxy, MatchesScalarLoopOracleForEveryChunkSize) {
    const Matrix A = oracle::random_gaussian(37, 4, 3), B = oracle::random_gaussian(37, 5, 4);
    const Vector y = oracle::random_gaussian(37, 1, 5).col(0);
    const Matrix expect = oracle::proxy_loops(A, B, y);
    for (Index chunk : {1, 7, 37, 4096})
        EXPECT_LE((build_proxy(raw_whitened(A, B, y), chunk).X0 - expect).norm(), 1e-13 * expect.norm()) << chunk;
}

TEST(Proxy, ConcatenationIsWeightedAverage) {
    const Matrix A = oracle::random_gaussian(50, 3, 6), B = oracle::random_gaussian(50, 3, 7);
    const Vector y = oracle::random_gaussian(50, 1, 8).col(0);
    const auto whole = build_proxy(raw_whitened(A, B, y));
    const auto first = build_proxy(raw_whitened(A.topRows(20), B.topRows(20), y.head(20)));
    const auto second = build_proxy(raw_whitened(A.bottomRows(30), B.bottomRows(30), y.tail(30)));
    const Matrix avg = (20.0 * first.X0 + 30.0 * second.X0) / 50.0;
    EXPECT_LE((whole.X0 - avg).norm(), 1e-12 * whole.X0.norm());
}

TEST(Spectrum, SimpleCases) {
    EXPECT_EQ(spectrum({Matrix::Zero(3, 2), 1}).cwiseAbs().maxCoeff(), 0.0);
    const Vector d = spectrum({(Matrix(2, 2) << 3, 0, 0, 1).finished(), 1});
    EXPECT_NEAR(d(0), 3.0, 1e-14);
    EXPECT_NEAR(d(1), 1.0, 1e-14);
    const Vector u = oracle::random_orthonormal(5, 1, 1), v = oracle::random_orthonormal(4, 1, 2);
    const Vector s = spectrum({2.5 * u * v.transpose(), 1});
    ASSERT_EQ(s.size(), 4);
    EXPECT_NEAR(s(0), 2.5, 1e-12);
    EXPECT_LE(s.tail(3).cwiseAbs().maxCoeff(), 1e-12);
    for (Index i = 1; i < s.size(); ++i) EXPECT_GE(s(i - 1), s(i));
}

TEST(FitJdr, RankOneProxyRecovered) {
    // a' = e_1-ish directions weighted so X0 is exactly rank one: y = 1, b = c * a-projection.
    const Vector u = oracle::random_orthonormal(6, 1, 3), v = oracle::random_orthonormal(5, 1, 4);
    const Vector t = oracle::random_gaussian(40, 1, 5).col(0);
    const SampleSet s{t * u.transpose(), t * v.transpose(), Vector::Ones(40)};
    const auto e = fit_jdr(s, 1, Normalization::None);
    EXPECT_LE(subspace_distance(u, e.whitened_U), 1e-8);
    EXPECT_LE(subspace_distance(v, e.whitened_V), 1e-8);
}

TEST(FitJdr, RankTooLarge) {
    const auto s = bilinear(6, 4, 2, 50, 1);
    try {
        fit_jdr(s, 5, Normalization::Full);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RankTooLarge);
    }
}

TEST(FitJdr, BilinearRecoveryWithoutNormalization) {
    GroundTruth truth;
    const auto s = bilinear(50, 50, 5, 8000, 77, &truth);
    const auto e = fit_jdr(s, 5, Normalization::None);
    EXPECT_LE(nsee(truth.U, e.U, truth.V, e.V), 0.35);
}

TEST(FitJdr, EmbeddingInvariants) {
    const auto s = bilinear(12, 9, 3, 3000, 5);
    for (auto mode : {Normalization::Full, Normalization::FeatureWise, Normalization::None}) {
        const auto fit = fit_jdr_with_state(s, 3, mode);
        const auto& e = fit.embedding;
        EXPECT_LE(gram_deviation(e.whitened_U), 1e-8);
        EXPECT_LE(gram_deviation(e.whitened_V), 1e-8);
        for (Index k = 1; k < e.rank(); ++k) EXPECT_GE(e.sigma(k - 1), e.sigma(k));
        EXPECT_GE(e.sigma.minCoeff(), 0.0);
        // Reconstruction against the best rank-3 truncation of the proxy.
        const auto p = build_proxy(whiten(s, fit.normalization));
        Eigen::JacobiSVD<Matrix> svd(p.X0, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Matrix best = svd.matrixU().leftCols(3) * svd.singularValues().head(3).asDiagonal() *
                            svd.matrixV().leftCols(3).transpose();
        const Matrix rec = e.whitened_U * e.sigma.asDiagonal() * e.whitened_V.transpose();
        EXPECT_LE((rec - best).norm(), 1e-8 * p.X0.norm());
    }
}

TEST(FitJdr, NoneModeEmbeddingsEqualWhitened) {
    const auto s = bilinear(8, 7, 2, 500, 9);
    const auto e = fit_jdr(s, 2, Normalization::None);
    EXPECT_EQ(e.U, e.whitened_U);
    EXPECT_EQ(e.V, e.whitened_V);
}

TEST(FitJdr, ResponseScalingEquivariance) {
    auto s = bilinear(10, 10, 3, 2000, 13);
    const auto base = fit_jdr(s, 3, Normalization::Full);
    s.y *= 3.5;
    const auto scaled = fit_jdr(s, 3, Normalization::Full);
    EXPECT_LE((scaled.sigma - 3.5 * base.sigma).norm(), 1e-10 * base.sigma.norm());
    EXPECT_LE(subspace_distance(base.whitened_U, scaled.whitened_U), 1e-8);
    EXPECT_LE(subspace_distance(base.whitened_V, scaled.whitened_V), 1e-8);
}

TEST(FitJdr, ProxyErrorShrinksLikeInverseRootM) {
    std::vector<double> ms{1000, 2000, 4000, 8000}, err;
    for (double m : ms) {
        double total = 0.0;
        for (int t = 0; t < 20; ++t) {
            GroundTruth truth;
            const auto s = bilinear(8, 8, 2, static_cast<Index>(m), 1000 + t * 7 + static_cast<std::uint64_t>(m), &truth);
            const auto p = build_proxy(whiten(s, identity_normalization(8, 8)));
            total += (p.X0 - truth.U * truth.V.transpose()).norm();
        }
        err.push_back(total / 20);
    }
    const double slope = fit_loglog_slope(ms, err).slope;
    EXPECT_GE(slope, -0.65);
    EXPECT_LE(slope, -0.35);
}

TEST(FastJdr, DeterministicForSeed) {
    const auto s = bilinear(20, 20, 3, 1500, 17);
    const auto a = fit_fast_jdr(s, 3, 99), b = fit_fast_jdr(s, 3, 99);
    EXPECT_EQ(a.U, b.U);
    EXPECT_EQ(a.V, b.V);
    EXPECT_EQ(a.sigma, b.sigma);
    const auto c = fit_fast_jdr(s, 3, 100);
    EXPECT_NE(a.whitened_U, c.whitened_U);
}

TEST(FastJdr, ZeroResponsesGiveZeroSigma) {
    auto s = bilinear(10, 10, 2, 300, 19);
    s.y.setZero();
    const auto e = fit_fast_jdr(s, 2, 1);
    EXPECT_EQ(e.sigma.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FastJdr, SketchWidthLimit) {
    const auto s = bilinear(10, 5, 2, 300, 23);
    EXPECT_NO_THROW(fit_fast_jdr(s, 2, 1));
    try {
        fit_fast_jdr(s, 3, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RankTooLarge);
    }
}

TEST(FastJdr, ExactWhenSketchCoversRange) {
    // With 2r >= n2 the sketch spans the whole row space, so the fast path
    // reproduces the exact SVD on feature-wise normalized data.
    const auto s = bilinear(9, 6, 3, 2000, 29);
    const auto fast = fit_fast_jdr(s, 3, 5);
    const auto exact = fit_jdr(s, 3, Normalization::FeatureWise);
    EXPECT_LE(subspace_distance(exact.whitened_U, fast.whitened_U), 1e-8);
    EXPECT_LE(subspace_distance(exact.whitened_V, fast.whitened_V), 1e-8);
    EXPECT_LE((exact.sigma - fast.sigma).norm(), 1e-10 * exact.sigma.norm());
    EXPECT_LE(gram_deviation(fast.whitened_U), 1e-8);
}
