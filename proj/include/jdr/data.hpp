#pragma once

#include "jdr/error.hpp"
#include "jdr/linalg.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace jdr {

/// Paired feature matrices and responses; row i of A, B and y is sample i.
struct SampleSet {
    Matrix A;  // m x n1
    Matrix B;  // m x n2
    Vector y;  // m

    Index size() const noexcept { return y.size(); }
    Index dim_a() const noexcept { return A.cols(); }
    Index dim_b() const noexcept { return B.cols(); }
};

enum class Normalization { Full, FeatureWise, None };

constexpr const char* to_string(Normalization mode) noexcept {
    switch (mode) {
        case Normalization::Full: return "full";
        case Normalization::FeatureWise: return "featurewise";
        case Normalization::None: return "none";
    }
    return "none";
}

/// Everything needed to whiten new feature vectors and to map whitened
/// embeddings back to the original coordinates.
struct NormalizationState {
    Normalization mode = Normalization::None;
    Vector mu_a;
    Vector mu_b;
    double mu_y = 0.0;
    Matrix chol_a;  // Full: lower-triangular, C_a C_a^T = Sigma_a (+ jitter)
    Matrix chol_b;
    Vector sigma_a;  // FeatureWise: per-coordinate standard deviations
    Vector sigma_b;
    std::vector<Index> constant_a;  // FeatureWise: features whose sigma was replaced by 1
    std::vector<Index> constant_b;
    double jitter_a = 0.0;
    double jitter_b = 0.0;

    double jitter() const noexcept { return std::max(jitter_a, jitter_b); }
    Index dim_a() const noexcept { return mu_a.size(); }
    Index dim_b() const noexcept { return mu_b.size(); }
};

struct WhitenedSampleSet {
    Matrix A;  // A'
    Matrix B;  // B'
    Vector y;  // y'
    NormalizationState state;

    Index size() const noexcept { return y.size(); }
};

namespace detail {

inline void check_finite(const Matrix& M, const char* name) {
    for (Index j = 0; j < M.cols(); ++j)
        for (Index i = 0; i < M.rows(); ++i)
            if (!std::isfinite(M(i, j)))
                fail(ErrorKind::NonFiniteValue, std::string("non-finite value in ") + name +
                                                    " at (row " + std::to_string(i) + ", col " +
                                                    std::to_string(j) + ")");
}

inline Vector column_means(const Matrix& X) {
    return X.colwise().sum().transpose() / static_cast<double>(X.rows());
}

inline Matrix centered(const Matrix& X, const Vector& mu) {
    return X.rowwise() - mu.transpose();
}

/// Cholesky of a covariance with jitter escalation: lambda starts at
/// floor * trace / n and doubles until the factorization succeeds.
inline std::pair<Matrix, double> jittered_cholesky(const Matrix& cov, double jitter_floor,
                                                   const char* name) {
    const Index n = cov.rows();
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

    const double trace = cov.trace();
    if (!(trace > 0.0))
        fail(ErrorKind::DegenerateData, std::string("covariance of ") + name + " has zero trace");
    double lambda = jitter_floor * trace / static_cast<double>(n);
    if (!(lambda > 0.0)) lambda = std::numeric_limits<double>::min();
    while (lambda <= trace) {
        llt.compute(cov + lambda * Matrix::Identity(n, n));
        if (llt.info() == Eigen::Success) return {llt.matrixL(), lambda};
        lambda *= 2.0;
    }
    fail(ErrorKind::DegenerateData,
         std::string("covariance of ") + name + " stays indefinite after jitter escalation");
}

inline Matrix whiten_rows(const Matrix& X, const Vector& mu, const Matrix& chol,
                          const Vector& sigma, Normalization mode) {
    switch (mode) {
        case Normalization::Full: {
            // rows of C^{-1}(x - mu), via one lower-triangular solve
            Matrix centred_t = centered(X, mu).transpose();
            chol.triangularView<Eigen::Lower>().solveInPlace(centred_t);
            return centred_t.transpose();
        }
        case Normalization::FeatureWise:
            return centered(X, mu).array().rowwise() / sigma.transpose().array();
        case Normalization::None:
            return centered(X, mu);
    }
    return X;
}

inline Matrix unwhiten(const Matrix& W, const Matrix& chol, const Vector& sigma,
                       Normalization mode) {
    switch (mode) {
        case Normalization::Full:
            return chol.transpose().triangularView<Eigen::Upper>().solve(W);
        case Normalization::FeatureWise:
            return W.array().colwise() / sigma.array();
        case Normalization::None:
            return W;
    }
    return W;
}

}  // namespace detail

/// Throws DimensionMismatch or NonFiniteValue when the sample set is malformed.
inline void validate(const SampleSet& set) {
    require(set.y.size() >= 1, ErrorKind::DimensionMismatch, "sample set is empty");
    require(set.A.rows() == set.y.size() && set.B.rows() == set.y.size(),
            ErrorKind::DimensionMismatch,
            "row counts differ: A has " + std::to_string(set.A.rows()) + ", B has " +
                std::to_string(set.B.rows()) + ", y has " + std::to_string(set.y.size()));
    detail::check_finite(set.A, "A");
    detail::check_finite(set.B, "B");
    detail::check_finite(set.y, "y");
}

/// Sample means and Cholesky factors of the 1/m sample covariances.
inline NormalizationState fit_normalization_full(const SampleSet& set,
                                                 double jitter_floor = 1e-10) {
    validate(set);
    require(set.size() >= 2, ErrorKind::DegenerateData, "full normalization needs m >= 2");
    const double m = static_cast<double>(set.size());

    NormalizationState state;
    state.mode = Normalization::Full;
    state.mu_a = detail::column_means(set.A);
    state.mu_b = detail::column_means(set.B);
    state.mu_y = set.y.mean();

    const Matrix ca = detail::centered(set.A, state.mu_a);
    const Matrix cb = detail::centered(set.B, state.mu_b);
    Matrix cov_a = (ca.transpose() * ca) / m;
    Matrix cov_b = (cb.transpose() * cb) / m;
    std::tie(state.chol_a, state.jitter_a) = detail::jittered_cholesky(cov_a, jitter_floor, "A");
    std::tie(state.chol_b, state.jitter_b) = detail::jittered_cholesky(cov_b, jitter_floor, "B");
    return state;
}

/// Per-coordinate means and (1/m) standard deviations; sigmas below 1e-12 are
/// replaced by 1 and the feature index recorded.
inline NormalizationState fit_normalization_featurewise(const SampleSet& set) {
    validate(set);
    require(set.size() >= 2, ErrorKind::DegenerateData, "feature-wise normalization needs m >= 2");
    const double m = static_cast<double>(set.size());

    NormalizationState state;
    state.mode = Normalization::FeatureWise;
    state.mu_a = detail::column_means(set.A);
    state.mu_b = detail::column_means(set.B);
    state.mu_y = set.y.mean();

    auto sigmas = [m](const Matrix& X, const Vector& mu, std::vector<Index>& flagged) {
        Vector s = (detail::centered(X, mu).array().square().colwise().sum() / m)
                       .sqrt()
                       .transpose();
        for (Index j = 0; j < s.size(); ++j) {
            if (!(s(j) >= 1e-12)) {
                s(j) = 1.0;
                flagged.push_back(j);
            }
        }
        return s;
    };
    state.sigma_a = sigmas(set.A, state.mu_a, state.constant_a);
    state.sigma_b = sigmas(set.B, state.mu_b, state.constant_b);
    return state;
}

/// Pass-through state: zero means, no scaling.
inline NormalizationState identity_normalization(Index n1, Index n2) {
    NormalizationState state;
    state.mode = Normalization::None;
    state.mu_a = Vector::Zero(n1);
    state.mu_b = Vector::Zero(n2);
    return state;
}

inline NormalizationState fit_normalization(const SampleSet& set, Normalization mode,
                                            double jitter_floor = 1e-10) {
    switch (mode) {
        case Normalization::Full: return fit_normalization_full(set, jitter_floor);
        case Normalization::FeatureWise: return fit_normalization_featurewise(set);
        case Normalization::None: validate(set); return identity_normalization(set.dim_a(), set.dim_b());
    }
    return identity_normalization(set.dim_a(), set.dim_b());
}

/// Whiten raw feature rows of the A side (m x n1) with a fitted state.
inline Matrix whiten_a(const Matrix& A, const NormalizationState& state) {
    require(A.cols() == state.dim_a(), ErrorKind::DimensionMismatch,
            "A has " + std::to_string(A.cols()) + " columns, state expects " +
                std::to_string(state.dim_a()));
    return detail::whiten_rows(A, state.mu_a, state.chol_a, state.sigma_a, state.mode);
}

inline Matrix whiten_b(const Matrix& B, const NormalizationState& state) {
    require(B.cols() == state.dim_b(), ErrorKind::DimensionMismatch,
            "B has " + std::to_string(B.cols()) + " columns, state expects " +
                std::to_string(state.dim_b()));
    return detail::whiten_rows(B, state.mu_b, state.chol_b, state.sigma_b, state.mode);
}

/// a' = C_a^{-1}(a - mu_a), b' likewise, y' = y - mu_y (or the feature-wise /
/// pass-through analogue, depending on the state's mode).
inline WhitenedSampleSet whiten(const SampleSet& set, const NormalizationState& state) {
    require(set.A.rows() == set.y.size() && set.B.rows() == set.y.size(),
            ErrorKind::DimensionMismatch, "row counts differ");
    WhitenedSampleSet out;
    out.A = whiten_a(set.A, state);
    out.B = whiten_b(set.B, state);
    out.y = set.y.array() - state.mu_y;
    out.state = state;
    return out;
}

/// Maps embeddings estimated on whitened data back to raw feature coordinates:
/// U = C_a^{-T} U' (Full) or U = diag(sigma_a)^{-1} U' (FeatureWise).
inline std::pair<Matrix, Matrix> unwhiten_embeddings(const Matrix& U_white, const Matrix& V_white,
                                                     const NormalizationState& state) {
    require(U_white.rows() == state.dim_a() && V_white.rows() == state.dim_b(),
            ErrorKind::DimensionMismatch, "embedding rows do not match normalization state");
    return {detail::unwhiten(U_white, state.chol_a, state.sigma_a, state.mode),
            detail::unwhiten(V_white, state.chol_b, state.sigma_b, state.mode)};
}

}  // namespace jdr
