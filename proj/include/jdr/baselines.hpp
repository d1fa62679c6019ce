#pragma once

#include "jdr/data.hpp"
#include "jdr/error.hpp"
#include "jdr/linalg.hpp"

#include <string>

namespace jdr {

/// Top-r principal directions of X (m x n) under the 1/m covariance.
inline Matrix fit_pca(const Matrix& X, Index r, Vector* eigenvalues = nullptr) {
    require(X.rows() >= 2, ErrorKind::DegenerateData, "PCA needs m >= 2");
    require(r >= 1 && r <= X.cols(), ErrorKind::RankTooLarge,
            "PCA rank " + std::to_string(r) + " outside [1, " + std::to_string(X.cols()) + "]");
    const Vector mu = X.colwise().mean().transpose();
    const Matrix c = X.rowwise() - mu.transpose();
    const Matrix cov = (c.transpose() * c) / static_cast<double>(X.rows());
    return top_eigenvectors(cov, r, /*by_magnitude=*/false, eigenvalues);
}

/// Principal Hessian directions, y-centred residual form:
/// M = (1/m) sum_i (y_i - ybar) x_i x_i^T; returns the eigenvectors of the r
/// largest |eigenvalue|. X is expected to be whitened already.
inline Matrix fit_phd(const Matrix& X, const Vector& y, Index r) {
    require(X.rows() == y.size(), ErrorKind::DimensionMismatch, "X and y row counts differ");
    require(X.rows() >= 2, ErrorKind::DegenerateData, "pHd needs m >= 2");
    require(r >= 1 && r <= X.cols(), ErrorKind::RankTooLarge,
            "pHd rank " + std::to_string(r) + " outside [1, " + std::to_string(X.cols()) + "]");
    const Vector resid = y.array() - y.mean();
    const Matrix weighted = X.array().colwise() * resid.array();
    Matrix M = (X.transpose() * weighted) / static_cast<double>(X.rows());
    M = 0.5 * (M + M.transpose());
    return top_eigenvectors(M, r, /*by_magnitude=*/true);
}

/// pHd on the concatenated features [a; b] with 2r directions; the result is
/// (n1 + n2) x 2r.
inline Matrix fit_cphd(const SampleSet& set, Index r) {
    validate(set);
    require(r >= 1 && 2 * r <= set.dim_a() + set.dim_b(), ErrorKind::RankTooLarge,
            "cpHd needs 2r <= n1 + n2");
    Matrix joint(set.size(), set.dim_a() + set.dim_b());
    joint << set.A, set.B;
    return fit_phd(joint, set.y, 2 * r);
}

}  // namespace jdr
