#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace jdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds from one user seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
    return out;
}

/// Flip each singular pair so the largest-magnitude entry of the left vector is
/// positive (first such entry on ties).
inline void fix_signs(Matrix& left, Matrix& right) {
    for (Index k = 0; k < left.cols(); ++k) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < left.rows(); ++i) {
            const double v = std::abs(left(i, k));
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        if (left.rows() > 0 && left(arg, k) < 0.0) {
            left.col(k) *= -1.0;
            if (k < right.cols()) right.col(k) *= -1.0;
        }
    }
}

inline void fix_signs(Matrix& left) {
    Matrix none(0, 0);
    fix_signs(left, none);
}

struct TruncatedSvd {
    Matrix U;
    Vector sigma;
    Matrix V;
};

/// Leading `r` singular triplets of X, sign-fixed. Requires r <= min(rows, cols).
inline TruncatedSvd truncated_svd(const Matrix& X, Index r) {
    Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TruncatedSvd out{svd.matrixU().leftCols(r), svd.singularValues().head(r),
                     svd.matrixV().leftCols(r)};
    fix_signs(out.U, out.V);
    return out;
}

inline Vector singular_values(const Matrix& X) {
    if (X.size() == 0) return Vector();
    Eigen::BDCSVD<Matrix> svd(X);
    return svd.singularValues();
}

/// Thin Q factor of a Householder QR.
inline Matrix thin_q(const Matrix& X) {
    const Index k = std::min(X.rows(), X.cols());
    Eigen::HouseholderQR<Matrix> qr(X);
    return qr.householderQ() * Matrix::Identity(X.rows(), k);
}

inline double gram_deviation(const Matrix& X) {
    return (X.transpose() * X - Matrix::Identity(X.cols(), X.cols())).norm();
}

inline bool has_orthonormal_columns(const Matrix& X, double tol) {
    return gram_deviation(X) <= tol;
}

/// Indices of the `k` largest keys, ties toward the smaller index, returned
/// sorted ascending.
inline std::vector<Index> top_k_indices(const std::vector<double>& keys, Index k) {
    std::vector<Index> order(keys.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return keys[a] > keys[b]; });
    order.resize(static_cast<std::size_t>(std::min<Index>(k, static_cast<Index>(keys.size()))));
    std::sort(order.begin(), order.end());
    return order;
}

/// Eigenvectors of a symmetric matrix for the `r` eigenvalues ranked by value
/// (or by magnitude), sign-fixed.
inline Matrix top_eigenvectors(const Matrix& symmetric, Index r, bool by_magnitude,
                               Vector* eigenvalues_out = nullptr) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
    const Vector& values = eig.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    // Eigen returns ascending values; walk from the top so ties favour the later
    // (larger) eigenvalue slot deterministically.
    std::reverse(order.begin(), order.end());
    if (by_magnitude) {
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return std::abs(values(a)) > std::abs(values(b));
        });
    }
    Matrix out(symmetric.rows(), r);
    Vector picked(r);
    for (Index k = 0; k < r; ++k) {
        out.col(k) = eig.eigenvectors().col(order[static_cast<std::size_t>(k)]);
        picked(k) = values(order[static_cast<std::size_t>(k)]);
    }
    fix_signs(out);
    if (eigenvalues_out) *eigenvalues_out = picked;
    return out;
}

}  // namespace jdr
