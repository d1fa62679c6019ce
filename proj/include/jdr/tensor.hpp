#pragma once

#include "jdr/error.hpp"
#include "jdr/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jdr {

enum class ModeRole { FeatureA, FeatureB, FeatureC, Response };

constexpr const char* to_string(ModeRole role) noexcept {
    switch (role) {
        case ModeRole::FeatureA: return "feature_a";
        case ModeRole::FeatureB: return "feature_b";
        case ModeRole::FeatureC: return "feature_c";
        case ModeRole::Response: return "response";
    }
    return "feature_a";
}

/// Dense third-order tensor, row-major: entry (i, j, k) lives at
/// (i * dims[1] + j) * dims[2] + k.
struct ProxyTensor3 {
    std::array<Index, 3> dims{1, 1, 1};
    std::array<ModeRole, 3> roles{ModeRole::FeatureA, ModeRole::FeatureB, ModeRole::FeatureC};
    std::vector<double> data;

    ProxyTensor3() : data(1, 0.0) {}
    explicit ProxyTensor3(std::array<Index, 3> d, std::array<ModeRole, 3> r = {ModeRole::FeatureA, ModeRole::FeatureB, ModeRole::FeatureC})
        : dims(d), roles(r) {
        require(d[0] >= 1 && d[1] >= 1 && d[2] >= 1, ErrorKind::InvalidArgument, "tensor dims must be >= 1");
        data.assign(static_cast<std::size_t>(d[0] * d[1] * d[2]), 0.0);
    }

    Index size() const noexcept { return dims[0] * dims[1] * dims[2]; }

    std::size_t offset(Index i, Index j, Index k) const noexcept {
        return static_cast<std::size_t>((i * dims[1] + j) * dims[2] + k);
    }
    double& operator()(Index i, Index j, Index k) { return data[offset(i, j, k)]; }
    double operator()(Index i, Index j, Index k) const { return data[offset(i, j, k)]; }
};

struct TensorOptions {
    std::int64_t max_entries = 100'000'000;
    Index chunk_rows = 1024;
};

namespace detail {

inline void check_tensor_budget(std::array<Index, 3> dims, const TensorOptions& opts) {
    const double entries = static_cast<double>(dims[0]) * static_cast<double>(dims[1]) *
                           static_cast<double>(dims[2]);
    require(entries <= static_cast<double>(opts.max_entries), ErrorKind::MemoryBudget,
            "tensor with " + std::to_string(static_cast<long long>(entries)) +
                " entries exceeds the budget of " + std::to_string(opts.max_entries));
}

/// Row-wise Kronecker product of X (rows x p) and Y (rows x q): row i is
/// x_i (x) y_i with the Y index varying fastest.
inline Matrix row_kron(const Matrix& X, const Matrix& Y) {
    Matrix out(X.rows(), X.cols() * Y.cols());
    for (Index a = 0; a < X.cols(); ++a)
        out.middleCols(a * Y.cols(), Y.cols()) = Y.array().colwise() * X.col(a).array();
    return out;
}

/// Accumulates (1/m) W^T (X khatri-rao Y) into a row-major tensor whose mode 0 is W's columns.
inline void accumulate_khatri_rao(const Matrix& W, const Matrix& X, const Matrix& Y, Index chunk_rows,
                                  ProxyTensor3& T) {
    const Index m = W.rows();
    const Index step = std::max<Index>(1, chunk_rows);
    Matrix unfolded = Matrix::Zero(W.cols(), X.cols() * Y.cols());
    for (Index start = 0; start < m; start += step) {
        const Index len = std::min(step, m - start);
        unfolded.noalias() += W.middleRows(start, len).transpose() *
                              row_kron(X.middleRows(start, len), Y.middleRows(start, len));
    }
    unfolded /= static_cast<double>(m);
    for (Index i = 0; i < unfolded.rows(); ++i)
        for (Index c = 0; c < unfolded.cols(); ++c)
            T.data[static_cast<std::size_t>(i * unfolded.cols() + c)] = unfolded(i, c);
}

}  // namespace detail

/// T = (1/m) sum_i y_i a_i (x) b_i (x) c_i.
inline ProxyTensor3 build_proxy3(const Matrix& A, const Matrix& B, const Matrix& C, const Vector& y,
                                 const TensorOptions& opts = {}) {
    const Index m = y.size();
    require(m >= 1 && A.rows() == m && B.rows() == m && C.rows() == m, ErrorKind::DimensionMismatch,
            "A, B, C and y must share the sample count");
    const std::array<Index, 3> dims{A.cols(), B.cols(), C.cols()};
    detail::check_tensor_budget(dims, opts);
    ProxyTensor3 T(dims);
    const Matrix weighted = A.array().colwise() * y.array();
    detail::accumulate_khatri_rao(weighted, B, C, opts.chunk_rows, T);
    return T;
}

/// T = (1/m) sum_i Y_i (x) a_i (x) b_i for vector responses Y (m x d); mode 0 is the response.
inline ProxyTensor3 build_proxy_multiresponse(const Matrix& A, const Matrix& B, const Matrix& Y,
                                              const TensorOptions& opts = {}) {
    const Index m = Y.rows();
    require(m >= 1 && A.rows() == m && B.rows() == m, ErrorKind::DimensionMismatch,
            "A, B and Y must share the sample count");
    const std::array<Index, 3> dims{Y.cols(), A.cols(), B.cols()};
    detail::check_tensor_budget(dims, opts);
    ProxyTensor3 T(dims, {ModeRole::Response, ModeRole::FeatureA, ModeRole::FeatureB});
    detail::accumulate_khatri_rao(Y, A, B, opts.chunk_rows, T);
    return T;
}

/// Mode-k unfolding: n_k x (product of the other dims); the remaining modes
/// keep increasing order with the last one varying fastest.
inline Matrix unfold(const ProxyTensor3& T, int mode) {
    require(mode >= 0 && mode < 3, ErrorKind::InvalidArgument, "mode must be 0, 1 or 2");
    const auto [d0, d1, d2] = T.dims;
    Matrix out(T.dims[static_cast<std::size_t>(mode)], T.size() / T.dims[static_cast<std::size_t>(mode)]);
    for (Index i = 0; i < d0; ++i)
        for (Index j = 0; j < d1; ++j)
            for (Index k = 0; k < d2; ++k) {
                const double v = T(i, j, k);
                switch (mode) {
                    case 0: out(i, j * d2 + k) = v; break;
                    case 1: out(j, i * d2 + k) = v; break;
                    default: out(k, i * d1 + j) = v; break;
                }
            }
    return out;
}

/// Inverse of unfold.
inline ProxyTensor3 fold(const Matrix& M, int mode, std::array<Index, 3> dims,
                         std::array<ModeRole, 3> roles = {ModeRole::FeatureA, ModeRole::FeatureB, ModeRole::FeatureC}) {
    require(mode >= 0 && mode < 3, ErrorKind::InvalidArgument, "mode must be 0, 1 or 2");
    ProxyTensor3 T(dims, roles);
    require(M.rows() == dims[static_cast<std::size_t>(mode)] && M.size() == T.size(),
            ErrorKind::DimensionMismatch, "unfolding shape does not match dims");
    const auto [d0, d1, d2] = dims;
    for (Index i = 0; i < d0; ++i)
        for (Index j = 0; j < d1; ++j)
            for (Index k = 0; k < d2; ++k) {
                switch (mode) {
                    case 0: T(i, j, k) = M(i, j * d2 + k); break;
                    case 1: T(i, j, k) = M(j, i * d2 + k); break;
                    default: T(i, j, k) = M(k, i * d1 + j); break;
                }
            }
    return T;
}

/// Truncated HOSVD: the leading left singular vectors of each requested
/// mode unfolding. Modes with no rank are skipped.
inline std::array<std::optional<Matrix>, 3> hosvd_factors(const ProxyTensor3& T,
                                                          const std::array<std::optional<Index>, 3>& ranks) {
    for (double v : T.data) require(std::isfinite(v), ErrorKind::NonFiniteValue, "tensor has a non-finite entry");
    std::array<std::optional<Matrix>, 3> out;
    for (int mode = 0; mode < 3; ++mode) {
        const auto& rank = ranks[static_cast<std::size_t>(mode)];
        if (!rank) continue;
        const Index n = T.dims[static_cast<std::size_t>(mode)];
        require(*rank >= 1 && *rank <= n, ErrorKind::RankTooLarge,
                "mode " + std::to_string(mode) + " rank " + std::to_string(*rank) + " outside [1, " +
                    std::to_string(n) + "]");
        const Matrix M = unfold(T, mode);
        // Full U when the unfolding has fewer columns than rows, so any rank up to n works.
        const unsigned int opts = M.cols() < n ? Eigen::ComputeFullU : Eigen::ComputeThinU;
        Eigen::BDCSVD<Matrix> svd(M, opts);
        Matrix factor = svd.matrixU().leftCols(*rank);
        fix_signs(factor);
        out[static_cast<std::size_t>(mode)] = std::move(factor);
    }
    return out;
}

}  // namespace jdr
