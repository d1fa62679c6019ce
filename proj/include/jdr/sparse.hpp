#pragma once

#include "jdr/data.hpp"
#include "jdr/error.hpp"
#include "jdr/jdr.hpp"
#include "jdr/linalg.hpp"

#include <string>
#include <utility>
#include <vector>

namespace jdr {

/// Rank and row-support budgets for the sparse estimator. U may use at most
/// s1 rows, V at most s2 rows.
struct SparsityBudget {
    Index r = 1;
    Index s1 = 1;
    Index s2 = 1;

    void check(Index n1, Index n2) const {
        require(r >= 1 && r < std::min(n1, n2), ErrorKind::RankTooLarge,
                "sparse rank must satisfy 1 <= r < min(n1, n2), got r = " + std::to_string(r));
        require(s1 >= r && s1 <= n1, ErrorKind::BudgetOutOfRange,
                "s1 = " + std::to_string(s1) + " outside [r, n1]");
        require(s2 >= r && s2 <= n2, ErrorKind::BudgetOutOfRange,
                "s2 = " + std::to_string(s2) + " outside [r, n2]");
    }
};

struct SparseEmbeddingPair {
    EmbeddingPair base;
    std::vector<Index> row_support_U;
    std::vector<Index> row_support_V;
};

/// Columns kept by the column-norm projection: the s largest Euclidean norms,
/// ties toward the smaller index; ascending order.
inline std::vector<Index> top_column_support(const Matrix& X, Index s) {
    std::vector<double> norms(static_cast<std::size_t>(X.cols()));
    for (Index k = 0; k < X.cols(); ++k) norms[static_cast<std::size_t>(k)] = X.col(k).squaredNorm();
    return top_k_indices(norms, s);
}

inline std::vector<Index> top_row_support(const Matrix& X, Index s) {
    std::vector<double> norms(static_cast<std::size_t>(X.rows()));
    for (Index j = 0; j < X.rows(); ++j) norms[static_cast<std::size_t>(j)] = X.row(j).squaredNorm();
    return top_k_indices(norms, s);
}

/// Keep the s1 largest-magnitude entries of every column.
inline Matrix project_omega1(const Matrix& X, Index s1) {
    require(s1 >= 1 && s1 <= X.rows(), ErrorKind::BudgetOutOfRange,
            "s1 = " + std::to_string(s1) + " outside [1, " + std::to_string(X.rows()) + "]");
    Matrix out = Matrix::Zero(X.rows(), X.cols());
    std::vector<double> mags(static_cast<std::size_t>(X.rows()));
    for (Index k = 0; k < X.cols(); ++k) {
        for (Index j = 0; j < X.rows(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(X(j, k));
        for (Index j : top_k_indices(mags, s1)) out(j, k) = X(j, k);
    }
    return out;
}

/// Keep the s2 columns with the largest Euclidean norm.
inline Matrix project_omega2(const Matrix& X, Index s2) {
    require(s2 >= 1 && s2 <= X.cols(), ErrorKind::BudgetOutOfRange,
            "s2 = " + std::to_string(s2) + " outside [1, " + std::to_string(X.cols()) + "]");
    Matrix out = Matrix::Zero(X.rows(), X.cols());
    for (Index k : top_column_support(X, s2)) out.col(k) = X.col(k);
    return out;
}

/// Keep the s1 rows with the largest Euclidean norm.
inline Matrix project_omega3(const Matrix& X, Index s1) {
    require(s1 >= 1 && s1 <= X.rows(), ErrorKind::BudgetOutOfRange,
            "s1 = " + std::to_string(s1) + " outside [1, " + std::to_string(X.rows()) + "]");
    Matrix out = Matrix::Zero(X.rows(), X.cols());
    for (Index j : top_row_support(X, s1)) out.row(j) = X.row(j);
    return out;
}

/// Sparse embedding estimation: sequential projections of the proxy onto the
/// per-column, column-count and row-count sparsity sets, then a rank-r SVD.
/// Consumes raw samples unless `mode` asks for normalization first.
inline SparseEmbeddingPair fit_sparse_jdr(const SampleSet& set, const SparsityBudget& budget,
                                          Normalization mode = Normalization::None,
                                          const JdrOptions& opts = {}) {
    validate(set);
    budget.check(set.dim_a(), set.dim_b());

    const NormalizationState state = fit_normalization(set, mode, opts.jitter_floor);
    const ProxyMatrix proxy = build_proxy(whiten(set, state), opts.chunk_rows);

    const Matrix x1 = project_omega1(proxy.X0, budget.s1);
    const std::vector<Index> cols = top_column_support(x1, budget.s2);
    Matrix x2 = Matrix::Zero(x1.rows(), x1.cols());
    for (Index k : cols) x2.col(k) = x1.col(k);
    const std::vector<Index> rows = top_row_support(x2, budget.s1);

    // X3 vanishes outside rows x cols, so its SVD is that of the submatrix
    // embedded back; this keeps off-support rows of U and V exactly zero even
    // for singular directions with zero singular value.
    Matrix sub(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b)
            sub(static_cast<Index>(a), static_cast<Index>(b)) = x2(rows[a], cols[b]);
    const TruncatedSvd svd = truncated_svd(sub, budget.r);

    SparseEmbeddingPair out;
    EmbeddingPair& e = out.base;
    e.whitened_U = Matrix::Zero(set.dim_a(), budget.r);
    e.whitened_V = Matrix::Zero(set.dim_b(), budget.r);
    for (std::size_t a = 0; a < rows.size(); ++a) e.whitened_U.row(rows[a]) = svd.U.row(static_cast<Index>(a));
    for (std::size_t b = 0; b < cols.size(); ++b) e.whitened_V.row(cols[b]) = svd.V.row(static_cast<Index>(b));
    fix_signs(e.whitened_U, e.whitened_V);
    e.sigma = svd.sigma;
    std::tie(e.U, e.V) = unwhiten_embeddings(e.whitened_U, e.whitened_V, state);
    out.row_support_U = rows;
    out.row_support_V = cols;
    return out;
}

struct RankSparsityEstimate {
    Index r_hat = 0;
    Index s1_hat = 0;
    Index s2_hat = 0;
    std::vector<std::pair<Index, Index>> support;  // (row, col), column-major order
};

/// Counts singular values and entries of the proxy above eta / 2.
inline RankSparsityEstimate estimate_rank_sparsity(const ProxyMatrix& p, double eta) {
    require(eta > 0.0, ErrorKind::InvalidArgument, "eta must be positive");
    const double threshold = eta / 2.0;
    RankSparsityEstimate est;
    const Vector sv = spectrum(p);
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > threshold) ++est.r_hat;

    std::vector<bool> row_hit(static_cast<std::size_t>(p.X0.rows()), false);
    std::vector<bool> col_hit(static_cast<std::size_t>(p.X0.cols()), false);
    for (Index k = 0; k < p.X0.cols(); ++k) {
        for (Index j = 0; j < p.X0.rows(); ++j) {
            if (std::abs(p.X0(j, k)) > threshold) {
                est.support.emplace_back(j, k);
                row_hit[static_cast<std::size_t>(j)] = true;
                col_hit[static_cast<std::size_t>(k)] = true;
            }
        }
    }
    est.s1_hat = static_cast<Index>(std::count(row_hit.begin(), row_hit.end(), true));
    est.s2_hat = static_cast<Index>(std::count(col_hit.begin(), col_hit.end(), true));
    return est;
}

}  // namespace jdr
