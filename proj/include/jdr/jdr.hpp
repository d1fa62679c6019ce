#pragma once

#include "jdr/data.hpp"
#include "jdr/error.hpp"
#include "jdr/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

namespace jdr {

/// X0 = (1/m) sum_i a_i' y_i' b_i'^T.
struct ProxyMatrix {
    Matrix X0;
    Index m_used = 0;
};

/// Estimated embeddings in raw coordinates (U, V) and in whitened coordinates
/// (whitened_U, whitened_V, orthonormal columns), with the leading singular
/// values of the proxy.
struct EmbeddingPair {
    Matrix U;
    Matrix V;
    Vector sigma;
    Matrix whitened_U;
    Matrix whitened_V;

    Index rank() const noexcept { return sigma.size(); }
};

struct JdrFit {
    EmbeddingPair embedding;
    NormalizationState normalization;
};

struct JdrOptions {
    double jitter_floor = 1e-10;
    /// Samples per rank-1 accumulation block. Part of the result's identity:
    /// the reduction order is fixed for a fixed chunk size.
    Index chunk_rows = 4096;
};

/// Accumulates the proxy block by block in sample order; each block adds
/// A_blk^T diag(y_blk) B_blk, i.e. the block's rank-1 terms, straight into X0.
inline ProxyMatrix build_proxy(const WhitenedSampleSet& w, Index chunk_rows = 4096) {
    const Index m = w.size();
    require(m >= 1, ErrorKind::DimensionMismatch, "proxy needs at least one sample");
    require(w.A.rows() == m && w.B.rows() == m, ErrorKind::DimensionMismatch, "row counts differ");
    chunk_rows = std::max<Index>(chunk_rows, 1);

    ProxyMatrix p;
    p.m_used = m;
    p.X0 = Matrix::Zero(w.A.cols(), w.B.cols());
    for (Index start = 0; start < m; start += chunk_rows) {
        const Index len = std::min(chunk_rows, m - start);
        const Matrix weighted =
            w.B.middleRows(start, len).array().colwise() * w.y.segment(start, len).array();
        p.X0.noalias() += w.A.middleRows(start, len).transpose() * weighted;
    }
    p.X0 /= static_cast<double>(m);
    return p;
}

/// All min(n1, n2) singular values of the proxy, nonincreasing.
inline Vector spectrum(const ProxyMatrix& p) { return singular_values(p.X0); }

/// Exact joint dimensionality reduction: normalize, build the proxy, take its
/// rank-r compact SVD, de-whiten.
inline JdrFit fit_jdr_with_state(const SampleSet& set, Index r, Normalization mode,
                                 const JdrOptions& opts = {}) {
    validate(set);
    const Index limit = std::min(set.dim_a(), set.dim_b());
    require(r >= 1 && r <= limit, ErrorKind::RankTooLarge,
            "rank " + std::to_string(r) + " outside [1, " + std::to_string(limit) + "]");

    JdrFit fit;
    fit.normalization = fit_normalization(set, mode, opts.jitter_floor);
    const WhitenedSampleSet w = whiten(set, fit.normalization);
    const ProxyMatrix proxy = build_proxy(w, opts.chunk_rows);

    TruncatedSvd svd = truncated_svd(proxy.X0, r);
    EmbeddingPair& e = fit.embedding;
    e.whitened_U = std::move(svd.U);
    e.whitened_V = std::move(svd.V);
    e.sigma = std::move(svd.sigma);
    std::tie(e.U, e.V) = unwhiten_embeddings(e.whitened_U, e.whitened_V, fit.normalization);
    return fit;
}

inline EmbeddingPair fit_jdr(const SampleSet& set, Index r, Normalization mode,
                             const JdrOptions& opts = {}) {
    return fit_jdr_with_state(set, r, mode, opts).embedding;
}

/// Randomized variant: feature-wise normalization, an n2 x 2r Gaussian sketch
/// of the proxy's row space, economy QR, then an SVD of the small projected
/// proxy. The full n1 x n2 proxy is never formed.
inline JdrFit fit_fast_jdr_with_state(const SampleSet& set, Index r, std::uint64_t seed,
                                      const JdrOptions& opts = {}) {
    validate(set);
    require(r >= 1 && 2 * r <= set.dim_b(), ErrorKind::RankTooLarge,
            "fast path needs 1 <= 2r <= n2 (r = " + std::to_string(r) + ", n2 = " +
                std::to_string(set.dim_b()) + ")");
    require(r <= set.dim_a(), ErrorKind::RankTooLarge,
            "rank " + std::to_string(r) + " exceeds n1 = " + std::to_string(set.dim_a()));

    JdrFit fit;
    fit.normalization = fit_normalization_featurewise(set);
    const WhitenedSampleSet w = whiten(set, fit.normalization);
    const Index m = w.size();
    const Index n1 = set.dim_a();
    const Index n2 = set.dim_b();
    const Index chunk = std::max<Index>(opts.chunk_rows, 1);
    const double inv_m = 1.0 / static_cast<double>(m);

    Rng rng(seed);
    const Matrix S = gaussian_matrix(n2, 2 * r, rng);

    // Z = (1/m) sum_i a_i' y_i' (b_i'^T S)
    Matrix Z = Matrix::Zero(n1, 2 * r);
    for (Index start = 0; start < m; start += chunk) {
        const Index len = std::min(chunk, m - start);
        const Matrix sketched = (w.B.middleRows(start, len) * S).array().colwise() *
                                w.y.segment(start, len).array();
        Z.noalias() += w.A.middleRows(start, len).transpose() * sketched;
    }
    Z *= inv_m;

    const Matrix Q = thin_q(Z);  // n1 x k, k = min(n1, 2r)

    // (1/m) sum_i (Q^T a_i') y_i' b_i'^T, a k x n2 matrix
    Matrix small = Matrix::Zero(Q.cols(), n2);
    for (Index start = 0; start < m; start += chunk) {
        const Index len = std::min(chunk, m - start);
        const Matrix projected = (w.A.middleRows(start, len) * Q).array().colwise() *
                                 w.y.segment(start, len).array();
        small.noalias() += projected.transpose() * w.B.middleRows(start, len);
    }
    small *= inv_m;

    Eigen::BDCSVD<Matrix> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
    EmbeddingPair& e = fit.embedding;
    e.whitened_U = Q * svd.matrixU().leftCols(r);
    e.whitened_V = svd.matrixV().leftCols(r);
    e.sigma = svd.singularValues().head(r);
    fix_signs(e.whitened_U, e.whitened_V);
    std::tie(e.U, e.V) = unwhiten_embeddings(e.whitened_U, e.whitened_V, fit.normalization);
    return fit;
}

inline EmbeddingPair fit_fast_jdr(const SampleSet& set, Index r, std::uint64_t seed,
                                  const JdrOptions& opts = {}) {
    return fit_fast_jdr_with_state(set, r, seed, opts).embedding;
}

}  // namespace jdr
