#pragma once

#include "jdr/data.hpp"
#include "jdr/error.hpp"
#include "jdr/jdr.hpp"
#include "jdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace jdr {

/// One observed dyad: entity i on the A side, entity j on the B side, score y.
struct Observation {
    Index i = 0;
    Index j = 0;
    double y = 0.0;
};

using Query = std::pair<Index, Index>;

/// Entity features plus the observed and queried dyads between them.
struct DyadicDataset {
    Matrix features_a;  // m_D x n_D
    Matrix features_b;  // m_G x n_G
    std::vector<Observation> observed;
    std::vector<Query> queries;

    void validate() const {
        auto in_range = [&](Index i, Index j) {
            return i >= 0 && i < features_a.rows() && j >= 0 && j < features_b.rows();
        };
        for (const auto& o : observed)
            require(in_range(o.i, o.j), ErrorKind::IndexOutOfRange, "observed pair out of range");
        for (const auto& [i, j] : queries)
            require(in_range(i, j), ErrorKind::IndexOutOfRange, "query pair out of range");
    }

    /// Per-observation sample set: row t holds features_a(i_t), features_b(j_t), y_t.
    SampleSet samples() const {
        SampleSet set;
        const auto m = static_cast<Index>(observed.size());
        set.A.resize(m, features_a.cols());
        set.B.resize(m, features_b.cols());
        set.y.resize(m);
        for (Index t = 0; t < m; ++t) {
            const auto& o = observed[static_cast<std::size_t>(t)];
            set.A.row(t) = features_a.row(o.i);
            set.B.row(t) = features_b.row(o.j);
            set.y(t) = o.y;
        }
        return set;
    }
};

/// Adds a zero-score observation for every (i, j) with i among the observed A
/// entities and j any B entity not already observed with i.
inline std::vector<Observation> fill_zeros(const std::vector<Observation>& observed, Index m_b) {
    std::vector<Observation> out = observed;
    std::unordered_map<Index, std::vector<bool>> seen;
    std::vector<Index> order;
    for (const auto& o : observed) {
        auto [it, inserted] = seen.try_emplace(o.i, std::vector<bool>(static_cast<std::size_t>(m_b), false));
        if (inserted) order.push_back(o.i);
        if (o.j >= 0 && o.j < m_b) it->second[static_cast<std::size_t>(o.j)] = true;
    }
    for (Index i : order) {
        const auto& hit = seen[i];
        for (Index j = 0; j < m_b; ++j)
            if (!hit[static_cast<std::size_t>(j)]) out.push_back({i, j, 0.0});
    }
    return out;
}

/// a'' = diag(sqrt(sigma)) whitened_U^T a' for every row of raw A-side features.
inline Matrix embed_scaled_a(const EmbeddingPair& emb, const NormalizationState& state,
                             const Matrix& raw) {
    require(emb.whitened_U.rows() == state.dim_a(), ErrorKind::DimensionMismatch,
            "embedding and normalization state disagree on n1");
    const Matrix projected = whiten_a(raw, state) * emb.whitened_U;
    return projected.array().rowwise() * emb.sigma.array().sqrt().transpose();
}

inline Matrix embed_scaled_b(const EmbeddingPair& emb, const NormalizationState& state,
                             const Matrix& raw) {
    require(emb.whitened_V.rows() == state.dim_b(), ErrorKind::DimensionMismatch,
            "embedding and normalization state disagree on n2");
    const Matrix projected = whiten_b(raw, state) * emb.whitened_V;
    return projected.array().rowwise() * emb.sigma.array().sqrt().transpose();
}

/// Same features from de-whitened embeddings: U^T (a - mu) equals
/// whitened_U^T a' for U = C^{-T} whitened_U.
inline Matrix embed_scaled_raw(const Matrix& U, const Vector& sigma, const Vector& mu,
                               const Matrix& raw) {
    require(raw.cols() == U.rows() && mu.size() == U.rows() && sigma.size() == U.cols(),
            ErrorKind::DimensionMismatch, "embedding, mean and features disagree in shape");
    const Matrix projected = (raw.rowwise() - mu.transpose()) * U;
    return projected.array().rowwise() * sigma.array().sqrt().transpose();
}

/// Median pairwise Euclidean distance over at most 1000 seeded rows; 1 when
/// the median is not positive.
inline double median_heuristic_bandwidth(const Matrix& features, std::uint64_t seed = 0) {
    require(features.rows() >= 2, ErrorKind::InvalidArgument, "bandwidth heuristic needs m >= 2");
    std::vector<Index> rows(static_cast<std::size_t>(features.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
    constexpr std::size_t kMaxRows = 1000;
    if (rows.size() > kMaxRows) {
        Rng rng(seed);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(kMaxRows);
    }
    std::vector<double> dist;
    dist.reserve(rows.size() * (rows.size() - 1) / 2);
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = a + 1; b < rows.size(); ++b)
            dist.push_back((features.row(rows[a]) - features.row(rows[b])).norm());
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    double median = dist[mid];
    if (dist.size() % 2 == 0) {
        const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    return (median > 0.0 && std::isfinite(median)) ? median : 1.0;
}

/// Nadaraya-Watson regression over observed dyads with a product of Gaussian
/// kernels, K_h(u) = exp(-||u||^2 / (2 h^2)), one per side. Immutable once built.
class KernelPredictor {
public:
    KernelPredictor(Matrix emb_a, Matrix emb_b, std::vector<Observation> observed, double h_a,
                    double h_b)
        : emb_a_(std::move(emb_a)), emb_b_(std::move(emb_b)), observed_(std::move(observed)),
          h_a_(h_a), h_b_(h_b) {
        require(h_a_ > 0.0 && h_b_ > 0.0, ErrorKind::InvalidArgument, "bandwidths must be positive");
        require(!observed_.empty(), ErrorKind::InvalidArgument, "predictor needs observations");
        require(emb_a_.cols() == emb_b_.cols(), ErrorKind::DimensionMismatch,
                "embedded features must share a dimension");
        std::unordered_map<Index, Index> slot_a, slot_b;
        double total = 0.0;
        for (const auto& o : observed_) {
            require(o.i >= 0 && o.i < emb_a_.rows() && o.j >= 0 && o.j < emb_b_.rows(),
                    ErrorKind::IndexOutOfRange, "observation index out of range");
            auto [ia, new_a] = slot_a.try_emplace(o.i, static_cast<Index>(entities_a_.size()));
            if (new_a) entities_a_.push_back(o.i);
            auto [ib, new_b] = slot_b.try_emplace(o.j, static_cast<Index>(entities_b_.size()));
            if (new_b) entities_b_.push_back(o.j);
            slots_.emplace_back(ia->second, ib->second);
            total += o.y;
        }
        fallback_ = total / static_cast<double>(observed_.size());
    }

    double fallback() const noexcept { return fallback_; }
    double bandwidth_a() const noexcept { return h_a_; }
    double bandwidth_b() const noexcept { return h_b_; }
    const std::vector<Observation>& observed() const noexcept { return observed_; }

    double predict(Index i, Index j) const {
        check_query(i, j);
        return combine(kernel_row(emb_a_, entities_a_, i, h_a_), kernel_row(emb_b_, entities_b_, j, h_b_));
    }

    /// Batch prediction; kernel rows are shared between queries with the same
    /// entity, so results are bit-identical to calling predict per query.
    std::vector<double> predict_all(std::span<const Query> queries) const {
        std::vector<double> out;
        out.reserve(queries.size());
        std::unordered_map<Index, std::vector<double>> cache_a, cache_b;
        for (const auto& [i, j] : queries) {
            check_query(i, j);
            auto ia = cache_a.find(i);
            if (ia == cache_a.end()) ia = cache_a.emplace(i, kernel_row(emb_a_, entities_a_, i, h_a_)).first;
            auto ib = cache_b.find(j);
            if (ib == cache_b.end()) ib = cache_b.emplace(j, kernel_row(emb_b_, entities_b_, j, h_b_)).first;
            out.push_back(combine(ia->second, ib->second));
        }
        return out;
    }

private:
    void check_query(Index i, Index j) const {
        require(i >= 0 && i < emb_a_.rows() && j >= 0 && j < emb_b_.rows(), ErrorKind::IndexOutOfRange,
                "query (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    }

    static std::vector<double> kernel_row(const Matrix& emb, const std::vector<Index>& entities,
                                          Index query, double h) {
        std::vector<double> k(entities.size());
        const double scale = 1.0 / (2.0 * h * h);
        for (std::size_t p = 0; p < entities.size(); ++p)
            k[p] = std::exp(-(emb.row(query) - emb.row(entities[p])).squaredNorm() * scale);
        return k;
    }

    // Sums run in observation order.
    double combine(const std::vector<double>& ka, const std::vector<double>& kb) const {
        double num = 0.0, den = 0.0;
        for (std::size_t t = 0; t < observed_.size(); ++t) {
            const double w = ka[static_cast<std::size_t>(slots_[t].first)] *
                             kb[static_cast<std::size_t>(slots_[t].second)];
            num += w * observed_[t].y;
            den += w;
        }
        return den < 1e-300 ? fallback_ : num / den;
    }

    Matrix emb_a_;
    Matrix emb_b_;
    std::vector<Observation> observed_;
    double h_a_;
    double h_b_;
    std::vector<Index> entities_a_;
    std::vector<Index> entities_b_;
    std::vector<std::pair<Index, Index>> slots_;
    double fallback_ = 0.0;
};

/// Nadaraya-Watson over a single joint embedding of the concatenated pair
/// feature; z(i, j) = za_i + zb_j because the joint map is linear. Needs one
/// kernel evaluation per observed dyad for each prediction.
class JointKernelPredictor {
public:
    JointKernelPredictor(Matrix za, Matrix zb, std::vector<Observation> observed, double h)
        : za_(std::move(za)), zb_(std::move(zb)), observed_(std::move(observed)), h_(h) {
        require(h_ > 0.0, ErrorKind::InvalidArgument, "bandwidth must be positive");
        require(!observed_.empty(), ErrorKind::InvalidArgument, "predictor needs observations");
        double total = 0.0;
        for (const auto& o : observed_) {
            require(o.i >= 0 && o.i < za_.rows() && o.j >= 0 && o.j < zb_.rows(),
                    ErrorKind::IndexOutOfRange, "observation index out of range");
            total += o.y;
        }
        fallback_ = total / static_cast<double>(observed_.size());
    }

    double predict(Index i, Index j) const {
        require(i >= 0 && i < za_.rows() && j >= 0 && j < zb_.rows(), ErrorKind::IndexOutOfRange,
                "query out of range");
        const Eigen::RowVectorXd z = za_.row(i) + zb_.row(j);
        const double scale = 1.0 / (2.0 * h_ * h_);
        double num = 0.0, den = 0.0;
        for (const auto& o : observed_) {
            const double w = std::exp(-(z - za_.row(o.i) - zb_.row(o.j)).squaredNorm() * scale);
            num += w * o.y;
            den += w;
        }
        return den < 1e-300 ? fallback_ : num / den;
    }

    std::vector<double> predict_all(std::span<const Query> queries) const {
        std::vector<double> out;
        out.reserve(queries.size());
        for (const auto& [i, j] : queries) out.push_back(predict(i, j));
        return out;
    }

private:
    Matrix za_;
    Matrix zb_;
    std::vector<Observation> observed_;
    double h_;
    double fallback_ = 0.0;
};

}  // namespace jdr
