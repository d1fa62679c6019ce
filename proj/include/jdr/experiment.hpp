#pragma once

#include "jdr/baselines.hpp"
#include "jdr/data.hpp"
#include "jdr/error.hpp"
#include "jdr/jdr.hpp"
#include "jdr/linalg.hpp"
#include "jdr/metrics.hpp"
#include "jdr/predictor.hpp"
#include "jdr/sparse.hpp"
#include "jdr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace jdr {

enum class SweepVariable { M, N, S };

enum class Estimator { Jdr, FastJdr, SparseJdr, Phd, Cphd, Pca };

constexpr const char* to_string(SweepVariable v) noexcept {
    switch (v) {
        case SweepVariable::M: return "m";
        case SweepVariable::N: return "n";
        case SweepVariable::S: return "s";
    }
    return "m";
}

constexpr const char* to_string(Estimator e) noexcept {
    switch (e) {
        case Estimator::Jdr: return "jdr";
        case Estimator::FastJdr: return "fast";
        case Estimator::SparseJdr: return "sparse";
        case Estimator::Phd: return "phd";
        case Estimator::Cphd: return "cphd";
        case Estimator::Pca: return "pca";
    }
    return "jdr";
}

struct ExperimentPlan {
    SweepVariable sweep = SweepVariable::M;
    std::vector<Index> grid;
    SyntheticSpec fixed;  // the swept field is overwritten per grid value
    Index trials = 20;
    std::uint64_t seed = 0;
    Estimator estimator = Estimator::Jdr;
    Normalization normalize = Normalization::Full;

    void validate() const {
        require(grid.size() >= 2, ErrorKind::InvalidArgument, "grid needs at least two values");
        for (std::size_t g = 1; g < grid.size(); ++g)
            require(grid[g] > grid[g - 1], ErrorKind::InvalidArgument, "grid must be strictly increasing");
        require(grid.front() >= 1, ErrorKind::InvalidArgument, "grid values must be positive");
        require(trials >= 1, ErrorKind::InvalidArgument, "trials must be >= 1");
        for (Index value : grid) spec_for(value).validate();
    }

    /// Synthetic spec at one grid value (seed left to the caller).
    SyntheticSpec spec_for(Index value) const {
        SyntheticSpec s = fixed;
        switch (sweep) {
            case SweepVariable::M: s.m = value; break;
            case SweepVariable::N: s.n1 = s.n2 = value; break;
            case SweepVariable::S: s.sparsity = std::make_pair(value, value); break;
        }
        return s;
    }

    /// Seed for one trial; distinct for every (grid index, trial) pair.
    std::uint64_t trial_seed(std::size_t grid_index, Index trial) const {
        return mix_seed(mix_seed(seed, grid_index), static_cast<std::uint64_t>(trial));
    }
};

struct TrialRecord {
    Index parameter = 0;
    Index trial = 0;
    double nsee = 0.0;
};

struct ExperimentResult {
    std::vector<TrialRecord> records;  // ordered by (grid value, trial)
    std::vector<Index> grid;
    std::vector<double> mean_nsee;
    SlopeFit slope;
};

namespace detail {

inline constexpr std::uint64_t kSketchStream = 0x736b65746368ULL;

/// Block-diagonal [U 0; 0 V].
inline Matrix block_diagonal(const Matrix& U, const Matrix& V) {
    Matrix out = Matrix::Zero(U.rows() + V.rows(), U.cols() + V.cols());
    out.topLeftCorner(U.rows(), U.cols()) = U;
    out.bottomRightCorner(V.rows(), V.cols()) = V;
    return out;
}

}  // namespace detail

/// Fits one estimator and scores it against the ground truth.
inline double score_estimator(const SampleSet& set, const GroundTruth& truth, const SyntheticSpec& spec,
                              Estimator estimator, Normalization normalize, std::uint64_t seed) {
    const Index r = spec.r;
    switch (estimator) {
        case Estimator::Jdr: {
            const auto e = fit_jdr(set, r, normalize);
            return nsee(truth.U, e.U, truth.V, e.V);
        }
        case Estimator::FastJdr: {
            const auto e = fit_fast_jdr(set, r, mix_seed(seed, detail::kSketchStream));
            return nsee(truth.U, e.U, truth.V, e.V);
        }
        case Estimator::SparseJdr: {
            const Index s1 = spec.sparsity ? spec.sparsity->first : spec.n1 - 1;
            const Index s2 = spec.sparsity ? spec.sparsity->second : spec.n2 - 1;
            const auto e = fit_sparse_jdr(set, {r, s1, s2}, normalize);
            return nsee(truth.U, e.base.U, truth.V, e.base.V);
        }
        case Estimator::Phd: {
            const NormalizationState state = fit_normalization(set, normalize);
            const WhitenedSampleSet w = whiten(set, state);
            const auto [U, V] = unwhiten_embeddings(fit_phd(w.A, w.y, r), fit_phd(w.B, w.y, r), state);
            return nsee(truth.U, U, truth.V, V);
        }
        case Estimator::Pca: {
            const auto U = fit_pca(set.A, r);
            const auto V = fit_pca(set.B, r);
            return nsee(truth.U, U, truth.V, V);
        }
        case Estimator::Cphd: {
            const NormalizationState state = fit_normalization(set, normalize);
            const WhitenedSampleSet w = whiten(set, state);
            const Matrix W = fit_cphd({w.A, w.B, w.y}, r);
            // Map each block back to raw coordinates before comparing.
            auto [Wa, Wb] = unwhiten_embeddings(W.topRows(set.dim_a()), W.bottomRows(set.dim_b()), state);
            Matrix joint(W.rows(), W.cols());
            joint << Wa, Wb;
            return subspace_distance(detail::block_diagonal(truth.U, truth.V), joint) /
                   std::sqrt(static_cast<double>(2 * r));
        }
    }
    fail(ErrorKind::InvalidArgument, "unknown estimator");
}

inline ExperimentResult run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    ExperimentResult out;
    out.grid = plan.grid;
    std::vector<double> xs;
    for (std::size_t g = 0; g < plan.grid.size(); ++g) {
        double total = 0.0;
        for (Index t = 0; t < plan.trials; ++t) {
            SyntheticSpec spec = plan.spec_for(plan.grid[g]);
            spec.seed = plan.trial_seed(g, t);
            const GroundTruth truth = make_ground_truth(spec);
            const SampleSet set = generate(spec, truth);
            const double e = score_estimator(set, truth, spec, plan.estimator, plan.normalize, spec.seed);
            out.records.push_back({plan.grid[g], t, e});
            total += e;
        }
        out.mean_nsee.push_back(total / static_cast<double>(plan.trials));
        xs.push_back(static_cast<double>(plan.grid[g]));
    }
    out.slope = fit_loglog_slope(xs, out.mean_nsee);
    return out;
}

struct RobustnessResult {
    FeatureDist variant = FeatureDist::Gaussian;
    ExperimentResult baseline;   // Gaussian features
    ExperimentResult perturbed;  // variant features, same seeds
    double slope_difference() const { return perturbed.slope.slope - baseline.slope.slope; }
};

/// Same sweep under Gaussian features and under `variant`, with common seeds.
inline RobustnessResult run_robustness(const ExperimentPlan& plan, FeatureDist variant, double rho = 0.2) {
    RobustnessResult out;
    out.variant = variant;
    ExperimentPlan gaussian = plan;
    gaussian.fixed.feature_dist = FeatureDist::Gaussian;
    out.baseline = run_experiment(gaussian);
    ExperimentPlan other = plan;
    other.fixed.feature_dist = variant;
    other.fixed.rho = rho;
    out.perturbed = run_experiment(other);
    return out;
}

struct PathologyConfig {
    Index n = 10;
    Index r = 5;
    std::vector<Index> grid{1000, 2000, 5000, 10000};
    Index trials = 20;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;
};

struct PathologyRow {
    LinkModel link = LinkModel::Bilinear;
    Estimator method = Estimator::Jdr;
    ExperimentResult result;
    double final_nsee() const { return result.mean_nsee.back(); }
};

/// JDR and separate pHd on the odd (bilinear) and even (quadratic) links.
inline std::vector<PathologyRow> run_pathology(const PathologyConfig& cfg = {}) {
    std::vector<PathologyRow> rows;
    for (LinkModel link : {LinkModel::Bilinear, LinkModel::EvenQuadratic}) {
        for (Estimator method : {Estimator::Jdr, Estimator::Phd}) {
            ExperimentPlan plan;
            plan.sweep = SweepVariable::M;
            plan.grid = cfg.grid;
            plan.trials = cfg.trials;
            plan.seed = cfg.seed;
            plan.estimator = method;
            plan.fixed.model = link;
            plan.fixed.n1 = plan.fixed.n2 = cfg.n;
            plan.fixed.r = cfg.r;
            plan.fixed.noise_sd = cfg.noise_sd;
            rows.push_back({link, method, run_experiment(plan)});
        }
    }
    return rows;
}

struct DyadicConfig {
    Index m_a = 300;  // diseases
    Index m_b = 300;  // genes
    Index n = 40;
    Index r = 5;
    Index partitions = 5;
    double test_fraction = 0.1;
    double positive_quantile = 0.95;
    std::vector<Index> ks{10};
    double bandwidth_scale = 1.0;
    bool include_cphd = false;
    std::uint64_t seed = 0;
};

/// Synthetic dyads: Gaussian entity features and scores
/// max(0, a^T U V^T b - tau) with tau at the given quantile of all pairs.
struct DyadicWorld {
    Matrix features_a;
    Matrix features_b;
    Matrix scores;  // m_a x m_b
    GroundTruth truth;
};

inline DyadicWorld make_dyadic_world(const DyadicConfig& cfg) {
    require(cfg.m_a >= 10 && cfg.m_b >= 2, ErrorKind::InvalidArgument, "dyadic benchmark needs m_a >= 10, m_b >= 2");
    require(cfg.positive_quantile > 0.0 && cfg.positive_quantile < 1.0, ErrorKind::InvalidArgument,
            "positive quantile must lie in (0, 1)");
    SyntheticSpec spec;
    spec.n1 = spec.n2 = cfg.n;
    spec.r = cfg.r;
    spec.seed = cfg.seed;
    DyadicWorld w;
    w.truth = make_ground_truth(spec);
    Rng rng(mix_seed(cfg.seed, 0x647961646963ULL));
    w.features_a = gaussian_matrix(cfg.m_a, cfg.n, rng);
    w.features_b = gaussian_matrix(cfg.m_b, cfg.n, rng);
    const Matrix raw = (w.features_a * w.truth.U) * (w.features_b * w.truth.V).transpose();
    std::vector<double> all(raw.data(), raw.data() + raw.size());
    const auto pos = static_cast<std::size_t>(cfg.positive_quantile * static_cast<double>(all.size() - 1));
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(pos), all.end());
    const double tau = all[pos];
    w.scores = (raw.array() - tau).max(0.0);
    return w;
}

struct DyadicRow {
    std::string method;
    Index partition = 0;
    Index k = 0;
    double recall = 0.0;
};

struct DyadicResult {
    std::vector<DyadicRow> rows;
    double random_expected(Index k, Index m_b) const { return static_cast<double>(k) / static_cast<double>(m_b); }
    /// Mean recall over partitions for one method and k.
    double mean(std::string_view method, Index k) const {
        double total = 0.0;
        int count = 0;
        for (const auto& row : rows)
            if (row.method == method && row.k == k) {
                total += row.recall;
                ++count;
            }
        require(count > 0, ErrorKind::InvalidArgument, "no rows for method " + std::string(method));
        return total / count;
    }
};

namespace detail {

/// Mean recall@k over test diseases that have at least one positive gene.
template <typename ScoreFn>
double mean_recall(const Matrix& truth_scores, const std::vector<Index>& test, Index k, ScoreFn&& scores_for) {
    double total = 0.0;
    int counted = 0;
    for (Index i : test) {
        std::vector<Index> positives;
        for (Index j = 0; j < truth_scores.cols(); ++j)
            if (truth_scores(i, j) > 0.0) positives.push_back(j);
        if (positives.empty()) continue;
        total += recall_at_k(scores_for(i), positives, k);
        ++counted;
    }
    return counted ? total / counted : 0.0;
}

inline Matrix project_centered(const Matrix& raw, const Vector& mu, const Matrix& directions) {
    return (raw.rowwise() - mu.transpose()) * directions;
}

}  // namespace detail

/// Disease-wise held-out recall@k for JDR+KR, PCA+KR, pHd+KR (and optionally
/// cpHd+KR) plus a seeded random ranking.
inline DyadicResult run_dyadic_benchmark(const DyadicConfig& cfg) {
    require(!cfg.ks.empty(), ErrorKind::InvalidArgument, "at least one k is required");
    for (Index k : cfg.ks) require(k >= 1 && k <= cfg.m_b, ErrorKind::InvalidArgument, "k outside [1, m_b]");
    require(cfg.partitions >= 1, ErrorKind::InvalidArgument, "partitions must be >= 1");
    require(cfg.bandwidth_scale > 0.0, ErrorKind::InvalidArgument, "bandwidth scale must be positive");
    const DyadicWorld world = make_dyadic_world(cfg);
    const auto n_test = std::max<Index>(1, static_cast<Index>(std::llround(cfg.test_fraction * static_cast<double>(cfg.m_a))));
    require(n_test < cfg.m_a, ErrorKind::InvalidArgument, "test fraction leaves no training diseases");

    DyadicResult result;
    for (Index part = 0; part < cfg.partitions; ++part) {
        const std::uint64_t part_seed = mix_seed(cfg.seed, 0x70617274ULL + static_cast<std::uint64_t>(part));
        Rng rng(part_seed);
        std::vector<Index> order(static_cast<std::size_t>(cfg.m_a));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Index> test(order.begin(), order.begin() + n_test);
        std::vector<Index> train(order.begin() + n_test, order.end());
        std::sort(test.begin(), test.end());
        std::sort(train.begin(), train.end());

        // Training dyads: every gene for every training disease, missing scores as 0.
        DyadicDataset data;
        data.features_a = world.features_a;
        data.features_b = world.features_b;
        for (Index i : train)
            for (Index j = 0; j < cfg.m_b; ++j) data.observed.push_back({i, j, world.scores(i, j)});
        const SampleSet samples = data.samples();

        std::vector<Query> all_genes(static_cast<std::size_t>(cfg.m_b));
        auto predictor_scores = [&](const auto& kp) {
            return [&kp, &all_genes](Index i) {
                for (std::size_t j = 0; j < all_genes.size(); ++j) all_genes[j] = {i, static_cast<Index>(j)};
                return kp.predict_all(all_genes);
            };
        };
        auto separable = [&](const std::string& name, const Matrix& za, const Matrix& zb) {
            const double ha = cfg.bandwidth_scale * median_heuristic_bandwidth(za, part_seed);
            const double hb = cfg.bandwidth_scale * median_heuristic_bandwidth(zb, part_seed);
            const KernelPredictor kp(za, zb, data.observed, ha, hb);
            for (Index k : cfg.ks)
                result.rows.push_back({name, part, k, detail::mean_recall(world.scores, test, k, predictor_scores(kp))});
        };

        const JdrFit jdr = fit_jdr_with_state(samples, cfg.r, Normalization::Full);
        separable("jdr", embed_scaled_a(jdr.embedding, jdr.normalization, world.features_a),
                  embed_scaled_b(jdr.embedding, jdr.normalization, world.features_b));

        const Vector mu_a = samples.A.colwise().mean().transpose();
        const Vector mu_b = samples.B.colwise().mean().transpose();
        separable("pca", detail::project_centered(world.features_a, mu_a, fit_pca(samples.A, cfg.r)),
                  detail::project_centered(world.features_b, mu_b, fit_pca(samples.B, cfg.r)));

        const NormalizationState state = fit_normalization(samples, Normalization::Full);
        const WhitenedSampleSet w = whiten(samples, state);
        separable("phd", whiten_a(world.features_a, state) * fit_phd(w.A, w.y, cfg.r),
                  whiten_b(world.features_b, state) * fit_phd(w.B, w.y, cfg.r));

        if (cfg.include_cphd) {
            const Matrix W = fit_cphd({w.A, w.B, w.y}, cfg.r);
            const Matrix za = whiten_a(world.features_a, state) * W.topRows(cfg.n);
            const Matrix zb = whiten_b(world.features_b, state) * W.bottomRows(cfg.n);
            Matrix pair_features(static_cast<Index>(data.observed.size()), za.cols());
            for (std::size_t t = 0; t < data.observed.size(); ++t)
                pair_features.row(static_cast<Index>(t)) = za.row(data.observed[t].i) + zb.row(data.observed[t].j);
            const double h = cfg.bandwidth_scale * median_heuristic_bandwidth(pair_features, part_seed);
            const JointKernelPredictor kp(za, zb, data.observed, h);
            for (Index k : cfg.ks)
                result.rows.push_back({"cphd", part, k, detail::mean_recall(world.scores, test, k, predictor_scores(kp))});
        }

        Rng shuffle_rng(mix_seed(part_seed, 0x72616e64ULL));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::vector<double>> random_scores;
        for (Index i = 0; i < cfg.m_a; ++i) {
            std::vector<double> s(static_cast<std::size_t>(cfg.m_b));
            for (double& v : s) v = unit(shuffle_rng);
            random_scores.push_back(std::move(s));
        }
        for (Index k : cfg.ks)
            result.rows.push_back({"random", part, k, detail::mean_recall(world.scores, test, k, [&](Index i) {
                                       return random_scores[static_cast<std::size_t>(i)];
                                   })});
    }
    return result;
}

}  // namespace jdr
