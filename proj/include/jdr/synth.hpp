#pragma once

#include "jdr/data.hpp"
#include "jdr/error.hpp"
#include "jdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace jdr {

/// Link between (U^T a, V^T b) and the response.
///   Bilinear:      y = a^T U V^T b + z,                 z ~ N(0, noise_sd^2)
///   Rbf:           y ~ Bernoulli(exp(-||U^T a - V^T b||^2))
///   EvenQuadratic: y = sum_j (U^T a)_j^2 (V^T b)_j^2 + z
enum class LinkModel { Bilinear, Rbf, EvenQuadratic };

enum class FeatureDist { Gaussian, Uniform, Poisson, CorrelatedGaussian };

constexpr const char* to_string(LinkModel model) noexcept {
    switch (model) {
        case LinkModel::Bilinear: return "bilinear";
        case LinkModel::Rbf: return "rbf";
        case LinkModel::EvenQuadratic: return "even";
    }
    return "bilinear";
}

constexpr const char* to_string(FeatureDist dist) noexcept {
    switch (dist) {
        case FeatureDist::Gaussian: return "gaussian";
        case FeatureDist::Uniform: return "uniform";
        case FeatureDist::Poisson: return "poisson";
        case FeatureDist::CorrelatedGaussian: return "corr";
    }
    return "gaussian";
}

struct SyntheticSpec {
    LinkModel model = LinkModel::Bilinear;
    Index n1 = 50;
    Index n2 = 50;
    Index r = 5;
    Index m = 1000;
    FeatureDist feature_dist = FeatureDist::Gaussian;
    double rho = 0.2;  // cross-correlation of matched coordinates (CorrelatedGaussian)
    std::optional<std::pair<Index, Index>> sparsity;  // (s1, s2) planted row supports
    double noise_sd = 1.0;
    double poisson_lambda = 4.0;
    std::uint64_t seed = 0;

    void validate() const {
        require(n1 >= 1 && n2 >= 1 && m >= 1, ErrorKind::InvalidArgument,
                "dimensions and sample count must be positive");
        require(r >= 1 && r <= std::min(n1, n2), ErrorKind::RankTooLarge,
                "rank " + std::to_string(r) + " outside [1, min(n1, n2)]");
        if (sparsity) {
            const auto [s1, s2] = *sparsity;
            require(s1 >= r && s1 <= n1 && s2 >= r && s2 <= n2, ErrorKind::BudgetOutOfRange,
                    "planted sparsity must satisfy r <= s <= n");
        }
        require(rho >= 0.0 && rho < 1.0, ErrorKind::InvalidArgument, "rho must lie in [0, 1)");
        require(noise_sd >= 0.0, ErrorKind::InvalidArgument, "noise_sd must be >= 0");
        require(poisson_lambda > 0.0, ErrorKind::InvalidArgument, "poisson lambda must be > 0");
    }
};

struct GroundTruth {
    Matrix U;  // n1 x r, orthonormal columns
    Matrix V;  // n2 x r
    std::vector<Index> support_U;  // planted rows (all rows when dense)
    std::vector<Index> support_V;
};

namespace detail {

inline constexpr std::uint64_t kTruthStream = 0x7472757468ULL;
inline constexpr std::uint64_t kSampleStream = 0x73616d706c65ULL;

/// Orthonormal n x r factor supported on `s` seeded rows (all rows when s == n).
inline Matrix planted_orthonormal(Index n, Index r, Index s, Rng& rng, std::vector<Index>& support) {
    support.resize(static_cast<std::size_t>(n));
    std::iota(support.begin(), support.end(), Index{0});
    if (s < n) {
        std::shuffle(support.begin(), support.end(), rng);
        support.resize(static_cast<std::size_t>(s));
        std::sort(support.begin(), support.end());
    }
    const Matrix dense = thin_q(gaussian_matrix(s, r, rng));
    Matrix out = Matrix::Zero(n, r);
    for (std::size_t i = 0; i < support.size(); ++i) out.row(support[i]) = dense.row(static_cast<Index>(i));
    return out;
}

}  // namespace detail

inline GroundTruth make_ground_truth(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(mix_seed(spec.seed, detail::kTruthStream));
    const Index s1 = spec.sparsity ? spec.sparsity->first : spec.n1;
    const Index s2 = spec.sparsity ? spec.sparsity->second : spec.n2;
    GroundTruth truth;
    truth.U = detail::planted_orthonormal(spec.n1, spec.r, s1, rng, truth.support_U);
    truth.V = detail::planted_orthonormal(spec.n2, spec.r, s2, rng, truth.support_V);
    return truth;
}

/// Draws m samples. Features are filled sample by sample (A first, then B),
/// then responses, all from one seeded stream.
inline SampleSet generate(const SyntheticSpec& spec, const GroundTruth& truth) {
    spec.validate();
    require(truth.U.rows() == spec.n1 && truth.V.rows() == spec.n2 &&
                truth.U.cols() == spec.r && truth.V.cols() == spec.r,
            ErrorKind::DimensionMismatch, "ground truth does not match the spec");

    Rng rng(mix_seed(spec.seed, detail::kSampleStream));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double root3 = std::sqrt(3.0);
    std::uniform_real_distribution<double> uniform(-root3, root3);
    std::poisson_distribution<int> poisson(spec.poisson_lambda);
    const double lambda = spec.poisson_lambda;
    const double lambda_sd = std::sqrt(lambda);

    auto draw = [&]() -> double {
        switch (spec.feature_dist) {
            case FeatureDist::Uniform: return uniform(rng);
            case FeatureDist::Poisson: return (static_cast<double>(poisson(rng)) - lambda) / lambda_sd;
            case FeatureDist::Gaussian:
            case FeatureDist::CorrelatedGaussian: return normal(rng);
        }
        return normal(rng);
    };

    SampleSet set;
    set.A.resize(spec.m, spec.n1);
    set.B.resize(spec.m, spec.n2);
    set.y.resize(spec.m);
    for (Index i = 0; i < spec.m; ++i)
        for (Index j = 0; j < spec.n1; ++j) set.A(i, j) = draw();
    for (Index i = 0; i < spec.m; ++i)
        for (Index k = 0; k < spec.n2; ++k) set.B(i, k) = draw();

    if (spec.feature_dist == FeatureDist::CorrelatedGaussian) {
        // b_j <- rho a_j + sqrt(1 - rho^2) g_j on matched coordinates.
        const double keep = std::sqrt(1.0 - spec.rho * spec.rho);
        const Index matched = std::min(spec.n1, spec.n2);
        for (Index i = 0; i < spec.m; ++i)
            for (Index j = 0; j < matched; ++j)
                set.B(i, j) = spec.rho * set.A(i, j) + keep * set.B(i, j);
    }

    const Matrix ua = set.A * truth.U;
    const Matrix vb = set.B * truth.V;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index i = 0; i < spec.m; ++i) {
        switch (spec.model) {
            case LinkModel::Bilinear:
                set.y(i) = ua.row(i).dot(vb.row(i)) + spec.noise_sd * normal(rng);
                break;
            case LinkModel::EvenQuadratic:
                set.y(i) = (ua.row(i).array().square() * vb.row(i).array().square()).sum() +
                           spec.noise_sd * normal(rng);
                break;
            case LinkModel::Rbf: {
                const double mean = std::exp(-(ua.row(i) - vb.row(i)).squaredNorm());
                // exp underflows to 0 only for distances beyond ~27; still a valid parameter
                require(mean >= 0.0 && mean <= 1.0, ErrorKind::InvalidArgument,
                        "RBF Bernoulli parameter left [0, 1]");
                set.y(i) = unit(rng) < mean ? 1.0 : 0.0;
                break;
            }
        }
    }
    return set;
}

}  // namespace jdr
