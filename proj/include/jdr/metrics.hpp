#pragma once

#include "jdr/error.hpp"
#include "jdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace jdr {

/// Orthonormal basis for span(X); X itself when it already is one (Gram within tol).
inline Matrix orthonormal_basis(const Matrix& X, double tol = 1e-6) {
    if (has_orthonormal_columns(X, tol)) return X;
    return thin_q(X);
}

/// d(U, U_hat) = || U_hat - U U^T U_hat ||_F, in [0, sqrt(r)].
/// U_true must be orthonormal; U_hat is orthonormalized when it is not.
inline double subspace_distance(const Matrix& U_true, const Matrix& U_hat) {
    require(U_true.rows() == U_hat.rows(), ErrorKind::DimensionMismatch,
            "subspace_distance: " + std::to_string(U_true.rows()) + " vs " +
                std::to_string(U_hat.rows()) + " rows");
    require(has_orthonormal_columns(U_true, 1e-6), ErrorKind::NotOrthonormal,
            "reference basis does not have orthonormal columns");
    const Matrix Q = orthonormal_basis(U_hat);
    return (Q - U_true * (U_true.transpose() * Q)).norm();
}

/// max{d(U, U_hat), d(V, V_hat)} / sqrt(r).
inline double nsee(const Matrix& U, const Matrix& U_hat, const Matrix& V, const Matrix& V_hat) {
    require(U_hat.cols() == V_hat.cols() && U_hat.cols() >= 1, ErrorKind::DimensionMismatch,
            "nsee: estimated embeddings must share a positive rank");
    const double r = static_cast<double>(U_hat.cols());
    return std::max(subspace_distance(U, U_hat), subspace_distance(V, V_hat)) / std::sqrt(r);
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<std::pair<double, double>> points;  // (ln x, ln y)
};

/// Ordinary least squares on (ln x, ln y).
inline SlopeFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size(), ErrorKind::DimensionMismatch, "xs and ys differ in length");
    require(xs.size() >= 2, ErrorKind::InvalidArgument, "slope fit needs at least two points");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(xs[i] > 0.0 && ys[i] > 0.0, ErrorKind::NonPositiveValue,
                "log-log fit requires positive values (point " + std::to_string(i) + ")");
        if (i > 0)
            require(xs[i] > xs[i - 1], ErrorKind::InvalidArgument, "xs must be strictly increasing");
    }
    SlopeFit fit;
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        fit.points.emplace_back(std::log(xs[i]), std::log(ys[i]));
        mx += fit.points.back().first;
        my += fit.points.back().second;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [lx, ly] : fit.points) {
        sxy += (lx - mx) * (ly - my);
        sxx += (lx - mx) * (lx - mx);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

/// |top-k(scores) ∩ positives| / |positives|; score ties favour the smaller index.
inline double recall_at_k(const std::vector<double>& scores, const std::vector<Index>& positives,
                          Index k) {
    require(!positives.empty(), ErrorKind::EmptyPositives, "recall@k needs at least one positive");
    require(k >= 1, ErrorKind::InvalidArgument, "k must be >= 1");
    std::vector<Index> order(scores.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return scores[a] > scores[b]; });
    const std::set<Index> pos(positives.begin(), positives.end());
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) hits += pos.count(order[i]);
    return static_cast<double>(hits) / static_cast<double>(pos.size());
}

}  // namespace jdr
