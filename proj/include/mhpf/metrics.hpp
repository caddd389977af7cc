#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "filter_stack.hpp"
#include "filtration.hpp"
#include "geometry.hpp"

namespace mhpf {

/// Squared Euclidean error between a predicted and a true position.
inline double mse(const Point& pred, const Point& truth)
{
    if (pred.dim() != truth.dim()) {
        throw invalid_input("mse: dimension mismatch");
    }
    return squared_distance(pred.coords(), truth.coords());
}

/// Tree class distance from a predicted class to the truth leaf's ancestor alive at b.
inline double map_tree_distance(const ClusterTree& tree, NodeId predicted, NodeId truth_leaf, double b)
{
    return tree.class_distance(predicted, tree.ancestor_alive_at(truth_leaf, b));
}

inline double map_tree_distance(const FilterStack& stack, NodeId truth_leaf, double b)
{
    return map_tree_distance(stack.tree(), stack.map_class(b), truth_leaf, b);
}

/**
 * First step from which every remaining distance is within
 * threshold_fraction * scale; nullopt if the last one is not.
 */
inline std::optional<std::size_t> convergence_time(std::span<const double> series, double scale,
                                                   double threshold_fraction = 0.33)
{
    const double threshold = threshold_fraction * scale;
    std::optional<std::size_t> since;
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (series[t] <= threshold) {
            if (!since) {
                since = t;
            }
        } else {
            since.reset();
        }
    }
    return since;
}

inline double mean(std::span<const double> xs)
{
    if (xs.empty()) {
        return 0.0;
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double stddev(std::span<const double> xs)
{
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/**
 * Two-sided Wilcoxon rank-sum (Mann-Whitney U) test, normal approximation
 * with tie and continuity corrections. Returns 1 when either sample is empty
 * or every value is tied.
 */
inline double rank_sum_p_value(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n1 = x.size();
    const std::size_t n2 = y.size();
    if (n1 == 0 || n2 == 0) {
        return 1.0;
    }
    struct Item {
        double value;
        bool first;
    };
    std::vector<Item> all;
    for (double v : x) {
        all.push_back({v, true});
    }
    for (double v : y) {
        all.push_back({v, false});
    }
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.value < b.value; });
    const double n = static_cast<double>(n1 + n2);
    double rank_sum = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) {
            ++j;
        }
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        const double ties = static_cast<double>(j - i);
        tie_term += ties * ties * ties - ties;
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].first) {
                rank_sum += avg_rank;
            }
        }
        i = j;
    }
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    const double u = rank_sum - a * (a + 1.0) / 2.0;
    const double mu = a * b / 2.0;
    const double var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) {
        return 1.0;
    }
    const double z = (std::abs(u - mu) - 0.5) / std::sqrt(var);
    if (z <= 0.0) {
        return 1.0;
    }
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

} // namespace mhpf
