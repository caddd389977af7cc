#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "filter_stack.hpp"

namespace mhpf {

/**
 * Per-step export: {"t", "levels": [{"b", "classes": [{"id", "prob"}]}],
 * "point_estimate", "map_class": [{"b", "id"}]}.
 */
inline nlohmann::json snapshot(const FilterStack& stack, std::span<const double> levels,
                               std::span<const double> map_levels)
{
    nlohmann::json jl = nlohmann::json::array();
    for (double b : levels) {
        nlohmann::json classes = nlohmann::json::array();
        for (NodeId c : stack.tree().alive_at(b)) {
            classes.push_back({{"id", index(c)}, {"prob", stack.probability(c)}});
        }
        jl.push_back({{"b", b}, {"classes", std::move(classes)}});
    }
    nlohmann::json jm = nlohmann::json::array();
    for (double b : map_levels) {
        jm.push_back({{"b", b}, {"id", index(stack.map_class(b))}});
    }
    const auto pe = stack.point_estimate();
    return {{"t", stack.time()},
            {"levels", std::move(jl)},
            {"point_estimate", std::vector<double>(pe.coords().begin(), pe.coords().end())},
            {"map_class", std::move(jm)}};
}

inline nlohmann::json snapshot(const FilterStack& stack)
{
    const auto levels = stack.tree().levels();
    return snapshot(stack, levels, levels);
}

} // namespace mhpf
