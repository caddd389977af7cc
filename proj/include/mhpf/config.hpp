#pragma once

#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "datasets.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "observations.hpp"
#include "weighting.hpp"

namespace mhpf {

NLOHMANN_JSON_SERIALIZE_ENUM(DatasetKind, {{DatasetKind::junction, "junction"},
                                           {DatasetKind::fixed_endpoints, "fixed_endpoints"},
                                           {DatasetKind::obstacles, "obstacles"},
                                           {DatasetKind::density_walk, "density_walk"}})
NLOHMANN_JSON_SERIALIZE_ENUM(NoiseMode, {{NoiseMode::one_sided, "one_sided"}, {NoiseMode::centered, "centered"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ObsMode, {{ObsMode::mixed_random, "mixed_random"},
                                       {ObsMode::fine_lead_in_then_coarse, "fine_lead_in_then_coarse"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ResamplingScheme, {{ResamplingScheme::multinomial, "multinomial"},
                                                {ResamplingScheme::systematic, "systematic"}})

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where)
{
    if (!j.is_object()) {
        throw invalid_input(where + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw invalid_input(where + ": unknown key '" + key + "'");
        }
    }
}

// Enum lookups silently map unknown strings to the first enumerator; check the round trip.
template <class E>
E checked_enum(const nlohmann::json& j, const std::string& key)
{
    const E e = j.get<E>();
    if (nlohmann::json(e) != j) {
        throw invalid_input("'" + key + "' has unsupported value " + j.dump());
    }
    return e;
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out)
{
    if (!j.contains(key)) {
        return;
    }
    try {
        if constexpr (std::is_enum_v<T>) {
            out = checked_enum<T>(j.at(key), key);
        } else {
            out = j.at(key).get<T>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw invalid_input(std::string("'") + key + "': " + e.what());
    }
}

template <class T>
void read(const nlohmann::json& j, const char* key, std::optional<T>& out)
{
    if (j.contains(key) && !j.at(key).is_null()) {
        T v{};
        read(j, key, v);
        out = v;
    }
}

} // namespace detail

inline ObsVariant obs_variant_from_json(const nlohmann::json& j)
{
    detail::reject_unknown(j,
                           {"name", "n_coarse_samples", "coarse_prob", "coarse_level", "lead_in_fraction", "mode",
                            "fine_noise", "coarse_replaces_fine"},
                           "variant");
    ObsVariant v;
    v.obs.coarse_prob = 0.0;
    detail::read(j, "name", v.name);
    detail::read(j, "n_coarse_samples", v.obs.n_coarse_samples);
    detail::read(j, "coarse_prob", v.obs.coarse_prob);
    detail::read(j, "coarse_level", v.obs.coarse_level);
    detail::read(j, "lead_in_fraction", v.obs.lead_in_fraction);
    detail::read(j, "mode", v.obs.mode);
    detail::read(j, "fine_noise", v.obs.fine_noise);
    detail::read(j, "coarse_replaces_fine", v.obs.coarse_replaces_fine);
    if (v.name.empty() || v.name.find(',') != std::string::npos) {
        throw invalid_input("variant names must be non-empty and contain no commas");
    }
    return v;
}

/// Experiment configuration from JSON; absent keys keep their defaults, unknown keys are rejected.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j)
{
    detail::reject_unknown(
        j,
        {"dataset", "corpus_size", "points", "scenarios", "repeats", "kappas", "psis", "variants", "particles",
         "depletion", "resampling", "epsilon_floor", "epsilon", "coarse_level", "dynamics_noise", "eval_level",
         "convergence_fraction", "holdout", "run_bl2", "check_invariants", "seed", "threads", "junction_branches",
         "junction_jitter", "walk", "grid"},
        "experiment config");
    ExperimentConfig c;
    detail::read(j, "dataset", c.dataset);
    detail::read(j, "corpus_size", c.corpus_size);
    detail::read(j, "points", c.points);
    detail::read(j, "scenarios", c.scenarios);
    detail::read(j, "repeats", c.repeats);
    detail::read(j, "kappas", c.kappas);
    detail::read(j, "psis", c.psis);
    if (j.contains("variants")) {
        if (!j.at("variants").is_array()) {
            throw invalid_input("'variants' must be an array");
        }
        c.variants.clear();
        for (const auto& v : j.at("variants")) {
            c.variants.push_back(obs_variant_from_json(v));
        }
    }
    detail::read(j, "particles", c.filter.particles);
    detail::read(j, "depletion", c.filter.depletion);
    detail::read(j, "resampling", c.filter.resampling);
    detail::read(j, "epsilon_floor", c.epsilon_floor);
    detail::read(j, "epsilon", c.global_epsilon);
    detail::read(j, "coarse_level", c.coarse_level);
    detail::read(j, "dynamics_noise", c.dynamics_noise);
    detail::read(j, "eval_level", c.eval_level);
    detail::read(j, "convergence_fraction", c.convergence_fraction);
    detail::read(j, "holdout", c.holdout);
    detail::read(j, "run_bl2", c.run_bl2);
    detail::read(j, "check_invariants", c.check_invariants);
    detail::read(j, "seed", c.seed);
    detail::read(j, "threads", c.threads);
    detail::read(j, "junction_branches", c.junction_branches);
    detail::read(j, "junction_jitter", c.junction_jitter);
    if (j.contains("walk")) {
        const auto& w = j.at("walk");
        detail::reject_unknown(w, {"max_steps", "direction_persistence", "density_exponent"}, "walk");
        detail::read(w, "max_steps", c.walk.max_steps);
        detail::read(w, "direction_persistence", c.walk.direction_persistence);
        detail::read(w, "density_exponent", c.walk.density_exponent);
    }
    if (j.contains("grid")) {
        const auto path = j.at("grid").get<std::string>();
        std::ifstream in(path);
        if (!in) {
            throw invalid_input("cannot open density grid '" + path + "'");
        }
        c.grid = read_grid(in);
    }
    c.validate();
    return c;
}

} // namespace mhpf
