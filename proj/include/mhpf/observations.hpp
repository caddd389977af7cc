#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynamics.hpp"
#include "error.hpp"
#include "filtration.hpp"
#include "geometry.hpp"
#include "kdtree.hpp"
#include "particle.hpp"
#include "random.hpp"

namespace mhpf {

enum class ObsMode {
    mixed_random,             // fine every step, coarse with probability coarse_prob
    fine_lead_in_then_coarse, // fine during the lead-in, then coarse only
};

struct ObsConfig {
    double psi = 0.01;                // noise as a fraction of the corpus bounding-box diagonal
    std::size_t n_coarse_samples = 10;
    double coarse_prob = 0.5;
    std::optional<double> coarse_level; // defaults to default_coarse_level(tree)
    double lead_in_fraction = 0.05;
    ObsMode mode = ObsMode::mixed_random;
    NoiseMode fine_noise = NoiseMode::one_sided;
    bool coarse_replaces_fine = false;

    void validate() const
    {
        if (!(psi >= 0.0)) {
            throw invalid_input("psi must be >= 0");
        }
        if (n_coarse_samples < 1) {
            throw invalid_input("coarse observations need at least one sample");
        }
        if (!(coarse_prob >= 0.0 && coarse_prob <= 1.0) || !(lead_in_fraction >= 0.0 && lead_in_fraction <= 1.0)) {
            throw invalid_input("observation fractions must lie in [0, 1]");
        }
        if (coarse_level && !(*coarse_level >= 0.0)) {
            throw invalid_input("coarse level must be >= 0");
        }
    }
};

/// Diagonal of the axis-aligned bounding box of all points.
inline double bounding_diagonal(std::span<const Trajectory> ts)
{
    if (ts.empty() || ts.front().empty()) {
        throw invalid_input("bounding_diagonal: no points");
    }
    const std::size_t dim = ts.front().dim();
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& t : ts) {
        for (const auto& p : t.points) {
            for (std::size_t k = 0; k < dim; ++k) {
                lo[k] = std::min(lo[k], p[k]);
                hi[k] = std::max(hi[k], p[k]);
            }
        }
    }
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        sq += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    }
    return std::sqrt(sq);
}

/// Level whose alive-class count is closest to half the leaf count (smaller level on ties).
inline double default_coarse_level(const ClusterTree& tree)
{
    const double target = static_cast<double>(tree.leaf_count()) / 2.0;
    double best_level = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (double b : tree.levels()) {
        const double gap = std::abs(static_cast<double>(tree.alive_at(b).size()) - target);
        if (gap < best_gap) {
            best_gap = gap;
            best_level = b;
        }
    }
    return best_level;
}

/// Fine observation: z plus per-coordinate uniform noise of width psi * scale.
inline FineObservation gen_fine(const Point& z, double psi, double scale, Rng& rng,
                                NoiseMode noise = NoiseMode::one_sided)
{
    if (!(psi >= 0.0)) {
        throw invalid_input("gen_fine: psi must be >= 0");
    }
    Point out = z;
    const double width = psi * scale;
    for (std::size_t k = 0; k < out.dim(); ++k) {
        const double u = rng.uniform();
        out[k] += noise == NoiseMode::one_sided ? u * width : (u - 0.5) * width;
    }
    return {std::move(out)};
}

/**
 * Produces coarse observations at one tree level. A class is scored by the
 * Gaussian likelihood of the noisy samples under a kernel centred on the
 * class's nearest trajectory point; since the bandwidth is shared the argmax
 * is the class with the smallest sum of squared nearest-point distances.
 */
class CoarseObserver {
public:
    CoarseObserver(std::shared_ptr<const ClusterTree> tree, std::span<const Trajectory> trajectories, double level)
        : tree_(std::move(tree)), level_(level)
    {
        if (trajectories.size() != tree_->leaf_count()) {
            throw invalid_input("coarse observer: trajectory count differs from leaf count");
        }
        classes_ = tree_->alive_at(level);
        dim_ = trajectories.front().dim();
        auto coords = std::make_shared<std::vector<double>>();
        std::vector<std::size_t> begin{0};
        for (const auto& t : trajectories) {
            for (const auto& p : t.points) {
                coords->insert(coords->end(), p.coords().begin(), p.coords().end());
            }
            begin.push_back(coords->size() / dim_);
        }
        for (NodeId c : classes_) {
            std::vector<KdTree::Index> ids;
            for (std::size_t leaf : tree_->node(c).members) {
                for (std::size_t i = begin[leaf]; i < begin[leaf + 1]; ++i) {
                    ids.push_back(static_cast<KdTree::Index>(i));
                }
            }
            indices_.emplace_back(coords, dim_, std::move(ids));
        }
    }

    [[nodiscard]] double level() const noexcept { return level_; }
    [[nodiscard]] const std::vector<NodeId>& classes() const noexcept { return classes_; }

    /// Alive class minimizing the summed squared nearest-point distance of `samples`.
    [[nodiscard]] NodeId classify(std::span<const Point> samples) const
    {
        std::size_t best = 0;
        double best_score = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            double score = 0.0;
            for (const auto& s : samples) {
                score += indices_[k].nearest(s.coords()).second;
            }
            if (score < best_score) {
                best_score = score;
                best = k;
            }
        }
        return classes_[best];
    }

    /// Draws n points from N(z, (psi * scale)^2 I) and returns the best-scoring class.
    CoarseObservation observe(const Point& z, double psi, double scale, std::size_t n, Rng& rng) const
    {
        if (n < 1 || !(psi >= 0.0)) {
            throw invalid_input("coarse observation needs n >= 1 and psi >= 0");
        }
        const double sigma = psi * scale;
        std::vector<Point> samples;
        samples.reserve(n);
        for (std::size_t s = 0; s < n; ++s) {
            Point p = z;
            for (std::size_t k = 0; k < p.dim(); ++k) {
                p[k] += sigma * rng.normal();
            }
            samples.push_back(std::move(p));
        }
        return {classify(samples), level_};
    }

private:
    std::shared_ptr<const ClusterTree> tree_;
    double level_ = 0.0;
    std::size_t dim_ = 0;
    std::vector<NodeId> classes_;
    std::vector<KdTree> indices_;
};

inline CoarseObservation gen_coarse(const Point& z, double psi, std::shared_ptr<const ClusterTree> tree,
                                    std::span<const Trajectory> trajectories, double level, std::size_t n, Rng& rng)
{
    const double scale = bounding_diagonal(trajectories);
    return CoarseObserver(std::move(tree), trajectories, level).observe(z, psi, scale, n, rng);
}

/// Observations per time step for a ground-truth path; step t observes truth[t].
inline std::vector<std::vector<Observation>> generate_stream(std::span<const Point> truth, const ObsConfig& cfg,
                                                             const CoarseObserver& observer, double scale, Rng rng)
{
    cfg.validate();
    std::vector<std::vector<Observation>> out(truth.size());
    const auto lead_steps =
        static_cast<std::size_t>(std::ceil(cfg.lead_in_fraction * static_cast<double>(truth.size())));
    for (std::size_t t = 0; t < truth.size(); ++t) {
        Rng step = rng.split(t);
        const bool coarse_draw = step.uniform() < cfg.coarse_prob;
        bool fine = true;
        bool coarse = false;
        if (cfg.mode == ObsMode::mixed_random) {
            coarse = coarse_draw;
            fine = !(coarse && cfg.coarse_replaces_fine);
        } else if (t >= lead_steps) {
            fine = false;
            coarse = coarse_draw;
        }
        if (fine) {
            out[t].emplace_back(gen_fine(truth[t], cfg.psi, scale, step, cfg.fine_noise));
        }
        if (coarse) {
            out[t].emplace_back(observer.observe(truth[t], cfg.psi, scale, cfg.n_coarse_samples, step));
        }
    }
    return out;
}

// Observation stream records: {"t", "kind": "fine"|"coarse", "position" | "class_id" + "level"}

inline nlohmann::json to_json(const Observation& obs, std::size_t t)
{
    if (const auto* fine = std::get_if<FineObservation>(&obs)) {
        return {{"t", t},
                {"kind", "fine"},
                {"position", std::vector<double>(fine->position.coords().begin(), fine->position.coords().end())}};
    }
    const auto& coarse = std::get<CoarseObservation>(obs);
    return {{"t", t}, {"kind", "coarse"}, {"class_id", index(coarse.cls)}, {"level", coarse.level}};
}

inline void write_observations(std::ostream& out, const std::vector<std::vector<Observation>>& stream)
{
    for (std::size_t t = 0; t < stream.size(); ++t) {
        for (const auto& obs : stream[t]) {
            out << to_json(obs, t).dump() << '\n';
        }
    }
}

inline std::vector<std::vector<Observation>> read_observations(std::istream& in)
{
    std::vector<std::vector<Observation>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            const auto t = j.at("t").get<std::size_t>();
            if (out.size() <= t) {
                out.resize(t + 1);
            }
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "fine") {
                out[t].emplace_back(FineObservation{Point(j.at("position").get<std::vector<double>>())});
            } else if (kind == "coarse") {
                out[t].emplace_back(
                    CoarseObservation{node_id(j.at("class_id").get<std::size_t>()), j.at("level").get<double>()});
            } else {
                throw invalid_input("unknown observation kind '" + kind + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw invalid_input("observation line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace mhpf
