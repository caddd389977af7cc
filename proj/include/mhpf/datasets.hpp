#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace mhpf {

/**
 * Resamples a polyline to n points spaced uniformly in arc length. The first
 * and last points are copied exactly.
 */
inline Trajectory discretize_uniform(const Trajectory& t, std::size_t n_points)
{
    validate(t);
    if (n_points < 2) {
        throw invalid_input("discretize_uniform: need at least 2 points");
    }
    std::vector<double> cumulative{0.0};
    for (std::size_t i = 1; i < t.points.size(); ++i) {
        cumulative.push_back(cumulative.back() + euclidean(t.points[i - 1], t.points[i]));
    }
    const double total = cumulative.back();
    if (!(total > 0.0)) {
        throw invalid_input("discretize_uniform: trajectory '" + t.id + "' has zero length");
    }
    Trajectory out{t.id, {}};
    out.points.reserve(n_points);
    out.points.push_back(t.points.front());
    std::size_t seg = 1;
    for (std::size_t k = 1; k + 1 < n_points; ++k) {
        const double target = total * static_cast<double>(k) / static_cast<double>(n_points - 1);
        while (seg + 1 < cumulative.size() && cumulative[seg] < target) {
            ++seg;
        }
        const double len = cumulative[seg] - cumulative[seg - 1];
        const double f = len > 0.0 ? (target - cumulative[seg - 1]) / len : 0.0;
        const Point& a = t.points[seg - 1];
        const Point& b = t.points[seg];
        Point p(a.dim());
        for (std::size_t d = 0; d < a.dim(); ++d) {
            p[d] = a[d] + f * (b[d] - a[d]);
        }
        out.points.push_back(std::move(p));
    }
    out.points.push_back(t.points.back());
    return out;
}

inline Trajectory polyline(std::string id, std::initializer_list<std::pair<double, double>> pts)
{
    Trajectory t{std::move(id), {}};
    for (auto [x, y] : pts) {
        t.points.push_back(Point{x, y});
    }
    return t;
}

/**
 * Y-junction corpus: every trajectory runs up a shared stem, then follows one
 * of n_branches diverging arms. Each point is jittered uniformly in
 * [-jitter, jitter] per coordinate.
 */
inline std::vector<Trajectory> gen_junction(std::size_t n_branches, std::size_t per_branch, double jitter, Rng& rng,
                                            std::size_t n_points = 50)
{
    if (n_branches < 2) {
        throw invalid_input("gen_junction: need at least 2 branches");
    }
    if (!(jitter >= 0.0)) {
        throw invalid_input("gen_junction: jitter must be >= 0");
    }
    std::vector<Trajectory> out;
    const double spread = std::numbers::pi / 3.0; // arms fan over +-60 degrees
    for (std::size_t b = 0; b < n_branches; ++b) {
        const double angle =
            -spread + 2.0 * spread * static_cast<double>(b) / static_cast<double>(n_branches - 1);
        const double ex = 10.0 * std::sin(angle);
        const double ey = 10.0 + 10.0 * std::cos(angle);
        const auto base = discretize_uniform(polyline("", {{0.0, 0.0}, {0.0, 10.0}, {ex, ey}}), n_points);
        for (std::size_t k = 0; k < per_branch; ++k) {
            Trajectory t{"junction-" + std::to_string(b) + "-" + std::to_string(k), base.points};
            if (jitter > 0.0) {
                for (auto& p : t.points) {
                    for (std::size_t d = 0; d < p.dim(); ++d) {
                        p[d] += rng.uniform(-jitter, jitter);
                    }
                }
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

/**
 * Trajectories sharing the start (0,0) and end (10,0) exactly, bending
 * around the straight line with varied amplitude and shape.
 */
inline std::vector<Trajectory> gen_fixed_endpoints(std::size_t n, Rng& rng, std::size_t n_points = 100)
{
    static constexpr std::array<double, 4> centers{-3.0, -1.2, 1.2, 3.0};
    std::vector<Trajectory> out;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = centers[k % centers.size()] + rng.uniform(-0.4, 0.4);
        const double b = rng.uniform(-0.6, 0.6);
        Trajectory dense{"endpoints-" + std::to_string(k), {}};
        constexpr std::size_t samples = 400;
        for (std::size_t i = 0; i <= samples; ++i) {
            const double s = static_cast<double>(i) / samples;
            double y = a * std::sin(std::numbers::pi * s) + b * std::sin(2.0 * std::numbers::pi * s);
            if (i == 0 || i == samples) {
                y = 0.0;
            }
            dense.points.push_back(Point{10.0 * s, y});
        }
        out.push_back(discretize_uniform(dense, n_points));
    }
    return out;
}

struct Rect {
    double x0, y0, x1, y1;

    [[nodiscard]] bool contains(const Point& p, double margin = 0.0) const noexcept
    {
        return p[0] > x0 - margin && p[0] < x1 + margin && p[1] > y0 - margin && p[1] < y1 + margin;
    }
};

inline const std::vector<Rect>& obstacle_layout()
{
    static const std::vector<Rect> rects{
        {4.0, 4.0, 8.0, 9.0}, {12.0, 3.0, 16.0, 7.0}, {6.0, 12.0, 10.0, 16.0}, {13.0, 11.0, 17.0, 15.0}};
    return rects;
}

/**
 * Routes through a 20x20 world with four rectangular obstacles. Trajectories
 * belong to route families (cycled by index) whose waypoints are perturbed;
 * a candidate is redrawn while any densely sampled point touches an obstacle.
 */
inline std::vector<Trajectory> gen_obstacle_world(std::size_t n, Rng& rng, std::size_t n_points = 100,
                                                  std::size_t max_retries = 500)
{
    using Path = std::vector<std::pair<double, double>>;
    static const std::vector<Path> families{
        {{1.0, 10.0}, {19.0, 10.0}},
        {{11.0, 1.0}, {11.0, 19.0}},
        {{1.0, 1.5}, {11.0, 1.5}, {11.0, 18.0}, {19.0, 18.0}},
        {{1.0, 18.0}, {11.0, 18.0}, {11.0, 10.0}, {19.0, 10.0}},
        {{2.0, 2.0}, {2.0, 18.0}, {19.0, 18.5}},
        {{1.0, 10.0}, {11.0, 10.0}, {11.0, 1.5}, {19.0, 1.5}},
    };
    const auto& obstacles = obstacle_layout();
    std::vector<Trajectory> out;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& family = families[k % families.size()];
        bool placed = false;
        for (std::size_t attempt = 0; attempt < max_retries && !placed; ++attempt) {
            Trajectory t{"obstacles-" + std::to_string(k), {}};
            for (auto [x, y] : family) {
                t.points.push_back(Point{x + rng.uniform(-0.8, 0.8), y + rng.uniform(-0.8, 0.8)});
            }
            const auto dense = discretize_uniform(t, 400);
            bool clear = true;
            for (const auto& p : dense.points) {
                for (const auto& r : obstacles) {
                    clear = clear && !r.contains(p, 0.1);
                }
            }
            if (clear) {
                out.push_back(discretize_uniform(t, n_points));
                placed = true;
            }
        }
        if (!placed) {
            throw construction_error("gen_obstacle_world: no collision-free route for trajectory " + std::to_string(k));
        }
    }
    return out;
}

/// Row-major grid of non-negative densities; cell (x, y) is cells[y * width + x].
struct DensityGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> cells;

    [[nodiscard]] double at(std::size_t x, std::size_t y) const { return cells.at(y * width + x); }
    double& at(std::size_t x, std::size_t y) { return cells.at(y * width + x); }

    void validate() const
    {
        if (width == 0 || height == 0 || cells.size() != width * height) {
            throw invalid_input("density grid dimensions do not match its cell count");
        }
        bool positive = false;
        for (double c : cells) {
            if (!(c >= 0.0) || !std::isfinite(c)) {
                throw invalid_input("density grid cells must be finite and non-negative");
            }
            positive = positive || c > 0.0;
        }
        if (!positive) {
            throw invalid_input("density grid has no positive cell");
        }
    }
};

/// Reads "width height" followed by row-major values, or an 8-bit PGM (P2/P5; density = pixel / 255).
inline DensityGrid read_grid(std::istream& in)
{
    DensityGrid g;
    auto next_token = [&in]() {
        std::string tok;
        while (in >> tok) {
            if (tok.front() == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw invalid_input("density grid: unexpected end of input");
    };
    std::string first = next_token();
    if (first == "P2" || first == "P5") {
        g.width = std::stoul(next_token());
        g.height = std::stoul(next_token());
        const auto maxval = std::stoul(next_token());
        if (maxval == 0 || maxval > 255) {
            throw invalid_input("density grid: only 8-bit PGM is supported");
        }
        g.cells.resize(g.width * g.height);
        if (first == "P2") {
            for (auto& c : g.cells) {
                c = std::stod(next_token()) / 255.0;
            }
        } else {
            in.get(); // single whitespace before the raster
            for (auto& c : g.cells) {
                const int byte = in.get();
                if (byte == std::char_traits<char>::eof()) {
                    throw invalid_input("density grid: truncated PGM raster");
                }
                c = static_cast<double>(byte) / 255.0;
            }
        }
    } else {
        try {
            g.width = std::stoul(first);
            g.height = std::stoul(next_token());
            g.cells.resize(g.width * g.height);
            for (auto& c : g.cells) {
                c = std::stod(next_token());
            }
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const invalid_input*>(&e)) {
                throw;
            }
            throw invalid_input(std::string("density grid: malformed number: ") + e.what());
        }
    }
    g.validate();
    return g;
}

inline void write_grid(std::ostream& out, const DensityGrid& g)
{
    const auto precision = out.precision(17);
    out << g.width << ' ' << g.height << '\n';
    for (std::size_t y = 0; y < g.height; ++y) {
        for (std::size_t x = 0; x < g.width; ++x) {
            out << (x ? " " : "") << g.at(x, y);
        }
        out << '\n';
    }
    out.precision(precision);
}

struct Cell {
    std::size_t x = 0;
    std::size_t y = 0;
};

struct WalkConfig {
    std::size_t n_trajectories = 194;
    std::size_t max_steps = 120;
    double direction_persistence = 0.8;
    double density_exponent = 1.0;
    std::vector<Cell> starts;
    std::size_t n_points = 100; // 0 keeps the raw cell path

    void validate() const
    {
        if (n_trajectories < 1) {
            throw invalid_input("walk config: need at least one trajectory");
        }
        if (!(direction_persistence >= 0.0 && direction_persistence <= 1.0)) {
            throw invalid_input("walk config: direction persistence must lie in [0, 1]");
        }
        if (!(density_exponent >= 0.0)) {
            throw invalid_input("walk config: density exponent must be >= 0");
        }
        if (starts.empty()) {
            throw invalid_input("walk config: no start cells");
        }
    }
};

/**
 * Weighted random walks over the 8-neighbourhood. A move's weight is
 * density^exponent times p for continuing the previous heading or (1 - p)
 * for turning; reversing is not allowed. If only the blocked continuation
 * carried weight, the turn weights fall back to density alone. Walks stop at
 * max_steps or a dead end. Start cells are used round-robin.
 */
inline std::vector<Trajectory> walk_from_density(const DensityGrid& grid, const WalkConfig& cfg, Rng& rng)
{
    grid.validate();
    cfg.validate();
    static constexpr std::array<std::pair<int, int>, 8> moves{
        {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
    for (const auto& s : cfg.starts) {
        if (s.x >= grid.width || s.y >= grid.height || grid.at(s.x, s.y) <= 0.0) {
            throw invalid_input("walk start (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                                ") is outside the grid or has zero density");
        }
    }
    std::vector<Trajectory> out;
    for (std::size_t k = 0; k < cfg.n_trajectories; ++k) {
        const Cell start = cfg.starts[k % cfg.starts.size()];
        long x = static_cast<long>(start.x);
        long y = static_cast<long>(start.y);
        int heading = -1;
        Trajectory t{"walk-" + std::to_string(k), {Point{static_cast<double>(x), static_cast<double>(y)}}};
        for (std::size_t step = 0; step < cfg.max_steps; ++step) {
            std::array<double, 8> weights{};
            std::array<double, 8> plain{};
            double total = 0.0;
            double plain_total = 0.0;
            for (int m = 0; m < 8; ++m) {
                if (heading >= 0 && m == (heading + 4) % 8) {
                    continue;
                }
                const long nx = x + moves[m].first;
                const long ny = y + moves[m].second;
                if (nx < 0 || ny < 0 || nx >= static_cast<long>(grid.width) || ny >= static_cast<long>(grid.height)) {
                    continue;
                }
                const double dens = grid.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));
                if (dens <= 0.0) {
                    continue;
                }
                plain[m] = std::pow(dens, cfg.density_exponent);
                double bias = 1.0;
                if (heading >= 0) {
                    bias = m == heading ? cfg.direction_persistence : 1.0 - cfg.direction_persistence;
                }
                weights[m] = plain[m] * bias;
                total += weights[m];
                plain_total += plain[m];
            }
            if (plain_total <= 0.0) {
                break;
            }
            const auto& use = total > 0.0 ? weights : plain;
            double u = rng.uniform() * (total > 0.0 ? total : plain_total);
            int choice = -1;
            for (int m = 0; m < 8; ++m) {
                if (use[m] <= 0.0) {
                    continue;
                }
                choice = m;
                if (u < use[m]) {
                    break;
                }
                u -= use[m];
            }
            x += moves[choice].first;
            y += moves[choice].second;
            heading = choice;
            t.points.push_back(Point{static_cast<double>(x), static_cast<double>(y)});
        }
        if (t.points.size() < 2) {
            throw invalid_input("walk from start (" + std::to_string(start.x) + "," + std::to_string(start.y) +
                                ") could not move");
        }
        out.push_back(cfg.n_points >= 2 ? discretize_uniform(t, cfg.n_points) : std::move(t));
    }
    return out;
}

/// Harbour-like density raster: shipping lanes converging on a port, plus their start cells.
struct HarbourWorld {
    DensityGrid grid;
    std::vector<Cell> starts;
};

inline HarbourWorld gen_harbour_grid(Rng& rng, std::size_t width = 80, std::size_t height = 60)
{
    using Path = std::vector<std::pair<double, double>>;
    const double w = static_cast<double>(width);
    const double h = static_cast<double>(height);
    const std::pair port{0.9 * w, 0.5 * h};
    std::vector<Path> lanes{
        {{1.0, 0.15 * h}, {0.4 * w, 0.25 * h}, port},
        {{1.0, 0.5 * h}, {0.5 * w, 0.45 * h}, port},
        {{1.0, 0.85 * h}, {0.45 * w, 0.75 * h}, port},
        {{0.3 * w, 1.0}, {0.55 * w, 0.3 * h}, port},
        {{0.35 * w, h - 2.0}, {0.6 * w, 0.7 * h}, port},
    };
    for (auto& lane : lanes) {
        lane[1].first += rng.uniform(-0.05 * w, 0.05 * w);
        lane[1].second += rng.uniform(-0.05 * h, 0.05 * h);
    }
    HarbourWorld world;
    world.grid = DensityGrid{width, height, std::vector<double>(width * height, 0.0)};
    auto seg_dist = [](double px, double py, std::pair<double, double> a, std::pair<double, double> b) {
        const double vx = b.first - a.first;
        const double vy = b.second - a.second;
        const double len2 = vx * vx + vy * vy;
        double f = len2 > 0.0 ? ((px - a.first) * vx + (py - a.second) * vy) / len2 : 0.0;
        f = std::clamp(f, 0.0, 1.0);
        const double dx = px - (a.first + f * vx);
        const double dy = py - (a.second + f * vy);
        return std::sqrt(dx * dx + dy * dy);
    };
    constexpr double lane_width = 2.0;
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double best = 0.0;
            for (const auto& lane : lanes) {
                for (std::size_t s = 1; s < lane.size(); ++s) {
                    const double d = seg_dist(static_cast<double>(x), static_cast<double>(y), lane[s - 1], lane[s]);
                    best = std::max(best, std::exp(-d * d / (2.0 * lane_width * lane_width)));
                }
            }
            world.grid.at(x, y) = best < 0.05 ? 0.0 : best;
        }
    }
    for (const auto& lane : lanes) {
        world.starts.push_back(Cell{static_cast<std::size_t>(std::lround(lane.front().first)),
                                    static_cast<std::size_t>(std::lround(lane.front().second))});
    }
    return world;
}

} // namespace mhpf
