#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mhpf {

/// A point in R^d.
class Point {
public:
    Point() = default;
    explicit Point(std::size_t dim, double value = 0.0) : coords_(dim, value) {}
    Point(std::initializer_list<double> coords) : coords_(coords) {}
    explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {}
    explicit Point(std::span<const double> coords) : coords_(coords.begin(), coords.end()) {}

    [[nodiscard]] std::size_t dim() const noexcept { return coords_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return coords_[i]; }
    double& operator[](std::size_t i) noexcept { return coords_[i]; }
    [[nodiscard]] const double* data() const noexcept { return coords_.data(); }
    [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }

    [[nodiscard]] bool finite() const noexcept
    {
        return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
    }

    Point& operator+=(const Point& other) noexcept
    {
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            coords_[i] += other.coords_[i];
        }
        return *this;
    }

    friend Point operator+(Point a, const Point& b) noexcept { return a += b; }

    friend Point operator-(const Point& a, const Point& b)
    {
        Point out(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) {
            out[i] = a[i] - b[i];
        }
        return out;
    }

    friend Point operator*(double s, Point p) noexcept
    {
        for (auto& v : p.coords_) {
            v *= s;
        }
        return p;
    }

    friend bool operator==(const Point&, const Point&) = default;

private:
    std::vector<double> coords_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

inline double norm(const Point& p) noexcept
{
    double sum = 0.0;
    for (double v : p.coords()) {
        sum += v * v;
    }
    return std::sqrt(sum);
}

/// Euclidean (L2) distance. Throws invalid_input on dimension mismatch.
inline double euclidean(const Point& a, const Point& b)
{
    if (a.dim() != b.dim()) {
        throw invalid_input("euclidean: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()) + ")");
    }
    return std::sqrt(squared_distance(a.coords(), b.coords()));
}

struct Trajectory {
    std::string id;
    std::vector<Point> points;

    [[nodiscard]] std::size_t dim() const noexcept { return points.empty() ? 0 : points.front().dim(); }
    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] bool empty() const noexcept { return points.empty(); }
};

/// Checks non-emptiness, uniform dimension and finiteness of a trajectory.
inline void validate(const Trajectory& t)
{
    if (t.points.empty()) {
        throw invalid_input("trajectory '" + t.id + "' is empty");
    }
    const std::size_t dim = t.points.front().dim();
    if (dim == 0) {
        throw invalid_input("trajectory '" + t.id + "' has zero-dimensional points");
    }
    for (const auto& p : t.points) {
        if (p.dim() != dim) {
            throw invalid_input("trajectory '" + t.id + "' has ragged point dimensions");
        }
        if (!p.finite()) {
            throw invalid_input("trajectory '" + t.id + "' has non-finite coordinates");
        }
    }
}

inline double arc_length(const Trajectory& t)
{
    double total = 0.0;
    for (std::size_t i = 1; i < t.points.size(); ++i) {
        total += euclidean(t.points[i - 1], t.points[i]);
    }
    return total;
}

/**
 * Discrete Fréchet distance between two polylines.
 *
 * Standard coupling recurrence evaluated row by row; only two rows of length
 * min(|t1|, |t2|) are kept since the coupling itself is not needed.
 */
inline double frechet_distance(const Trajectory& t1, const Trajectory& t2)
{
    if (t1.empty() || t2.empty()) {
        throw invalid_input("frechet_distance: empty trajectory");
    }
    if (t1.dim() != t2.dim()) {
        throw invalid_input("frechet_distance: dimension mismatch between '" + t1.id + "' and '" + t2.id + "'");
    }
    const auto& rows = t1.size() >= t2.size() ? t1.points : t2.points;
    const auto& cols = t1.size() >= t2.size() ? t2.points : t1.points;
    const std::size_t n = cols.size();

    std::vector<double> prev(n), curr(n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = std::sqrt(squared_distance(rows[i].coords(), cols[j].coords()));
            if (i == 0 && j == 0) {
                curr[j] = d;
            } else if (i == 0) {
                curr[j] = std::max(curr[j - 1], d);
            } else if (j == 0) {
                curr[j] = std::max(prev[j], d);
            } else {
                curr[j] = std::max(std::min({prev[j], curr[j - 1], prev[j - 1]}), d);
            }
        }
        std::swap(prev, curr);
    }
    return prev[n - 1];
}

/// Dense symmetric matrix of pairwise distances.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t size) : size_(size), entries_(size * size, 0.0) {}

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * size_ + j]; }

    /// Sets both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double value) noexcept
    {
        entries_[i * size_ + j] = value;
        entries_[j * size_ + i] = value;
    }

    /// Throws invalid_input unless the matrix is symmetric, zero-diagonal, finite and non-negative.
    void validate() const
    {
        for (std::size_t i = 0; i < size_; ++i) {
            if ((*this)(i, i) != 0.0) {
                throw invalid_input("distance matrix has a non-zero diagonal at " + std::to_string(i));
            }
            for (std::size_t j = i + 1; j < size_; ++j) {
                const double v = (*this)(i, j);
                if (!std::isfinite(v) || v < 0.0) {
                    throw invalid_input("distance matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") is negative or non-finite");
                }
                if (v != (*this)(j, i)) {
                    throw invalid_input("distance matrix is not symmetric");
                }
            }
        }
    }

private:
    std::size_t size_ = 0;
    std::vector<double> entries_;
};

/**
 * All-pairs discrete Fréchet distances. Rows are distributed over up to
 * `threads` workers (0 = hardware concurrency); the result does not depend on
 * the worker count.
 */
inline DistanceMatrix distance_matrix(std::span<const Trajectory> trajectories, unsigned threads = 0)
{
    if (trajectories.empty()) {
        throw invalid_input("distance_matrix: no trajectories");
    }
    for (const auto& t : trajectories) {
        validate(t);
        if (t.dim() != trajectories.front().dim()) {
            throw invalid_input("distance_matrix: trajectories differ in dimension");
        }
    }
    const std::size_t m = trajectories.size();
    DistanceMatrix d(m);
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, m));

    auto work = [&](unsigned worker) {
        for (std::size_t i = worker; i < m; i += threads) {
            for (std::size_t j = i + 1; j < m; ++j) {
                d.set(i, j, frechet_distance(trajectories[i], trajectories[j]));
            }
        }
    };
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back(work, w);
        }
    }
    return d;
}

} // namespace mhpf
