#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace mhpf {

/**
 * Static k-d tree over a subset of points stored in a shared flat coordinate
 * buffer. The tree is implicit: the id array is ordered so that each range's
 * median is the splitting element and split_dim_ records its axis.
 *
 * Queries are exact.
 */
class KdTree {
public:
    using Index = std::uint32_t;

    KdTree() = default;

    KdTree(std::shared_ptr<const std::vector<double>> coords, std::size_t dim, std::vector<Index> ids)
        : coords_(std::move(coords)), dim_(dim), ids_(std::move(ids)), split_dim_(ids_.size(), 0)
    {
        build(0, ids_.size());
    }

    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::span<const Index> ids() const noexcept { return ids_; }

    [[nodiscard]] std::span<const double> point(Index id) const noexcept
    {
        return {coords_->data() + static_cast<std::size_t>(id) * dim_, dim_};
    }

    /// Calls visit(id, squared_distance) for every point strictly within `radius` of q.
    template <typename Visitor>
    void radius_visit(std::span<const double> q, double radius, Visitor&& visit) const
    {
        if (ids_.empty() || !(radius > 0.0)) {
            return;
        }
        radius_rec(q, radius * radius, 0, ids_.size(), visit);
    }

    /// Nearest point id and its squared distance; ties go to the smaller id.
    [[nodiscard]] std::pair<Index, double> nearest(std::span<const double> q) const
    {
        std::pair<Index, double> best{std::numeric_limits<Index>::max(), std::numeric_limits<double>::infinity()};
        if (!ids_.empty()) {
            nearest_rec(q, 0, ids_.size(), best);
        }
        return best;
    }

private:
    static constexpr std::size_t leaf_size = 8;

    void build(std::size_t lo, std::size_t hi)
    {
        if (hi - lo <= leaf_size) {
            return;
        }
        std::size_t axis = 0;
        double widest = -1.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            double mn = std::numeric_limits<double>::infinity();
            double mx = -mn;
            for (std::size_t i = lo; i < hi; ++i) {
                const double v = point(ids_[i])[k];
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mx - mn > widest) {
                widest = mx - mn;
                axis = k;
            }
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(ids_.begin() + static_cast<std::ptrdiff_t>(lo), ids_.begin() + static_cast<std::ptrdiff_t>(mid),
                         ids_.begin() + static_cast<std::ptrdiff_t>(hi), [&](Index a, Index b) {
                             const double va = point(a)[axis];
                             const double vb = point(b)[axis];
                             return va < vb || (va == vb && a < b);
                         });
        split_dim_[mid] = static_cast<std::uint8_t>(axis);
        build(lo, mid);
        build(mid + 1, hi);
    }

    template <typename Visitor>
    void radius_rec(std::span<const double> q, double r2, std::size_t lo, std::size_t hi, Visitor& visit) const
    {
        if (hi - lo <= leaf_size) {
            for (std::size_t i = lo; i < hi; ++i) {
                const double d2 = squared_distance(q, point(ids_[i]));
                if (d2 < r2) {
                    visit(ids_[i], d2);
                }
            }
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t axis = split_dim_[mid];
        const double diff = q[axis] - point(ids_[mid])[axis];
        const double d2 = squared_distance(q, point(ids_[mid]));
        if (d2 < r2) {
            visit(ids_[mid], d2);
        }
        if (diff <= 0.0 || diff * diff < r2) {
            radius_rec(q, r2, lo, mid, visit);
        }
        if (diff >= 0.0 || diff * diff < r2) {
            radius_rec(q, r2, mid + 1, hi, visit);
        }
    }

    void nearest_rec(std::span<const double> q, std::size_t lo, std::size_t hi, std::pair<Index, double>& best) const
    {
        auto consider = [&](Index id) {
            const double d2 = squared_distance(q, point(id));
            if (d2 < best.second || (d2 == best.second && id < best.first)) {
                best = {id, d2};
            }
        };
        if (hi - lo <= leaf_size) {
            for (std::size_t i = lo; i < hi; ++i) {
                consider(ids_[i]);
            }
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t axis = split_dim_[mid];
        const double diff = q[axis] - point(ids_[mid])[axis];
        consider(ids_[mid]);
        const bool left_first = diff <= 0.0;
        const auto near = left_first ? std::pair{lo, mid} : std::pair{mid + 1, hi};
        const auto far = left_first ? std::pair{mid + 1, hi} : std::pair{lo, mid};
        nearest_rec(q, near.first, near.second, best);
        if (diff * diff <= best.second) {
            nearest_rec(q, far.first, far.second, best);
        }
    }

    std::shared_ptr<const std::vector<double>> coords_;
    std::size_t dim_ = 0;
    std::vector<Index> ids_;
    std::vector<std::uint8_t> split_dim_;
};

} // namespace mhpf
