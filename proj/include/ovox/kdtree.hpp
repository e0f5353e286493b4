#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "vec.hpp"

namespace ovox {

struct NearestPoint {
    double distance_squared = std::numeric_limits<double>::infinity();
    std::uint32_t index = 0;
};

/// Static 3-d tree over a point set for exact nearest-neighbour queries.
/// Ties resolve to the lowest point index.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::span<const Vec3d> points) : points_(points.begin(), points.end()) {
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), 0u);
        if (!points_.empty()) {
            nodes_.reserve(2 * points_.size() / kLeafSize + 1);
            nodes_.emplace_back();
            build(0, 0, std::uint32_t(points_.size()), 0);
        }
    }

    std::size_t size() const { return points_.size(); }
    const Vec3d& point(std::size_t i) const { return points_[i]; }

    NearestPoint nearest(const Vec3d& q) const {
        NearestPoint best;
        if (nodes_.empty()) return best;
        std::uint32_t stack[128];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (node.box.distance_squared(q) > best.distance_squared) continue;
            if (node.count > 0) {
                for (std::uint32_t n = node.first; n < node.first + node.count; ++n) {
                    const std::uint32_t i = order_[n];
                    const double d = length_squared(q - points_[i]);
                    if (d < best.distance_squared || (d == best.distance_squared && i < best.index)) {
                        best.distance_squared = d;
                        best.index = i;
                    }
                }
                continue;
            }
            const double dl = nodes_[node.left].box.distance_squared(q);
            const double dr = nodes_[node.left + 1].box.distance_squared(q);
            if (dl <= dr) {
                stack[top++] = node.left + 1;
                stack[top++] = node.left;
            } else {
                stack[top++] = node.left;
                stack[top++] = node.left + 1;
            }
        }
        return best;
    }

private:
    struct Node {
        Aabbd box = Aabbd::empty();
        std::uint32_t left = 0, first = 0, count = 0;
    };

    void build(std::uint32_t idx, std::uint32_t first, std::uint32_t count, int depth) {
        Aabbd box = Aabbd::empty();
        for (std::uint32_t n = first; n < first + count; ++n) box.extend(points_[order_[n]]);
        nodes_[idx].box = box;
        const Vec3d ext = box.extent();
        if (count <= kLeafSize || depth >= 100 || (ext.x == 0 && ext.y == 0 && ext.z == 0)) {
            nodes_[idx].first = first;
            nodes_[idx].count = count;
            return;
        }
        const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
        const std::uint32_t mid = first + count / 2;
        std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                         [&](std::uint32_t a, std::uint32_t b) {
                             const double ca = points_[a][axis], cb = points_[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        const auto left = std::uint32_t(nodes_.size());
        nodes_.emplace_back();
        nodes_.emplace_back();
        nodes_[idx].left = left;
        build(left, first, mid - first, depth + 1);
        build(left + 1, mid, first + count - mid, depth + 1);
    }

    static constexpr std::uint32_t kLeafSize = 8;

    std::vector<Vec3d> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace ovox
