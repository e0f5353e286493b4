#pragma once

// Bounding-volume hierarchy over a triangle mesh: closest-point and
// first-hit ray queries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "geometry.hpp"
#include "mesh.hpp"
#include "vec.hpp"

namespace ovox {

struct ClosestHit {
    double distance_squared = std::numeric_limits<double>::infinity();
    Vec3d point{};
    std::uint32_t triangle = 0;
    std::array<double, 3> bary{};
};

struct RayHit {
    double t = std::numeric_limits<double>::infinity();
    std::uint32_t triangle = 0;
    bool hit() const { return std::isfinite(t); }
};

class BvhMesh {
public:
    BvhMesh() = default;
    explicit BvhMesh(TriangleMesh mesh) : mesh_(std::move(mesh)) {
        mesh_.validate();
        build();
    }

    const TriangleMesh& mesh() const { return mesh_; }
    bool empty() const { return mesh_.triangles.empty(); }

    ClosestHit closest_point(const Vec3d& p) const {
        ClosestHit best;
        if (nodes_.empty()) return best;
        std::uint32_t stack[128];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (node.box.distance_squared(p) > best.distance_squared) continue;
            if (node.count > 0) {
                for (std::uint32_t n = node.first; n < node.first + node.count; ++n) visit(p, order_[n], best);
                continue;
            }
            const Node& l = nodes_[node.left];
            const Node& r = nodes_[node.left + 1];
            const double dl = l.box.distance_squared(p), dr = r.box.distance_squared(p);
            // Push the farther child first so the nearer one is explored first.
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

    /// Nearest intersection with t in (t_min, t_max).
    RayHit raycast(const Vec3d& origin, const Vec3d& dir, double t_min = 0.0,
                   double t_max = std::numeric_limits<double>::infinity()) const {
        RayHit best;
        best.t = t_max;
        bool found = false;
        if (nodes_.empty()) return {};
        const Vec3d inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
        std::uint32_t stack[128];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!ray_box(origin, inv, node.box, t_min, best.t)) continue;
            if (node.count > 0) {
                for (std::uint32_t n = node.first; n < node.first + node.count; ++n) {
                    const std::uint32_t t = order_[n];
                    double th;
                    if (ray_triangle(origin, dir, t, th) && th > t_min && th < best.t) {
                        best.t = th;
                        best.triangle = t;
                        found = true;
                    }
                }
                continue;
            }
            stack[top++] = node.left + 1;
            stack[top++] = node.left;
        }
        return found ? best : RayHit{};
    }

private:
    struct Node {
        Aabbd box = Aabbd::empty();
        std::uint32_t left = 0;  // index of first child when count == 0
        std::uint32_t first = 0;
        std::uint32_t count = 0;
    };

    void visit(const Vec3d& p, std::uint32_t t, ClosestHit& best) const {
        const auto c = mesh_.corners(t);
        const TrianglePoint tp = project_point_to_triangle(p, c[0], c[1], c[2]);
        const double d = length_squared(p - tp.point);
        if (d < best.distance_squared || (d == best.distance_squared && t < best.triangle)) {
            best.distance_squared = d;
            best.point = tp.point;
            best.triangle = t;
            best.bary = tp.bary;
        }
    }

    bool ray_triangle(const Vec3d& o, const Vec3d& d, std::uint32_t t, double& th) const {
        const auto c = mesh_.corners(t);
        const Vec3d e1 = c[1] - c[0], e2 = c[2] - c[0];
        const Vec3d pv = cross(d, e2);
        const double det = dot(e1, pv);
        if (det == 0.0) return false;
        const double inv = 1.0 / det;
        const Vec3d tv = o - c[0];
        const double u = dot(tv, pv) * inv;
        if (u < 0.0 || u > 1.0) return false;
        const Vec3d qv = cross(tv, e1);
        const double v = dot(d, qv) * inv;
        if (v < 0.0 || u + v > 1.0) return false;
        th = dot(e2, qv) * inv;
        return true;
    }

    static bool ray_box(const Vec3d& o, const Vec3d& inv, const Aabbd& b, double t0, double t1) {
        for (int a = 0; a < 3; ++a) {
            double ta = (b.lo[a] - o[a]) * inv[a];
            double tb = (b.hi[a] - o[a]) * inv[a];
            if (ta > tb) std::swap(ta, tb);
            if (std::isnan(ta) || std::isnan(tb)) continue;  // origin on slab plane with zero direction
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        return true;
    }

    void build() {
        const std::size_t nt = mesh_.triangles.size();
        if (nt == 0) return;
        order_.resize(nt);
        std::iota(order_.begin(), order_.end(), 0u);
        boxes_.resize(nt);
        centroids_.resize(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            const auto c = mesh_.corners(t);
            Aabbd b = Aabbd::empty();
            for (const auto& v : c) b.extend(v);
            boxes_[t] = b;
            centroids_[t] = (c[0] + c[1] + c[2]) / 3.0;
        }
        nodes_.reserve(2 * nt / kLeafSize + 1);
        nodes_.emplace_back();
        build_node(0, 0, std::uint32_t(nt), 0);
        boxes_.clear();
        boxes_.shrink_to_fit();
        centroids_.clear();
        centroids_.shrink_to_fit();
    }

    void build_node(std::uint32_t idx, std::uint32_t first, std::uint32_t count, int depth) {
        Aabbd box = Aabbd::empty(), cbox = Aabbd::empty();
        for (std::uint32_t n = first; n < first + count; ++n) {
            box.extend(boxes_[order_[n]]);
            cbox.extend(centroids_[order_[n]]);
        }
        nodes_[idx].box = box;
        const Vec3d ext = cbox.extent();
        if (count <= kLeafSize || depth >= 60 || (ext.x == 0 && ext.y == 0 && ext.z == 0)) {
            nodes_[idx].first = first;
            nodes_[idx].count = count;
            return;
        }
        const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
        const std::uint32_t mid = first + count / 2;
        std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                         [&](std::uint32_t a, std::uint32_t b) {
                             const double ca = centroids_[a][axis], cb = centroids_[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        const auto left = std::uint32_t(nodes_.size());
        nodes_.emplace_back();
        nodes_.emplace_back();
        nodes_[idx].left = left;
        build_node(left, first, mid - first, depth + 1);
        build_node(left + 1, mid, first + count - mid, depth + 1);
    }

    static constexpr std::uint32_t kLeafSize = 4;

    TriangleMesh mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
    std::vector<Aabbd> boxes_;
    std::vector<Vec3d> centroids_;
};

}  // namespace ovox
