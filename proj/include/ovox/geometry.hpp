#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "vec.hpp"

namespace ovox {

struct TrianglePoint {
    Vec3d point{};
    /// Barycentric weights of the three corners (sum to 1, all >= 0).
    std::array<double, 3> bary{1, 0, 0};
};

namespace detail {

inline TrianglePoint closest_on_segment(const Vec3d& p, const Vec3d& a, const Vec3d& b, int ia, int ib) {
    const Vec3d ab = b - a;
    const double len2 = length_squared(ab);
    double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
    t = t < 0 ? 0 : (t > 1 ? 1 : t);
    TrianglePoint r;
    r.point = a + ab * t;
    r.bary = {0, 0, 0};
    r.bary[ia] = 1 - t;
    r.bary[ib] = t;
    return r;
}

}  // namespace detail

/// Closest point of the closed triangle (a, b, c) to p (Voronoi-region
/// walk). A zero-area triangle projects onto its longest edge.
inline TrianglePoint project_point_to_triangle(const Vec3d& p, const Vec3d& a, const Vec3d& b, const Vec3d& c) {
    const Vec3d ab = b - a, ac = c - a, ap = p - a;
    if (length_squared(cross(ab, ac)) == 0.0) {
        const double lab = length_squared(ab), lbc = length_squared(c - b), lca = length_squared(ac);
        if (lab >= lbc && lab >= lca) return detail::closest_on_segment(p, a, b, 0, 1);
        if (lbc >= lca) return detail::closest_on_segment(p, b, c, 1, 2);
        return detail::closest_on_segment(p, c, a, 2, 0);
    }
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) return {a, {1, 0, 0}};
    const Vec3d bp = p - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) return {b, {0, 1, 0}};
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const double v = d1 / (d1 - d3);
        return {a + ab * v, {1 - v, v, 0}};
    }
    const Vec3d cp = p - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) return {c, {0, 0, 1}};
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const double w = d2 / (d2 - d6);
        return {a + ac * w, {1 - w, 0, w}};
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {b + (c - b) * w, {0, 1 - w, w}};
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return {a + ab * v + ac * w, {1 - v - w, v, w}};
}

/// Separating-axis triangle / box overlap test (closed box, given by
/// centre and half extents). `slack` widens the box to absorb rounding.
inline bool triangle_overlaps_box(const Vec3d& center, const Vec3d& half, const Vec3d& a, const Vec3d& b,
                                  const Vec3d& c, double slack = 0.0) {
    const Vec3d h = half + Vec3d{slack, slack, slack};
    const Vec3d v0 = a - center, v1 = b - center, v2 = c - center;
    const Vec3d e[3] = {v1 - v0, v2 - v1, v0 - v2};
    // Box face normals.
    for (int ax = 0; ax < 3; ++ax) {
        const double mn = std::min({v0[ax], v1[ax], v2[ax]}), mx = std::max({v0[ax], v1[ax], v2[ax]});
        if (mn > h[ax] || mx < -h[ax]) return false;
    }
    // Triangle normal.
    const Vec3d n = cross(e[0], e[1]);
    const double d = dot(n, v0);
    const double r = h.x * std::abs(n.x) + h.y * std::abs(n.y) + h.z * std::abs(n.z);
    if (d > r || d < -r) return false;
    // Edge x box-axis cross products.
    const Vec3d verts[3] = {v0, v1, v2};
    for (const auto& edge : e) {
        for (int ax = 0; ax < 3; ++ax) {
            Vec3d unit{};
            unit[ax] = 1;
            const Vec3d axis = cross(unit, edge);
            if (length_squared(axis) == 0.0) continue;
            double mn = 1e300, mx = -1e300;
            for (const auto& v : verts) {
                const double s = dot(axis, v);
                mn = std::min(mn, s);
                mx = std::max(mx, s);
            }
            const double rad = h.x * std::abs(axis.x) + h.y * std::abs(axis.y) + h.z * std::abs(axis.z);
            if (mn > rad || mx < -rad) return false;
        }
    }
    return true;
}

}  // namespace ovox
