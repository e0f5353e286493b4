#pragma once

// Quadratic error function for dual-vertex placement.
//
//   e(v) = sum_i (n_i . (v - q_i))^2                      plane terms
//        + lambda_bound * sum_j |P_j (v - o_j)|^2         boundary-line terms
//        + lambda_reg * |v - qbar|^2                      centroid regulariser
//
// stored as the quadratic form e(v) = v^T A v - 2 b^T v + c.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "vec.hpp"

namespace ovox {

/// Symmetric 3x3 matrix, upper triangle stored row-major.
struct SymMat3 {
    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;

    double operator()(int r, int c) const {
        if (r > c) std::swap(r, c);
        if (r == 0) return c == 0 ? xx : (c == 1 ? xy : xz);
        if (r == 1) return c == 1 ? yy : yz;
        return zz;
    }
    Vec3d operator*(const Vec3d& v) const {
        return {xx * v.x + xy * v.y + xz * v.z, xy * v.x + yy * v.y + yz * v.z, xz * v.x + yz * v.y + zz * v.z};
    }
    bool operator==(const SymMat3&) const = default;
};

struct QefAccumulator {
    SymMat3 a;
    Vec3d b{};
    double c = 0;
    /// Sum and count of plane-term points; their mean is qbar.
    Vec3d point_sum{};
    std::uint32_t point_count = 0;

    Vec3d mean_point() const { return point_count ? point_sum / double(point_count) : Vec3d{}; }

    double evaluate(const Vec3d& v) const { return dot(v, a * v) - 2.0 * dot(b, v) + c; }

    QefAccumulator& operator+=(const QefAccumulator& o) {
        a.xx += o.a.xx; a.xy += o.a.xy; a.xz += o.a.xz;
        a.yy += o.a.yy; a.yz += o.a.yz; a.zz += o.a.zz;
        b += o.b;
        c += o.c;
        point_sum += o.point_sum;
        point_count += o.point_count;
        return *this;
    }
};

/// Squared distance to the plane through q with unit normal n.
inline void add_plane_term(QefAccumulator& acc, const Vec3d& q, const Vec3d& n) {
    const double d = dot(n, q);
    acc.a.xx += n.x * n.x; acc.a.xy += n.x * n.y; acc.a.xz += n.x * n.z;
    acc.a.yy += n.y * n.y; acc.a.yz += n.y * n.z; acc.a.zz += n.z * n.z;
    acc.b += n * d;
    acc.c += d * d;
    acc.point_sum += q;
    acc.point_count += 1;
}

/// Squared distance to the line through o along unit direction d, weighted.
/// Does not contribute to qbar.
inline void add_line_term(QefAccumulator& acc, const Vec3d& o, const Vec3d& d, double weight) {
    // P = I - d d^T
    SymMat3 p{1 - d.x * d.x, -d.x * d.y, -d.x * d.z, 1 - d.y * d.y, -d.y * d.z, 1 - d.z * d.z};
    const Vec3d po = p * o;
    acc.a.xx += weight * p.xx; acc.a.xy += weight * p.xy; acc.a.xz += weight * p.xz;
    acc.a.yy += weight * p.yy; acc.a.yz += weight * p.yz; acc.a.zz += weight * p.zz;
    acc.b += po * weight;
    acc.c += weight * dot(o, po);
}

/// Squared distance to a point, weighted. With weight > 0 this makes A
/// positive definite.
inline void add_point_term(QefAccumulator& acc, const Vec3d& q, double weight) {
    acc.a.xx += weight; acc.a.yy += weight; acc.a.zz += weight;
    acc.b += q * weight;
    acc.c += weight * dot(q, q);
}

namespace detail {

/// Solves the k x k leading system (k <= 3) of m x = r by Cholesky. Returns
/// false if m is not numerically positive definite.
inline bool cholesky_solve(std::array<std::array<double, 3>, 3> m, std::array<double, 3> r, int k,
                           std::array<double, 3>& x) {
    std::array<std::array<double, 3>, 3> l{};
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m[i][j];
            for (int p = 0; p < j; ++p) s -= l[i][p] * l[j][p];
            if (i == j) {
                if (!(s > 0) || !std::isfinite(s)) return false;
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    std::array<double, 3> y{};
    for (int i = 0; i < k; ++i) {
        double s = r[i];
        for (int p = 0; p < i; ++p) s -= l[i][p] * y[p];
        y[i] = s / l[i][i];
    }
    for (int i = k - 1; i >= 0; --i) {
        double s = y[i];
        for (int p = i + 1; p < k; ++p) s -= l[p][i] * x[p];
        x[i] = s / l[i][i];
    }
    for (int i = 0; i < k; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

inline bool inside(const Vec3d& v, const Vec3d& lo, const Vec3d& hi) {
    return v.x >= lo.x && v.x <= hi.x && v.y >= lo.y && v.y <= hi.y && v.z >= lo.z && v.z <= hi.z;
}

}  // namespace detail

struct QefSolution {
    /// Minimiser in box-local [0,1]^3 coordinates.
    Vec3d local{};
    /// The factorisation failed and qbar (clamped) was returned instead.
    bool fallback = false;
    /// The unconstrained minimiser left the box; the result sits on its boundary.
    bool constrained = false;
};

/// Minimises e(v) over the closed box [lo, hi] (in the accumulator's frame).
/// If the unconstrained minimiser A^-1 b lies inside the box it is returned
/// as is. Otherwise every face/edge/corner active set of the box is solved
/// and the feasible candidate with the lowest objective wins, which is the
/// exact constrained minimum of the convex quadratic.
inline QefSolution solve_qef(const QefAccumulator& acc, const Vec3d& lo = {0, 0, 0}, const Vec3d& hi = {1, 1, 1}) {
    const Vec3d ext = hi - lo;
    auto to_local = [&](const Vec3d& v) { return Vec3d{(v.x - lo.x) / ext.x, (v.y - lo.y) / ext.y, (v.z - lo.z) / ext.z}; };
    auto clamp_box = [&](Vec3d v) {
        for (int a = 0; a < 3; ++a) v[a] = std::clamp(v[a], lo[a], hi[a]);
        return v;
    };

    std::array<std::array<double, 3>, 3> m{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[r][c] = acc.a(r, c);
    std::array<double, 3> x{};
    if (!detail::cholesky_solve(m, {acc.b.x, acc.b.y, acc.b.z}, 3, x)) {
        QefSolution s;
        s.local = to_local(clamp_box(acc.mean_point()));
        s.fallback = true;
        return s;
    }
    const Vec3d free_min{x[0], x[1], x[2]};
    if (detail::inside(free_min, lo, hi)) return {to_local(free_min), false, false};

    // Active-set enumeration: state 0 = free, 1 = at lo, 2 = at hi.
    Vec3d best = clamp_box(free_min);
    double best_e = acc.evaluate(best);
    for (int code = 1; code < 27; ++code) {
        int state[3] = {code % 3, (code / 3) % 3, code / 9};
        Vec3d v{};
        int free_axes[3];
        int nf = 0;
        for (int a = 0; a < 3; ++a) {
            if (state[a] == 0) free_axes[nf++] = a;
            else v[a] = state[a] == 1 ? lo[a] : hi[a];
        }
        if (nf > 0) {
            std::array<std::array<double, 3>, 3> sub{};
            std::array<double, 3> rhs{};
            for (int r = 0; r < nf; ++r) {
                const int ar = free_axes[r];
                rhs[r] = acc.b[ar];
                for (int a = 0; a < 3; ++a)
                    if (state[a] != 0) rhs[r] -= acc.a(ar, a) * v[a];
                for (int c = 0; c < nf; ++c) sub[r][c] = acc.a(ar, free_axes[c]);
            }
            std::array<double, 3> y{};
            if (!detail::cholesky_solve(sub, rhs, nf, y)) continue;
            bool feasible = true;
            for (int r = 0; r < nf; ++r) {
                const int a = free_axes[r];
                if (y[r] < lo[a] || y[r] > hi[a]) {
                    feasible = false;
                    break;
                }
                v[a] = y[r];
            }
            if (!feasible) continue;
        }
        const double e = acc.evaluate(v);
        if (e < best_e) {
            best_e = e;
            best = v;
        }
    }
    return {to_local(best), false, true};
}

}  // namespace ovox
