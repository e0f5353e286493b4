#pragma once

// Geometric evaluation: Mesh Distance over full surfaces, Chamfer Distance
// over visible-surface point clouds, and squared-threshold F-scores.
// All distances are squared Euclidean.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bvh.hpp"
#include "error.hpp"
#include "kdtree.hpp"
#include "mesh.hpp"
#include "parallel.hpp"

namespace ovox {

using PointCloud = std::vector<Vec3d>;

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline double ordered_sum(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

}  // namespace detail

/// Area-weighted uniform surface samples.
inline PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    mesh.validate();
    std::vector<double> cdf(mesh.triangles.size());
    double total = 0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) cdf[t] = total += triangle_area(mesh.corners(t));
    if (!(total > 0)) throw InvalidArgument("cannot sample a mesh with zero surface area");
    std::mt19937_64 rng(seed);
    PointCloud out(n);
    for (auto& p : out) {
        const double pick = detail::unit_draw(rng) * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), pick);
        if (it == cdf.end()) --it;
        const auto c = mesh.corners(std::size_t(it - cdf.begin()));
        const double r1 = std::sqrt(detail::unit_draw(rng)), r2 = detail::unit_draw(rng);
        p = c[0] * (1 - r1) + c[1] * (r1 * (1 - r2)) + c[2] * (r1 * r2);
    }
    return out;
}

/// Squared distance from every point to the mesh surface.
inline std::vector<double> point_to_mesh_squared(std::span<const Vec3d> points, const BvhMesh& mesh,
                                                 unsigned threads = 0) {
    if (mesh.empty()) throw InvalidArgument("point-to-mesh distance needs a nonempty mesh");
    std::vector<double> d(points.size());
    parallel_for(points.size(), [&](std::size_t i) { d[i] = mesh.closest_point(points[i]).distance_squared; }, 1024,
                 threads);
    return d;
}

/// Squared distance from every point to its nearest neighbour in `cloud`.
inline std::vector<double> nearest_squared(std::span<const Vec3d> points, const KdTree& cloud, unsigned threads = 0) {
    if (cloud.size() == 0) throw InvalidArgument("nearest-neighbour distance needs a nonempty cloud");
    std::vector<double> d(points.size());
    parallel_for(points.size(), [&](std::size_t i) { d[i] = cloud.nearest(points[i]).distance_squared; }, 1024,
                 threads);
    return d;
}

/// 1/2 mean_X d^2(x, S_Y) + 1/2 mean_Y d^2(y, S_X) from precomputed squared distances.
inline double mean_pair(std::span<const double> x_to_y, std::span<const double> y_to_x) {
    if (x_to_y.empty() || y_to_x.empty()) throw InvalidArgument("distance terms need nonempty point sets");
    return 0.5 * detail::ordered_sum(x_to_y) / double(x_to_y.size()) +
           0.5 * detail::ordered_sum(y_to_x) / double(y_to_x.size());
}

/// Mesh Distance. Both meshes are sampled with the same seed, so swapping
/// the arguments gives the same value.
inline double mesh_distance(const BvhMesh& sx, const BvhMesh& sy, std::size_t n, std::uint64_t seed) {
    if (sx.empty() || sy.empty()) throw InvalidArgument("mesh distance needs nonempty meshes");
    if (n == 0) throw InvalidArgument("sample count must be positive");
    const PointCloud px = sample_surface(sx.mesh(), n, seed);
    const PointCloud py = sample_surface(sy.mesh(), n, seed);
    return mean_pair(point_to_mesh_squared(px, sy), point_to_mesh_squared(py, sx));
}

/// Chamfer Distance between point clouds.
inline double chamfer(std::span<const Vec3d> x, std::span<const Vec3d> y) {
    if (x.empty() || y.empty()) throw InvalidArgument("chamfer distance needs nonempty clouds");
    const KdTree tx(x), ty(y);
    return mean_pair(nearest_squared(x, ty), nearest_squared(y, tx));
}

struct FScore {
    double precision = 0;
    double recall = 0;
    double f = 0;
};

/// F-score from squared distances pred -> gt and gt -> pred, with the
/// indicator d^2 < tau.
inline FScore f_score_from_squared(std::span<const double> pred_to_gt, std::span<const double> gt_to_pred,
                                   double tau) {
    if (!(tau > 0)) throw InvalidArgument("F-score threshold must be positive");
    if (pred_to_gt.empty() || gt_to_pred.empty()) throw InvalidArgument("F-score needs nonempty point sets");
    auto frac = [tau](std::span<const double> d) {
        std::size_t in = 0;
        for (double v : d) in += v < tau;
        return double(in) / double(d.size());
    };
    FScore s{frac(pred_to_gt), frac(gt_to_pred), 0};
    if (s.precision + s.recall > 0) s.f = 2 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

/// Point-cloud mode: distances to the nearest point of the other cloud.
inline FScore f_score(std::span<const Vec3d> pred, std::span<const Vec3d> gt, double tau) {
    if (pred.empty() || gt.empty()) throw InvalidArgument("F-score needs nonempty point sets");
    const KdTree tp(pred), tg(gt);
    return f_score_from_squared(nearest_squared(pred, tg), nearest_squared(gt, tp), tau);
}

/// Mesh-surface mode: distances from sampled points to the other surface.
inline FScore f_score(std::span<const Vec3d> pred_points, const BvhMesh& pred_mesh, std::span<const Vec3d> gt_points,
                      const BvhMesh& gt_mesh, double tau) {
    return f_score_from_squared(point_to_mesh_squared(pred_points, gt_mesh), point_to_mesh_squared(gt_points, pred_mesh),
                                tau);
}

/// Unit directions spread over the sphere (golden-angle spiral).
inline std::vector<Vec3d> fibonacci_sphere(std::size_t n) {
    std::vector<Vec3d> out(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * double(i) + 1.0) / double(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * double(i);
        out[i] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    return out;
}

struct ShellConfig {
    std::size_t views = 100;
    /// Ray grid per view is rays x rays; 0 picks a size giving about four
    /// rays per requested point.
    std::size_t rays = 0;
    unsigned threads = 0;
};

/// Visible-surface points: orthographic ray grids from cameras on a
/// Fibonacci sphere around the mesh, first hits pooled and subsampled
/// (without replacement) to n_points. Fewer hits than n_points returns all hits.
inline PointCloud outer_shell_points(const BvhMesh& mesh, std::size_t n_points, std::uint64_t seed,
                                     const ShellConfig& cfg = {}) {
    if (mesh.empty()) throw InvalidArgument("outer-shell sampling needs a nonempty mesh");
    if (cfg.views == 0 || n_points == 0) throw InvalidArgument("views and point count must be positive");
    const Aabbd box = mesh.mesh().bounds();
    const Vec3d center = box.center();
    const double radius = std::max(0.5 * length(box.extent()), 1e-12);
    std::size_t rays = cfg.rays;
    if (rays == 0)
        rays = std::max<std::size_t>(32, std::size_t(std::ceil(std::sqrt(4.0 * double(n_points) / double(cfg.views)))));
    const auto dirs = fibonacci_sphere(cfg.views);
    std::vector<PointCloud> per_view(cfg.views);
    parallel_for(
        cfg.views,
        [&](std::size_t v) {
            const Vec3d d = dirs[v];
            const Vec3d up = std::abs(d.z) < 0.9 ? Vec3d{0, 0, 1} : Vec3d{1, 0, 0};
            const Vec3d u = normalized(cross(up, d));
            const Vec3d w = cross(d, u);
            const Vec3d eye = center - d * (2.0 * radius);
            for (std::size_t a = 0; a < rays; ++a)
                for (std::size_t b = 0; b < rays; ++b) {
                    const double s = (2.0 * (double(a) + 0.5) / double(rays) - 1.0) * radius;
                    const double t = (2.0 * (double(b) + 0.5) / double(rays) - 1.0) * radius;
                    const Vec3d o = eye + u * s + w * t;
                    const RayHit h = mesh.raycast(o, d, 0.0, 4.0 * radius);
                    if (h.hit()) per_view[v].push_back(o + d * h.t);
                }
        },
        1, cfg.threads);
    PointCloud pool;
    for (auto& pv : per_view) pool.insert(pool.end(), pv.begin(), pv.end());
    if (pool.empty()) throw InvalidArgument("no camera ray hit the mesh");
    if (pool.size() <= n_points) return pool;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::size_t j = i + std::size_t(detail::unit_draw(rng) * double(pool.size() - i));
        std::swap(pool[i], pool[std::min(j, pool.size() - 1)]);
    }
    pool.resize(n_points);
    return pool;
}

struct MetricsConfig {
    std::size_t samples = 100000;
    std::size_t views = 100;
    std::uint64_t seed = 0;
    double md_tau = 1e-8;
    double cd_tau = 1e-6;
    unsigned threads = 0;
};

struct MetricsReport {
    double md = 0;
    FScore md_f;
    double cd = 0;
    FScore cd_f;
    std::size_t gt_surface_points = 0, pred_surface_points = 0;
    std::size_t gt_shell_points = 0, pred_shell_points = 0;
    std::uint64_t surface_seed = 0, shell_seed = 0;
    WorldTransform normalization;
};

/// Full protocol. Both meshes are mapped by the transform that fits the
/// ground truth into the unit cube, so the prediction is judged in the
/// ground truth's frame.
inline MetricsReport evaluate(const TriangleMesh& gt, const TriangleMesh& pred, const MetricsConfig& cfg = {}) {
    if (gt.empty() || pred.empty()) throw InvalidArgument("metrics need nonempty meshes");
    if (cfg.samples == 0) throw InvalidArgument("sample count must be positive");
    MetricsReport r;
    r.normalization = fit_to_unit_cube(gt, 0.0);
    const BvhMesh bg(transformed(gt, r.normalization)), bp(transformed(pred, r.normalization));
    r.surface_seed = cfg.seed;
    r.shell_seed = cfg.seed + 1;

    const PointCloud sg = sample_surface(bg.mesh(), cfg.samples, r.surface_seed);
    const PointCloud sp = sample_surface(bp.mesh(), cfg.samples, r.surface_seed);
    const auto p2g = point_to_mesh_squared(sp, bg, cfg.threads);
    const auto g2p = point_to_mesh_squared(sg, bp, cfg.threads);
    r.md = mean_pair(g2p, p2g);
    r.md_f = f_score_from_squared(p2g, g2p, cfg.md_tau);
    r.gt_surface_points = sg.size();
    r.pred_surface_points = sp.size();

    ShellConfig shell{cfg.views, 0, cfg.threads};
    const PointCloud hg = outer_shell_points(bg, cfg.samples, r.shell_seed, shell);
    const PointCloud hp = outer_shell_points(bp, cfg.samples, r.shell_seed, shell);
    const KdTree tg(hg), tp(hp);
    const auto hp2g = nearest_squared(hp, tg, cfg.threads);
    const auto hg2p = nearest_squared(hg, tp, cfg.threads);
    r.cd = mean_pair(hg2p, hp2g);
    r.cd_f = f_score_from_squared(hp2g, hg2p, cfg.cd_tau);
    r.gt_shell_points = hg.size();
    r.pred_shell_points = hp.size();
    return r;
}

}  // namespace ovox
