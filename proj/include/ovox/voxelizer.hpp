#pragma once

// Mesh -> O-Voxel shape conversion.
//
// Every grid edge crossed by a triangle yields a Hermite sample (crossing
// point, triangle normal). The four voxels around a crossed edge become
// active and receive a plane term; boundary edges of open meshes add line
// terms to the active voxels they pass through; a centroid term closes each
// QEF, which is then minimised inside its voxel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coord_map.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "qef.hpp"
#include "vec.hpp"

namespace ovox {

struct HermiteSample {
    /// Crossing point in unit-cube coordinates.
    Vec3d point{};
    /// Unit geometric normal of the crossing triangle.
    Vec3d normal{};
};

struct VoxelizeConfig {
    std::int32_t resolution = 64;
    double lambda_bound = 1.0;
    double lambda_reg = 1e-3;
    /// Crossings closer than this (unit-cube units) to a grid plane snap to
    /// the edge on the lower-index side.
    double epsilon = 1e-9;
    /// Fit the mesh into the unit cube (2-voxel margin) before voxelizing.
    bool normalize = false;
    /// 0 = OVX_THREADS / hardware concurrency.
    unsigned threads = 0;

    void validate() const {
        if (resolution < 1 || resolution > kMaxResolution)
            throw InvalidArgument("resolution must be in [1, 65535], got " + std::to_string(resolution));
        if (!(lambda_bound >= 0.0)) throw InvalidArgument("lambda_bound must be nonnegative");
        if (!(lambda_reg > 0.0)) throw InvalidArgument("lambda_reg must be positive");
        if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
    }
};

struct VoxelizeStats {
    std::size_t triangles = 0;
    std::size_t degenerate_triangles = 0;
    std::size_t hermite_samples = 0;
    std::size_t intersected_edges = 0;
    std::size_t boundary_segments = 0;
    std::size_t line_terms = 0;
    std::size_t constrained_solves = 0;
    std::size_t fallback_solves = 0;
};

namespace detail {

/// A crossing in grid units (unit coordinate x N).
struct RawHit {
    std::uint64_t edge_key;
    std::uint32_t triangle;
    Vec3d point;
    Vec3d normal;
};

struct Point2 {
    double b, c;
};

/// Edge function of (p -> q) at r, evaluated with endpoints in canonical
/// (lexicographic) order so a shared edge yields exactly negated values in
/// both triangles.
inline double edge_function(const Point2& p, const Point2& q, const Point2& r) {
    const bool swap = (q.b < p.b) || (q.b == p.b && q.c < p.c);
    const Point2& s = swap ? q : p;
    const Point2& t = swap ? p : q;
    const double e = (t.b - s.b) * (r.c - s.c) - (t.c - s.c) * (r.b - s.b);
    return swap ? -e : e;
}

/// Sign of the edge function's derivative along the global perturbation
/// direction (1, delta), delta -> 0+. Decides points lying exactly on an edge.
inline double tie_direction(const Point2& p, const Point2& q) {
    if (q.c != p.c) return p.c - q.c;
    return q.b - p.b;
}

inline bool covers(double e, double tie, double orient) {
    return e == 0.0 ? tie * orient > 0.0 : e * orient > 0.0;
}

/// Appends the crossings of triangle t with every grid edge. Corners are in
/// grid units.
inline void triangle_hits(const std::array<Vec3d, 3>& g, const Vec3d& normal, std::uint32_t t, std::int32_t n,
                          double eps_grid, std::vector<RawHit>& out) {
    const Vec3d cr = cross(g[1] - g[0], g[2] - g[0]);
    for (int a = 0; a < 3; ++a) {
        const double orient = cr[a];
        if (orient == 0.0) continue;  // parallel to the edge direction
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        const Point2 p[3] = {{g[0][b], g[0][c]}, {g[1][b], g[1][c]}, {g[2][b], g[2][c]}};
        const double total = edge_function(p[0], p[1], p[2]);
        if (total == 0.0) continue;
        const double ties[3] = {tie_direction(p[1], p[2]), tie_direction(p[2], p[0]), tie_direction(p[0], p[1])};

        const double bmin = std::min({p[0].b, p[1].b, p[2].b}), bmax = std::max({p[0].b, p[1].b, p[2].b});
        const double cmin = std::min({p[0].c, p[1].c, p[2].c}), cmax = std::max({p[0].c, p[1].c, p[2].c});
        const auto jb0 = std::max<std::int64_t>(0, std::int64_t(std::ceil(bmin)));
        const auto jb1 = std::min<std::int64_t>(n - 1, std::int64_t(std::floor(bmax)));
        const auto jc0 = std::max<std::int64_t>(0, std::int64_t(std::ceil(cmin)));
        const auto jc1 = std::min<std::int64_t>(n - 1, std::int64_t(std::floor(cmax)));
        for (auto jb = jb0; jb <= jb1; ++jb) {
            for (auto jc = jc0; jc <= jc1; ++jc) {
                const Point2 r{double(jb), double(jc)};
                const double w0 = edge_function(p[1], p[2], r);
                const double w1 = edge_function(p[2], p[0], r);
                const double w2 = edge_function(p[0], p[1], r);
                if (!covers(w0, ties[0], orient) || !covers(w1, ties[1], orient) || !covers(w2, ties[2], orient))
                    continue;
                const double sum = w0 + w1 + w2;
                const double x = (w0 * g[0][a] + w1 * g[1][a] + w2 * g[2][a]) / sum;
                const double m = std::round(x);
                std::int64_t i = std::abs(x - m) <= eps_grid ? std::int64_t(m) - 1 : std::int64_t(std::floor(x));
                i = std::clamp<std::int64_t>(i, 0, n - 1);
                VoxelCoord base;
                base[a] = std::int32_t(i);
                base[b] = std::int32_t(jb);
                base[c] = std::int32_t(jc);
                Vec3d q;
                q[a] = x;
                q[b] = double(jb);
                q[c] = double(jc);
                out.push_back({GridEdge{base, static_cast<Axis>(a)}.key(), t, q, normal});
            }
        }
    }
}

inline void check_in_unit_cube(const TriangleMesh& mesh) {
    static const char* names[3] = {"x", "y", "z"};
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        for (int a = 0; a < 3; ++a) {
            const double x = mesh.vertices[v][a];
            if (!(x >= 0.0 && x <= 1.0))
                throw InvalidArgument("mesh exceeds the unit-cube world frame: vertex " + std::to_string(v) + " " +
                                      names[a] + "=" + std::to_string(x) + " outside [0,1]");
        }
}

/// Crossings of all triangles, ordered by triangle index, then axis, then
/// lattice position. Parallel over fixed triangle chunks; the concatenation
/// order does not depend on the worker count.
inline std::vector<RawHit> collect_hits(const TriangleMesh& mesh, std::int32_t n, double eps, unsigned threads,
                                        std::size_t* degenerate) {
    constexpr std::size_t kGrain = 2048;
    const std::size_t count = mesh.triangles.size();
    const std::size_t chunks = (count + kGrain - 1) / kGrain;
    std::vector<std::vector<RawHit>> parts(chunks);
    std::vector<std::size_t> degen(chunks, 0);
    const double scale = double(n);
    parallel_chunks(
        count, kGrain,
        [&](std::size_t begin, std::size_t end) {
            const std::size_t chunk = chunk_of(begin, kGrain);
            auto& out = parts[chunk];
            for (std::size_t t = begin; t < end; ++t) {
                const auto c = mesh.corners(t);
                const Vec3d nrm = cross(c[1] - c[0], c[2] - c[0]);
                const double len = length(nrm);
                if (!(len > 0.0) || !std::isfinite(len)) {
                    ++degen[chunk];
                    continue;
                }
                const std::array<Vec3d, 3> g{c[0] * scale, c[1] * scale, c[2] * scale};
                triangle_hits(g, nrm / len, std::uint32_t(t), n, eps * scale, out);
            }
        },
        threads);
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    std::vector<RawHit> hits;
    hits.reserve(total);
    for (auto& p : parts) hits.insert(hits.end(), p.begin(), p.end());
    if (degenerate) {
        *degenerate = 0;
        for (auto d : degen) *degenerate += d;
    }
    return hits;
}

/// Closed segment vs closed box overlap (slab test).
inline bool segment_hits_box(const Vec3d& p0, const Vec3d& p1, const Vec3d& lo, const Vec3d& hi) {
    double t0 = 0.0, t1 = 1.0;
    const Vec3d d = p1 - p0;
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (p0[a] < lo[a] || p0[a] > hi[a]) return false;
            continue;
        }
        double ta = (lo[a] - p0[a]) / d[a];
        double tb = (hi[a] - p0[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    return true;
}

}  // namespace detail

/// Grid edges crossed by the mesh with all their Hermite samples. The mesh
/// must already lie in the unit cube.
inline std::map<GridEdge, std::vector<HermiteSample>> find_edge_intersections(const TriangleMesh& mesh,
                                                                             std::int32_t resolution, double eps,
                                                                             std::size_t* degenerate = nullptr) {
    mesh.validate();
    const auto hits = detail::collect_hits(mesh, resolution, eps, 1, degenerate);
    std::map<GridEdge, std::vector<HermiteSample>> out;
    const double inv = 1.0 / resolution;
    for (const auto& h : hits) out[GridEdge::from_key(h.edge_key)].push_back({h.point * inv, h.normal});
    return out;
}

/// Boundary edges of the mesh (used by exactly one triangle) as segments.
inline std::vector<std::array<Vec3d, 2>> boundary_edges(const TriangleMesh& mesh) {
    std::vector<std::array<Vec3d, 2>> out;
    for (const auto& e : boundary_edge_indices(mesh)) out.push_back({mesh.vertices[e[0]], mesh.vertices[e[1]]});
    return out;
}

/// Transform applied by voxelize() when normalize is set: the bounding box
/// is centred in the unit cube with a two-voxel margin (at most 1/4).
inline WorldTransform normalization_transform(const TriangleMesh& mesh, std::int32_t resolution) {
    return fit_to_unit_cube(mesh, std::min(0.25, 2.0 / resolution));
}

/// Mesh -> O-Voxel shape features. The result is bit-identical for any
/// worker count.
inline OVoxelGrid voxelize(const TriangleMesh& input, const VoxelizeConfig& cfg, VoxelizeStats* stats = nullptr) {
    cfg.validate();
    input.validate();
    const std::int32_t n = cfg.resolution;
    VoxelizeStats st;
    st.triangles = input.triangles.size();

    WorldTransform transform;
    if (cfg.normalize) transform = normalization_transform(input, n);
    const TriangleMesh mesh = transformed(input, transform);
    detail::check_in_unit_cube(mesh);
    if (mesh.triangles.empty()) {
        if (stats) *stats = st;
        return OVoxelGrid(n).with_transform(transform);
    }

    const auto hits = detail::collect_hits(mesh, n, cfg.epsilon, cfg.threads, &st.degenerate_triangles);
    st.hermite_samples = hits.size();

    // Plane terms, accumulated in hit order (triangle-major) in each voxel's local frame.
    CoordMap voxel_index(hits.size());
    std::vector<VoxelCoord> coords;
    std::vector<QefAccumulator> accs;
    CoordMap edge_index(hits.size());
    std::vector<std::uint64_t> edge_keys;
    std::vector<Vec3d> edge_normals;
    for (const auto& h : hits) {
        const GridEdge e = GridEdge::from_key(h.edge_key);
        const auto [eslot, enew] = edge_index.try_emplace(h.edge_key, std::uint32_t(edge_keys.size()));
        if (enew) {
            edge_keys.push_back(h.edge_key);
            edge_normals.push_back(h.normal);
        } else {
            edge_normals[eslot] += h.normal;
        }
        for (const auto& p : edge_neighbors(e, n)) {
            const auto [slot, inserted] = voxel_index.try_emplace(p.key(), std::uint32_t(coords.size()));
            if (inserted) {
                coords.push_back(p);
                accs.emplace_back();
            }
            const Vec3d local{h.point.x - p.i, h.point.y - p.j, h.point.z - p.k};
            add_plane_term(accs[slot], local, h.normal);
        }
    }
    st.intersected_edges = edge_keys.size();

    // Line terms from open boundaries, only for voxels already active.
    if (cfg.lambda_bound > 0.0) {
        const auto segs = boundary_edge_indices(mesh);
        st.boundary_segments = segs.size();
        for (const auto& s : segs) {
            const Vec3d a = mesh.vertices[s[0]] * double(n);
            const Vec3d b = mesh.vertices[s[1]] * double(n);
            const Vec3d d = b - a;
            const double len = length(d);
            if (!(len > 0.0)) continue;
            const Vec3d dir = d / len;
            const Vec3d lo = cwise_min(a, b), hi = cwise_max(a, b);
            VoxelCoord from, to;
            for (int ax = 0; ax < 3; ++ax) {
                // A point on a voxel face belongs to both voxels, hence the -1.
                from[ax] = std::clamp(std::int32_t(std::ceil(lo[ax])) - 1, 0, n - 1);
                to[ax] = std::clamp(std::int32_t(std::floor(hi[ax])), 0, n - 1);
            }
            for (std::int32_t i = from.i; i <= to.i; ++i)
                for (std::int32_t j = from.j; j <= to.j; ++j)
                    for (std::int32_t k = from.k; k <= to.k; ++k) {
                        const VoxelCoord p{i, j, k};
                        const auto* slot = voxel_index.find(p.key());
                        if (!slot) continue;
                        const Vec3d vlo{double(i), double(j), double(k)};
                        if (!detail::segment_hits_box(a, b, vlo, vlo + Vec3d{1, 1, 1})) continue;
                        add_line_term(accs[*slot], a - vlo, dir, cfg.lambda_bound);
                        ++st.line_terms;
                    }
        }
    }

    // Centroid term and per-voxel solve.
    std::vector<ShapeFeature> shape(coords.size());
    std::vector<std::uint8_t> solve_kind(coords.size(), 0);
    parallel_for(
        coords.size(),
        [&](std::size_t v) {
            QefAccumulator acc = accs[v];
            add_point_term(acc, acc.mean_point(), cfg.lambda_reg);
            const auto sol = solve_qef(acc);
            for (int ax = 0; ax < 3; ++ax)
                shape[v].dual_vertex[ax] = std::clamp(static_cast<float>(sol.local[ax]), 0.f, 1.f);
            shape[v].split_weight = 0.5f;
            solve_kind[v] = sol.fallback ? 2 : (sol.constrained ? 1 : 0);
        },
        4096, cfg.threads);
    for (auto k : solve_kind) {
        if (k == 1) ++st.constrained_solves;
        if (k == 2) ++st.fallback_solves;
    }

    // Edge flags and orientation bits live in each edge's base voxel.
    for (std::size_t e = 0; e < edge_keys.size(); ++e) {
        const GridEdge edge = GridEdge::from_key(edge_keys[e]);
        const auto* slot = voxel_index.find(edge.base.key());
        auto& s = shape[*slot];
        s.set_edge_flag(edge.axis, true);
        s.set_normal_negative(edge.axis, edge_normals[e][axis_index(edge.axis)] < 0.0);
    }

    if (stats) *stats = st;
    return OVoxelGrid(n, std::move(coords), std::move(shape), {}, transform);
}

}  // namespace ovox
