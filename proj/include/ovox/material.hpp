#pragma once

// PBR material transfer between textured meshes and O-Voxel grids.
//
// Texture -> voxels: every active voxel projects its centre onto each
// triangle overlapping its cube, samples the material there at a mip level
// matched to the voxel size, and takes a distance-weighted mean.
// Voxels -> mesh: trilinear interpolation over voxel centres, skipping
// inactive neighbours.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "bvh.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "kdtree.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "texture.hpp"

namespace ovox {

struct MaterialSample {
    MaterialFeature attributes;
    double weight = 1.0;
};

struct BakeConfig {
    /// Floor for the normalised distance weight.
    double min_weight = 0.1;
    /// Use w = 1 - d with d in unit-cube units instead of the
    /// voxel-diagonal-normalised weight.
    bool literal_weights = false;
    unsigned threads = 0;
};

struct BakeStats {
    /// Active voxels no triangle overlapped; filled from the nearest surface point.
    std::size_t fallback_voxels = 0;
    std::size_t samples = 0;
    std::size_t zero_uv_area_triangles = 0;
};

/// Weight of a sample at distance d from the voxel centre.
inline double sample_weight(double distance, double voxel_size, const BakeConfig& cfg) {
    if (cfg.literal_weights) return std::max(1e-12, 1.0 - distance);
    return std::max(cfg.min_weight, 1.0 - distance / (std::sqrt(3.0) * voxel_size));
}

/// Normalised weighted mean of samples, channels clamped to [0,1].
inline MaterialFeature weighted_average(std::span<const MaterialSample> samples) {
    std::array<double, 6> acc{};
    double wsum = 0;
    for (const auto& s : samples) {
        const auto c = s.attributes.channels();
        for (int k = 0; k < 6; ++k) acc[k] += s.weight * c[k];
        wsum += s.weight;
    }
    if (!(wsum > 0)) throw InvalidArgument("weighted average needs a positive total weight");
    std::array<float, 6> out{};
    for (int k = 0; k < 6; ++k) out[k] = float(acc[k] / wsum);
    return MaterialFeature::from_channels(out).clamped();
}

/// Material of `mat` at texture coordinate uv and mip level `level`.
inline MaterialFeature sample_material(const PbrMaterial& mat, const std::optional<Vec2d>& uv, double level) {
    std::array<float, 4> base = mat.base_color_factor;
    float metallic = mat.metallic_factor, roughness = mat.roughness_factor;
    if (uv && mat.textures.base_color) {
        const auto t = mat.textures.base_color->sample(*uv, level);
        for (int c = 0; c < 4; ++c) base[c] *= t[c];
    }
    if (uv && mat.textures.metallic_roughness) {
        const auto t = mat.textures.metallic_roughness->sample(*uv, level);
        roughness *= t[1];
        metallic *= t[2];
    }
    return MaterialFeature{{base[0], base[1], base[2]}, metallic, roughness, base[3]}.clamped();
}

namespace detail {

/// Sample of triangle t at barycentric point `bary`, voxel size `vs` (unit units).
inline MaterialFeature sample_triangle(const TriangleMesh& mesh, std::span<const PbrMaterial> materials,
                                       std::size_t t, const std::array<double, 3>& bary, double vs,
                                       std::size_t* zero_uv) {
    static const PbrMaterial kDefault{};
    const std::int32_t id = mesh.material_of(t);
    const PbrMaterial& mat = (id >= 0 && std::size_t(id) < materials.size()) ? materials[id] : kDefault;
    std::optional<Vec2d> uv;
    double level = 0;
    if (mesh.has_uvs()) {
        const auto uvs = mesh.uvs(t);
        uv = uvs[0] * bary[0] + uvs[1] * bary[1] + uvs[2] * bary[2];
        const MipChain* chain = mat.textures.base_color ? &*mat.textures.base_color
                                : mat.textures.metallic_roughness ? &*mat.textures.metallic_roughness
                                                                  : nullptr;
        if (chain) {
            bool degenerate = false;
            const double dim = std::sqrt(double(chain->width()) * chain->height());
            level = mip_level(triangle_area(mesh.corners(t)), uv_area(uvs), vs, dim, &degenerate);
            if (degenerate && zero_uv) ++*zero_uv;
        }
    }
    return sample_material(mat, uv, level);
}

}  // namespace detail

/// Texture -> O-Voxel. `mesh` is in the grid's source frame; `materials` is
/// indexed by the mesh's material ids (missing slots use a default white,
/// non-metallic, fully rough material).
inline OVoxelGrid bake_materials(const TriangleMesh& source_mesh, std::span<const PbrMaterial> materials,
                                 const OVoxelGrid& grid, const BakeConfig& cfg = {}, BakeStats* stats = nullptr) {
    source_mesh.validate();
    if (!(cfg.min_weight > 0.0)) throw InvalidArgument("min_weight must be positive");
    BakeStats st;
    const TriangleMesh mesh = transformed(source_mesh, grid.transform());
    const std::int32_t n = grid.resolution();
    const double vs = grid.voxel_size();
    if (grid.empty()) {
        if (stats) *stats = st;
        return grid.with_material({});
    }

    // (voxel, triangle) overlap pairs, ordered by voxel then triangle.
    std::vector<std::uint64_t> pairs;
    const Vec3d half{vs / 2, vs / 2, vs / 2};
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto c = mesh.corners(t);
        if (triangle_area(c) == 0.0) continue;
        Aabbd b = Aabbd::empty();
        for (const auto& v : c) b.extend(v);
        VoxelCoord lo, hi;
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::clamp(std::int32_t(std::floor(b.lo[a] * n)) - 1, 0, n - 1);
            hi[a] = std::clamp(std::int32_t(std::floor(b.hi[a] * n)), 0, n - 1);
        }
        for (std::int32_t i = lo.i; i <= hi.i; ++i)
            for (std::int32_t j = lo.j; j <= hi.j; ++j)
                for (std::int32_t k = lo.k; k <= hi.k; ++k) {
                    const auto idx = grid.find({i, j, k});
                    if (!idx) continue;
                    const Vec3d center{(i + 0.5) * vs, (j + 0.5) * vs, (k + 0.5) * vs};
                    if (!triangle_overlaps_box(center, half, c[0], c[1], c[2], 1e-12)) continue;
                    pairs.push_back((std::uint64_t(*idx) << 32) | t);
                }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::size_t> start(grid.size() + 1, 0);
    for (auto p : pairs) ++start[(p >> 32) + 1];
    for (std::size_t v = 0; v < grid.size(); ++v) start[v + 1] += start[v];

    std::unique_ptr<BvhMesh> bvh;
    std::once_flag bvh_once;
    std::vector<MaterialFeature> out(grid.size());
    std::vector<std::uint8_t> fallback(grid.size(), 0);
    std::vector<std::size_t> zero_uv(grid.size(), 0);
    parallel_for(
        grid.size(),
        [&](std::size_t v) {
            const VoxelCoord p = grid.coord(v);
            const Vec3d center{(p.i + 0.5) * vs, (p.j + 0.5) * vs, (p.k + 0.5) * vs};
            std::vector<MaterialSample> samples;
            for (std::size_t s = start[v]; s < start[v + 1]; ++s) {
                const std::size_t t = pairs[s] & 0xffffffffu;
                const auto c = mesh.corners(t);
                const TrianglePoint q = project_point_to_triangle(center, c[0], c[1], c[2]);
                const double d = length(center - q.point);
                samples.push_back({detail::sample_triangle(mesh, materials, t, q.bary, vs, &zero_uv[v]),
                                   sample_weight(d, vs, cfg)});
            }
            if (samples.empty()) {
                std::call_once(bvh_once, [&] { bvh = std::make_unique<BvhMesh>(mesh); });
                const ClosestHit h = bvh->closest_point(center);
                samples.push_back({detail::sample_triangle(mesh, materials, h.triangle, h.bary, vs, nullptr), 1.0});
                fallback[v] = 1;
            }
            out[v] = weighted_average(samples);
        },
        256, cfg.threads);
    for (std::size_t v = 0; v < grid.size(); ++v) {
        st.fallback_voxels += fallback[v];
        st.zero_uv_area_triangles += zero_uv[v];
    }
    st.samples = pairs.size() + st.fallback_voxels;
    if (stats) *stats = st;
    return grid.with_material(std::move(out));
}

/// Trilinear material lookup over voxel centres. Inactive neighbours are
/// dropped and the remaining weights renormalised; when no active
/// neighbour carries weight the nearest active voxel centre is used.
class MaterialQuery {
public:
    explicit MaterialQuery(const OVoxelGrid& grid) : grid_(&grid) {
        if (!grid.has_material()) throw InvalidState("grid carries no material features");
    }

    /// `point` is in the grid's source frame.
    MaterialFeature operator()(const Vec3d& point) const {
        if (grid_->empty()) throw InvalidState("cannot query materials of an empty grid");
        const Vec3d u = grid_->transform().to_unit(point);
        const double n = grid_->resolution();
        const Vec3d g{u.x * n - 0.5, u.y * n - 0.5, u.z * n - 0.5};
        const VoxelCoord base{std::int32_t(std::floor(g.x)), std::int32_t(std::floor(g.y)), std::int32_t(std::floor(g.z))};
        const Vec3d f{g.x - base.i, g.y - base.j, g.z - base.k};
        std::array<double, 6> acc{};
        double wsum = 0;
        for (int c = 0; c < 8; ++c) {
            const VoxelCoord q{base.i + (c & 1), base.j + ((c >> 1) & 1), base.k + ((c >> 2) & 1)};
            const double w = ((c & 1) ? f.x : 1 - f.x) * ((c & 2) ? f.y : 1 - f.y) * ((c & 4) ? f.z : 1 - f.z);
            if (w == 0.0) continue;
            const auto idx = grid_->find(q);
            if (!idx) continue;
            const auto ch = grid_->material(*idx).channels();
            for (int k = 0; k < 6; ++k) acc[k] += w * ch[k];
            wsum += w;
        }
        if (wsum > 0) {
            std::array<float, 6> out{};
            for (int k = 0; k < 6; ++k) out[k] = float(acc[k] / wsum);
            return MaterialFeature::from_channels(out).clamped();
        }
        ++fallbacks_;
        return grid_->material(nearest(u));
    }

    std::size_t fallbacks() const { return fallbacks_; }

private:
    std::size_t nearest(const Vec3d& unit) const {
        std::call_once(*tree_once_, [this] {
            std::vector<Vec3d> centers(grid_->size());
            const double vs = grid_->voxel_size();
            for (std::size_t v = 0; v < grid_->size(); ++v) {
                const auto& p = grid_->coord(v);
                centers[v] = {(p.i + 0.5) * vs, (p.j + 0.5) * vs, (p.k + 0.5) * vs};
            }
            tree_ = std::make_unique<KdTree>(centers);
        });
        return tree_->nearest(unit).index;
    }

    const OVoxelGrid* grid_;
    mutable std::unique_ptr<std::once_flag> tree_once_ = std::make_unique<std::once_flag>();
    mutable std::unique_ptr<KdTree> tree_;
    mutable std::size_t fallbacks_ = 0;
};

inline MaterialFeature query_material(const OVoxelGrid& grid, const Vec3d& point) { return MaterialQuery(grid)(point); }

/// Per-vertex materials, in vertex order.
inline std::vector<MaterialFeature> bake_vertex_colors(const TriangleMesh& mesh, const OVoxelGrid& grid) {
    MaterialQuery query(grid);
    std::vector<MaterialFeature> out;
    out.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.push_back(query(v));
    return out;
}

struct BakedTextures {
    Image base_color;          // RGBA, linear
    Image metallic_roughness;  // RGB, G = roughness, B = metallic
    std::size_t covered_texels = 0;
    std::size_t dilated_texels = 0;
};

/// O-Voxel -> texture maps for a mesh with a user-supplied UV atlas. Each
/// covered texel takes the material at its surface point; four dilation
/// passes then bleed values into uncovered neighbours.
inline BakedTextures bake_texture_map(const TriangleMesh& mesh, const OVoxelGrid& grid, int width, int height) {
    mesh.validate();
    if (!mesh.has_uvs()) throw InvalidArgument("texture baking needs per-corner UVs");
    if (width <= 0 || height <= 0) throw InvalidArgument("texture size must be positive");
    MaterialQuery query(grid);
    BakedTextures out{Image(width, height, 4), Image(width, height, 3), 0, 0};
    std::vector<std::uint8_t> covered(std::size_t(width) * height, 0);
    auto write = [&](int x, int y, const MaterialFeature& m) {
        for (int c = 0; c < 3; ++c) out.base_color.at(x, y, c) = m.base_color[c];
        out.base_color.at(x, y, 3) = m.opacity;
        out.metallic_roughness.at(x, y, 0) = 0.f;
        out.metallic_roughness.at(x, y, 1) = m.roughness;
        out.metallic_roughness.at(x, y, 2) = m.metallic;
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto uv = mesh.uvs(t);
        const auto pos = mesh.corners(t);
        // Texel (x, y) centre is at u = (x + .5) / W, v = 1 - (y + .5) / H.
        double xs[3], ys[3];
        for (int c = 0; c < 3; ++c) {
            xs[c] = uv[c].u * width - 0.5;
            ys[c] = (1.0 - uv[c].v) * height - 0.5;
        }
        const double area = (xs[1] - xs[0]) * (ys[2] - ys[0]) - (xs[2] - xs[0]) * (ys[1] - ys[0]);
        if (area == 0.0) continue;
        const int x0 = std::max(0, int(std::ceil(std::min({xs[0], xs[1], xs[2]}))));
        const int x1 = std::min(width - 1, int(std::floor(std::max({xs[0], xs[1], xs[2]}))));
        const int y0 = std::max(0, int(std::ceil(std::min({ys[0], ys[1], ys[2]}))));
        const int y1 = std::min(height - 1, int(std::floor(std::max({ys[0], ys[1], ys[2]}))));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                if (covered[std::size_t(y) * width + x]) continue;
                const double w0 = ((xs[1] - x) * (ys[2] - y) - (xs[2] - x) * (ys[1] - y)) / area;
                const double w1 = ((xs[2] - x) * (ys[0] - y) - (xs[0] - x) * (ys[2] - y)) / area;
                const double w2 = 1.0 - w0 - w1;
                constexpr double tol = -1e-12;
                if (w0 < tol || w1 < tol || w2 < tol) continue;
                const Vec3d p = pos[0] * w0 + pos[1] * w1 + pos[2] * w2;
                write(x, y, query(p));
                covered[std::size_t(y) * width + x] = 1;
                ++out.covered_texels;
            }
    }
    static constexpr int kOffsets[8][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
    for (int pass = 0; pass < 4; ++pass) {
        std::vector<std::uint8_t> next = covered;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                if (covered[std::size_t(y) * width + x]) continue;
                for (const auto& o : kOffsets) {
                    const int sx = x + o[0], sy = y + o[1];
                    if (sx < 0 || sy < 0 || sx >= width || sy >= height) continue;
                    if (!covered[std::size_t(sy) * width + sx]) continue;
                    for (int c = 0; c < 4; ++c) out.base_color.at(x, y, c) = out.base_color.at(sx, sy, c);
                    for (int c = 0; c < 3; ++c) out.metallic_roughness.at(x, y, c) = out.metallic_roughness.at(sx, sy, c);
                    next[std::size_t(y) * width + x] = 1;
                    ++out.dilated_texels;
                    break;
                }
            }
        covered.swap(next);
    }
    return out;
}

}  // namespace ovox
