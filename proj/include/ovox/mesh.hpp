#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "vec.hpp"

namespace ovox {

using Triangle = std::array<std::uint32_t, 3>;

/// Material slot as referenced by a mesh file. Texture paths are resolved
/// relative to the material library; images are loaded separately.
struct MaterialSlot {
    std::string name;
    std::array<float, 4> base_color_factor{1.f, 1.f, 1.f, 1.f};
    float metallic_factor = 0.f;
    float roughness_factor = 1.f;
    std::string base_color_map;
    std::string metallic_roughness_map;

    bool operator==(const MaterialSlot&) const = default;
};

/// Indexed triangle soup. Need not be watertight, manifold or consistently
/// oriented.
struct TriangleMesh {
    std::vector<Vec3d> vertices;
    std::vector<Triangle> triangles;
    /// Per-corner texture coordinates: empty, or 3 per triangle.
    std::vector<Vec2d> corner_uvs;
    /// Per-triangle material slot: empty, or one per triangle.
    std::vector<std::int32_t> material_ids;
    std::vector<MaterialSlot> materials;

    bool empty() const { return triangles.empty(); }
    bool has_uvs() const { return !corner_uvs.empty(); }

    std::array<Vec3d, 3> corners(std::size_t t) const {
        const auto& tri = triangles[t];
        return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
    }
    std::array<Vec2d, 3> uvs(std::size_t t) const {
        return {corner_uvs[3 * t], corner_uvs[3 * t + 1], corner_uvs[3 * t + 2]};
    }
    std::int32_t material_of(std::size_t t) const { return material_ids.empty() ? 0 : material_ids[t]; }

    /// Throws InvalidArgument on out-of-range indices or mismatched attribute arrays.
    void validate() const {
        const auto nv = vertices.size();
        for (std::size_t t = 0; t < triangles.size(); ++t)
            for (auto v : triangles[t])
                if (v >= nv)
                    throw InvalidArgument("triangle " + std::to_string(t) + " references vertex " + std::to_string(v) +
                                          " but the mesh has " + std::to_string(nv));
        if (!corner_uvs.empty() && corner_uvs.size() != 3 * triangles.size())
            throw InvalidArgument("corner UV count must be 3 x triangle count");
        if (!material_ids.empty() && material_ids.size() != triangles.size())
            throw InvalidArgument("material id count must equal triangle count");
    }

    Aabbd bounds() const {
        Aabbd b = Aabbd::empty();
        for (const auto& v : vertices) b.extend(v);
        return b;
    }
};

inline Vec3d triangle_cross(const std::array<Vec3d, 3>& c) { return cross(c[1] - c[0], c[2] - c[0]); }

inline double triangle_area(const std::array<Vec3d, 3>& c) { return 0.5 * length(triangle_cross(c)); }

inline double uv_area(const std::array<Vec2d, 3>& uv) {
    const Vec2d a = uv[1] - uv[0], b = uv[2] - uv[0];
    return 0.5 * std::abs(a.u * b.v - a.v * b.u);
}

inline double surface_area(const TriangleMesh& m) {
    double area = 0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) area += triangle_area(m.corners(t));
    return area;
}

/// Uniform scale + translation placing the mesh's bounding box centred in
/// the unit cube, leaving `margin` free on every side.
inline WorldTransform fit_to_unit_cube(const TriangleMesh& mesh, double margin) {
    if (mesh.vertices.empty()) return {};
    if (!(margin >= 0.0 && margin < 0.5)) throw InvalidArgument("normalization margin must be in [0, 0.5)");
    const Aabbd b = mesh.bounds();
    const Vec3d ext = b.extent();
    const double largest = std::max({ext.x, ext.y, ext.z});
    WorldTransform t;
    t.scale = largest > 0 ? (1.0 - 2.0 * margin) / largest : 1.0;
    t.offset = Vec3d{0.5, 0.5, 0.5} - b.center() * t.scale;
    return t;
}

inline TriangleMesh transformed(TriangleMesh mesh, const WorldTransform& t) {
    if (t.is_identity()) return mesh;
    for (auto& v : mesh.vertices) v = t.to_unit(v);
    return mesh;
}

/// Number of connected components among triangles, where triangles sharing
/// a vertex index are connected. Unreferenced vertices are ignored.
inline std::size_t connected_components(const TriangleMesh& mesh) {
    std::vector<std::uint32_t> parent(mesh.vertices.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto root = [&](std::uint32_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    std::vector<bool> used(mesh.vertices.size(), false);
    for (const auto& tri : mesh.triangles) {
        for (auto v : tri) used[v] = true;
        const auto r0 = root(tri[0]);
        for (int c = 1; c < 3; ++c) {
            const auto r = root(tri[c]);
            if (r != r0) parent[r] = r0;
        }
    }
    std::size_t count = 0;
    for (std::uint32_t v = 0; v < parent.size(); ++v)
        if (used[v] && root(v) == v) ++count;
    return count;
}

/// Mesh edges referenced by exactly one triangle, as vertex-index pairs
/// (smaller index first), sorted.
inline std::vector<std::array<std::uint32_t, 2>> boundary_edge_indices(const TriangleMesh& mesh) {
    std::vector<std::uint64_t> keys;
    keys.reserve(mesh.triangles.size() * 3);
    for (const auto& tri : mesh.triangles) {
        for (int c = 0; c < 3; ++c) {
            std::uint32_t a = tri[c], b = tri[(c + 1) % 3];
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            keys.push_back((std::uint64_t(a) << 32) | b);
        }
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::array<std::uint32_t, 2>> out;
    for (std::size_t n = 0; n < keys.size();) {
        std::size_t m = n;
        while (m < keys.size() && keys[m] == keys[n]) ++m;
        if (m - n == 1) out.push_back({std::uint32_t(keys[n] >> 32), std::uint32_t(keys[n] & 0xffffffffu)});
        n = m;
    }
    return out;
}

}  // namespace ovox
