#pragma once

// O-Voxel -> mesh. One vertex per active voxel at its dual vertex, one quad
// per flagged edge whose four surrounding voxels are all active.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "grid.hpp"
#include "mesh.hpp"
#include "vec.hpp"

namespace ovox {

struct QuadFace {
    /// Dual-vertex indices, cyclic around the owning edge.
    std::array<std::uint32_t, 4> vertices{};
    GridEdge edge{};
    float split_weight = 0.5f;
};

struct ExtractStats {
    std::size_t flagged_edges = 0;
    std::size_t emitted_quads = 0;
    /// Flagged edges with an inactive or out-of-grid neighbour.
    std::size_t skipped_quads = 0;
};

/// Newell normal of a polygon (twice the vector area).
inline Vec3d newell_normal(std::span<const Vec3d> poly) {
    Vec3d n{};
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec3d& a = poly[i];
        const Vec3d& b = poly[(i + 1) % poly.size()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    return n;
}

/// Winds the quad so its Newell normal agrees with `normal`. A zero dot
/// keeps the given order. Reversal keeps vertices[0] in place.
inline QuadFace orient_quad(QuadFace quad, std::span<const Vec3d> positions, const Vec3d& normal) {
    const std::array<Vec3d, 4> poly{positions[quad.vertices[0]], positions[quad.vertices[1]],
                                    positions[quad.vertices[2]], positions[quad.vertices[3]]};
    if (dot(newell_normal(poly), normal) < 0.0) std::swap(quad.vertices[1], quad.vertices[3]);
    return quad;
}

/// Two triangles covering the quad: diagonal (v0,v2) when the weight is at
/// least 0.5, diagonal (v1,v3) otherwise. Both keep the quad's winding.
inline std::array<Triangle, 2> split_quad(const QuadFace& quad) {
    const auto& v = quad.vertices;
    if (quad.split_weight >= 0.5f) return {Triangle{v[0], v[1], v[2]}, Triangle{v[0], v[2], v[3]}};
    return {Triangle{v[0], v[1], v[3]}, Triangle{v[1], v[2], v[3]}};
}

/// Mesh vertex positions of the grid's dual vertices in unit-cube coordinates,
/// in canonical entry order.
inline std::vector<Vec3d> dual_vertex_positions(const OVoxelGrid& grid) {
    std::vector<Vec3d> pos(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) pos[n] = grid.unit_position(grid.coord(n), grid.shape(n).dual_vertex);
    return pos;
}

/// O-Voxel -> triangle mesh, in the grid's source frame. Vertices follow the
/// canonical voxel order; faces follow edge-key order.
inline TriangleMesh extract_mesh(const OVoxelGrid& grid, ExtractStats* stats = nullptr) {
    ExtractStats st;
    TriangleMesh mesh;
    std::vector<Vec3d> unit = dual_vertex_positions(grid);
    const std::int32_t n = grid.resolution();
    mesh.triangles.reserve(grid.size() * 2);
    for (std::size_t v = 0; v < grid.size(); ++v) {
        const ShapeFeature& s = grid.shape(v);
        if ((s.edge_bits & ShapeFeature::kFlagMask) == 0) continue;
        for (Axis axis : kAxes) {
            if (!s.edge_flag(axis)) continue;
            ++st.flagged_edges;
            QuadFace quad;
            quad.edge = {grid.coord(v), axis};
            quad.split_weight = s.split_weight;
            bool complete = true;
            const auto ring = edge_ring(quad.edge);
            for (int c = 0; c < 4; ++c) {
                if (!ring[c].in_grid(n)) {
                    complete = false;
                    break;
                }
                const auto idx = grid.find(ring[c]);
                if (!idx) {
                    complete = false;
                    break;
                }
                quad.vertices[c] = std::uint32_t(*idx);
            }
            if (!complete) {
                ++st.skipped_quads;
                continue;
            }
            Vec3d normal{};
            normal[axis_index(axis)] = s.normal_negative(axis) ? -1.0 : 1.0;
            const auto tris = split_quad(orient_quad(quad, unit, normal));
            mesh.triangles.push_back(tris[0]);
            mesh.triangles.push_back(tris[1]);
            ++st.emitted_quads;
        }
    }
    const WorldTransform& t = grid.transform();
    if (!t.is_identity())
        for (auto& p : unit) p = t.from_unit(p);
    mesh.vertices = std::move(unit);
    if (stats) *stats = st;
    return mesh;
}

}  // namespace ovox
