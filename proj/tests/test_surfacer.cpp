#include <gtest/gtest.h>

#include <map>

#include "ovox/surfacer.hpp"
#include "ovox/voxelizer.hpp"
#include "support/shapes.hpp"

using namespace ovox;
using ovox::testing::append;
using ovox::testing::box_surface_distance;
using ovox::testing::make_centered_cube;
using ovox::testing::make_sphere;
using ovox::testing::make_x_quad;

namespace {

OVoxelGrid voxelize_at(const TriangleMesh& mesh, int n) {
    VoxelizeConfig cfg;
    cfg.resolution = n;
    return voxelize(mesh, cfg);
}

/// Every undirected edge has two incident faces, traversed once in each direction.
bool closed_oriented_manifold(const TriangleMesh& m) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
    for (const auto& t : m.triangles)
        for (int e = 0; e < 3; ++e) ++directed[{t[e], t[(e + 1) % 3]}];
    for (const auto& [edge, count] : directed) {
        if (count != 1) return false;
        const auto it = directed.find({edge.second, edge.first});
        if (it == directed.end() || it->second != 1) return false;
    }
    return !m.triangles.empty();
}

}  // namespace

TEST(ExtractMesh, SingleQuad) {
    // The four voxels around the X edge at base (1,1,1).
    std::vector<VoxelCoord> coords{{1, 1, 1}, {1, 0, 1}, {1, 0, 0}, {1, 1, 0}};
    std::vector<ShapeFeature> shape(4);
    shape[0].set_edge_flag(Axis::X, true);
    const OVoxelGrid grid(4, coords, shape);
    ExtractStats st;
    const auto mesh = extract_mesh(grid, &st);
    EXPECT_EQ(mesh.triangles.size(), 2u);
    EXPECT_EQ(mesh.vertices.size(), 4u);
    EXPECT_EQ(st.emitted_quads, 1u);
    // All four centres lie in the plane x = 1.5 / 4; the normal points +x.
    for (std::size_t t = 0; t < 2; ++t) EXPECT_GT(triangle_cross(mesh.corners(t)).x, 0);
}

TEST(ExtractMesh, IncompleteRingIsSkipped) {
    std::vector<VoxelCoord> coords{{1, 1, 1}, {1, 0, 1}, {1, 0, 0}};
    std::vector<ShapeFeature> shape(3);
    for (auto& s : shape) s.set_edge_flag(Axis::X, true);
    ExtractStats st;
    const auto mesh = extract_mesh(OVoxelGrid(4, coords, shape), &st);
    EXPECT_TRUE(mesh.triangles.empty());
    EXPECT_EQ(st.flagged_edges, 3u);
    EXPECT_EQ(st.skipped_quads, 3u);
}

TEST(ExtractMesh, EmptyGrid) {
    const auto mesh = extract_mesh(OVoxelGrid(16));
    EXPECT_TRUE(mesh.vertices.empty());
    EXPECT_TRUE(mesh.triangles.empty());
}

TEST(ExtractMesh, CubeIsClosedAndAccurate) {
    for (int n : {8, 32}) {
        const auto mesh = extract_mesh(voxelize_at(make_centered_cube(0.8), n));
        EXPECT_TRUE(closed_oriented_manifold(mesh)) << n;
        double worst = 0;
        for (const auto& v : mesh.vertices)
            worst = std::max(worst, box_surface_distance(v, {0.1, 0.1, 0.1}, {0.9, 0.9, 0.9}));
        EXPECT_LT(worst, 1e-4) << n;
        EXPECT_NEAR(surface_area(mesh), 6 * 0.64, 1e-3) << n;
    }
}

TEST(ExtractMesh, SphereIsOutwardFacing) {
    const Vec3d c{0.5, 0.5, 0.5};
    const auto mesh = extract_mesh(voxelize_at(make_sphere(c, 0.35, 4), 48));
    ASSERT_FALSE(mesh.triangles.empty());
    EXPECT_TRUE(closed_oriented_manifold(mesh));
    std::size_t outward = 0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto k = mesh.corners(t);
        const Vec3d centroid = (k[0] + k[1] + k[2]) / 3.0;
        outward += dot(triangle_cross(k), centroid - c) > 0;
    }
    EXPECT_GE(double(outward), 0.99 * mesh.triangles.size());
}

TEST(ExtractMesh, NestedSpheresStaySeparate) {
    const Vec3d c{0.5, 0.5, 0.5};
    const auto mesh = extract_mesh(voxelize_at(append(make_sphere(c, 0.4, 4), make_sphere(c, 0.2, 4, true)), 64));
    EXPECT_EQ(connected_components(mesh), 2u);
    EXPECT_TRUE(closed_oriented_manifold(mesh));
}

TEST(ExtractMesh, OpenQuadStaysOpen) {
    const auto mesh = extract_mesh(voxelize_at(make_x_quad(0.45, 0.1, 0.9), 16));
    EXPECT_FALSE(mesh.triangles.empty());
    EXPECT_FALSE(boundary_edge_indices(mesh).empty());
    for (const auto& v : mesh.vertices) EXPECT_NEAR(v.x, 0.45, 1e-9);
}

TEST(ExtractMesh, RestoresSourceFrame) {
    auto cube = make_centered_cube(1.0);
    for (auto& v : cube.vertices) v = v * 4.0 + Vec3d{1, 2, 3};
    VoxelizeConfig cfg;
    cfg.resolution = 16;
    cfg.normalize = true;
    const auto mesh = extract_mesh(voxelize(cube, cfg));
    const Aabbd b = mesh.bounds();
    EXPECT_NEAR(length(b.lo - Vec3d{1, 2, 3}), 0.0, 1e-3);
    EXPECT_NEAR(length(b.hi - Vec3d{5, 6, 7}), 0.0, 1e-3);
}

TEST(OrientQuad, FlipsAgainstNormal) {
    const std::vector<Vec3d> pos{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    QuadFace q;
    q.vertices = {0, 1, 2, 3};
    EXPECT_EQ(orient_quad(q, pos, {0, 0, 1}).vertices, (std::array<std::uint32_t, 4>{0, 1, 2, 3}));
    EXPECT_EQ(orient_quad(q, pos, {0, 0, -1}).vertices, (std::array<std::uint32_t, 4>{0, 3, 2, 1}));
    EXPECT_EQ(orient_quad(q, pos, {1, 0, 0}).vertices, q.vertices);
}

TEST(SplitQuad, DiagonalFollowsWeight) {
    QuadFace q;
    q.vertices = {10, 11, 12, 13};
    q.split_weight = 0.5f;
    auto t = split_quad(q);
    EXPECT_EQ(t[0], (Triangle{10, 11, 12}));
    EXPECT_EQ(t[1], (Triangle{10, 12, 13}));
    q.split_weight = 0.25f;
    t = split_quad(q);
    EXPECT_EQ(t[0], (Triangle{10, 11, 13}));
    EXPECT_EQ(t[1], (Triangle{11, 12, 13}));
}

TEST(SplitQuad, AreaMatchesDiagonalChoice) {
    // Non-planar quad: one corner lifted, so the two splits differ in area.
    const std::vector<Vec3d> pos{{0, 0, 0}, {1, 0, 0}, {1, 1, 0.8}, {0, 1, 0}};
    auto tri_area = [&](const Triangle& t) { return triangle_area({pos[t[0]], pos[t[1]], pos[t[2]]}); };
    auto half_cross = [&](int a, int b, int c) { return 0.5 * length(cross(pos[b] - pos[a], pos[c] - pos[a])); };
    const double a02 = half_cross(0, 1, 2) + half_cross(0, 2, 3);
    const double a13 = half_cross(0, 1, 3) + half_cross(1, 2, 3);
    ASSERT_GT(std::abs(a02 - a13), 1e-3);
    QuadFace q;
    q.vertices = {0, 1, 2, 3};
    for (float w : {0.5f, 0.9f, 0.1f, 0.49f}) {
        q.split_weight = w;
        const auto t = split_quad(q);
        EXPECT_NEAR(tri_area(t[0]) + tri_area(t[1]), w >= 0.5f ? a02 : a13, 1e-12) << w;
    }
}
