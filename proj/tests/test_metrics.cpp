#include <gtest/gtest.h>

#include <random>

#include "ovox/metrics.hpp"
#include "support/shapes.hpp"

using namespace ovox;
using ovox::testing::append;
using ovox::testing::make_sphere;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    PointCloud out(n);
    for (auto& p : out) p = {u(rng), u(rng), u(rng)};
    return out;
}

/// Random triangle soup of n triangles in the unit cube.
TriangleMesh random_soup(std::size_t n, std::uint64_t seed) {
    const auto pts = random_cloud(3 * n, seed);
    TriangleMesh m;
    m.vertices = pts;
    for (std::uint32_t t = 0; t < n; ++t) m.triangles.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    return m;
}

TriangleMesh unit_square(double z) {
    TriangleMesh m;
    m.vertices = {{0, 0, z}, {1, 0, z}, {1, 1, z}, {0, 1, z}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

double brute_nearest(const Vec3d& p, std::span<const Vec3d> cloud) {
    double best = 1e300;
    for (const auto& q : cloud) best = std::min(best, length_squared(p - q));
    return best;
}

double brute_point_to_mesh(const Vec3d& p, const TriangleMesh& m) {
    double best = 1e300;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto c = m.corners(t);
        best = std::min(best, length_squared(p - project_point_to_triangle(p, c[0], c[1], c[2]).point));
    }
    return best;
}

}  // namespace

TEST(KdTree, MatchesBruteForce) {
    const auto cloud = random_cloud(2000, 1);
    const KdTree tree(cloud);
    for (const auto& q : random_cloud(500, 2)) {
        const auto got = tree.nearest(q);
        EXPECT_EQ(got.distance_squared, brute_nearest(q, cloud));
        EXPECT_EQ(got.distance_squared, length_squared(q - cloud[got.index]));
    }
}

TEST(KdTree, TiesResolveToLowestIndex) {
    const std::vector<Vec3d> cloud{{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {1, 0, 0}};
    EXPECT_EQ(KdTree(cloud).nearest({0, 0, 0}).index, 0u);
}

TEST(BvhMesh, ClosestPointMatchesBruteForce) {
    const auto mesh = random_soup(500, 3);
    const BvhMesh bvh(mesh);
    for (const auto& q : random_cloud(500, 4)) EXPECT_EQ(bvh.closest_point(q).distance_squared, brute_point_to_mesh(q, mesh));
}

TEST(BvhMesh, RaycastMatchesBruteForce) {
    const auto mesh = random_soup(300, 5);
    const BvhMesh bvh(mesh);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    for (const auto& o : random_cloud(300, 7)) {
        const Vec3d d = normalized(Vec3d{g(rng), g(rng), g(rng)});
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            // Plane intersection plus barycentric inside test.
            const auto c = mesh.corners(t);
            const Vec3d nrm = cross(c[1] - c[0], c[2] - c[0]);
            const double den = dot(nrm, d);
            if (den == 0) continue;
            const double th = dot(nrm, c[0] - o) / den;
            if (!(th > 0)) continue;
            const Vec3d x = o + d * th;
            const double a0 = dot(cross(c[1] - x, c[2] - x), nrm), a1 = dot(cross(c[2] - x, c[0] - x), nrm),
                         a2 = dot(cross(c[0] - x, c[1] - x), nrm);
            if (a0 >= 0 && a1 >= 0 && a2 >= 0) best = std::min(best, th);
        }
        const auto h = bvh.raycast(o, d);
        ASSERT_EQ(h.hit(), std::isfinite(best));
        if (h.hit()) {
            EXPECT_NEAR(h.t, best, 1e-9);
        }
    }
}

TEST(SampleSurface, QuadrantCountsWithinBinomialBound) {
    const std::size_t n = 100000;
    const auto pts = sample_surface(unit_square(0.5), n, 11);
    std::array<std::size_t, 4> q{};
    for (const auto& p : pts) {
        EXPECT_NEAR(p.z, 0.5, 1e-15);
        ++q[(p.x >= 0.5) + 2 * (p.y >= 0.5)];
    }
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    for (auto c : q) EXPECT_LE(std::abs(double(c) - n / 4.0), 3 * sigma);
}

TEST(SampleSurface, DeterministicAndRejectsZeroArea) {
    const auto s = make_sphere({0.5, 0.5, 0.5}, 0.3, 2);
    EXPECT_EQ(sample_surface(s, 1000, 3), sample_surface(s, 1000, 3));
    EXPECT_NE(sample_surface(s, 1000, 3), sample_surface(s, 1000, 4));
    TriangleMesh point;
    point.vertices = {{0.5, 0.5, 0.5}};
    point.triangles = {{0, 0, 0}};
    EXPECT_THROW(sample_surface(point, 10, 0), InvalidArgument);
}

TEST(Chamfer, Examples) {
    const PointCloud x{{0, 0, 0}}, y{{0, 0, 1}};
    EXPECT_DOUBLE_EQ(chamfer(x, y), 1.0);
    const auto c = random_cloud(100, 1);
    EXPECT_EQ(chamfer(c, c), 0.0);
    EXPECT_THROW(chamfer(PointCloud{}, c), InvalidArgument);
}

TEST(Chamfer, MatchesQuadraticOracle) {
    const auto x = random_cloud(500, 21), y = random_cloud(500, 22);
    double sx = 0, sy = 0;
    for (const auto& p : x) sx += brute_nearest(p, y);
    for (const auto& p : y) sy += brute_nearest(p, x);
    EXPECT_NEAR(chamfer(x, y), 0.5 * sx / 500 + 0.5 * sy / 500, 1e-12);
}

TEST(PointToMesh, MatchesBruteForce) {
    const auto mesh = random_soup(500, 31);
    const auto pts = random_cloud(500, 32);
    const auto d = point_to_mesh_squared(pts, BvhMesh(mesh));
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(d[i], brute_point_to_mesh(pts[i], mesh), 1e-12);
}

TEST(MeshDistance, ParallelSquares) {
    const BvhMesh a(unit_square(0.2)), b(unit_square(0.3));
    EXPECT_NEAR(mesh_distance(a, b, 20000, 1), 0.01, 1e-4);
    EXPECT_EQ(mesh_distance(a, b, 5000, 2), mesh_distance(b, a, 5000, 2));
    EXPECT_LT(mesh_distance(a, a, 5000, 2), 1e-30);
}

TEST(FScore, Examples) {
    const auto c = random_cloud(200, 41);
    const auto same = f_score(c, c, 1e-8);
    EXPECT_EQ(same.f, 1.0);
    // d = 5e-5 passes the squared threshold (d^2 = 2.5e-9 < 1e-8) but not a linear one.
    const FScore s = f_score(PointCloud{{0, 0, 5e-5}}, PointCloud{{0, 0, 0}}, 1e-8);
    EXPECT_EQ(s.precision, 1.0);
    EXPECT_EQ(s.recall, 1.0);
    const double d2[1] = {5e-9};
    EXPECT_EQ(f_score_from_squared(d2, d2, 1e-8).precision, 1.0);
    const double none[1] = {1.0};
    EXPECT_EQ(f_score_from_squared(none, none, 1e-8).f, 0.0);
    EXPECT_THROW(f_score_from_squared(d2, d2, 0.0), InvalidArgument);
}

TEST(FScore, MixedCaseMatchesArithmetic) {
    // pred: 4 points, 2 within threshold; gt: 5 points, 4 within.
    const double pred[4] = {0.0, 0.5e-6, 2e-6, 3e-6};
    const double gt[5] = {0.0, 0.1e-6, 0.2e-6, 0.9e-6, 5e-6};
    const auto s = f_score_from_squared(pred, gt, 1e-6);
    EXPECT_DOUBLE_EQ(s.precision, 0.5);
    EXPECT_DOUBLE_EQ(s.recall, 0.8);
    EXPECT_DOUBLE_EQ(s.f, 2 * 0.5 * 0.8 / 1.3);
}

TEST(FScore, MeshModeUsesSurfaceDistance) {
    const BvhMesh a(unit_square(0.2)), b(unit_square(0.2 + 5e-5));
    const auto pa = sample_surface(a.mesh(), 1000, 1), pb = sample_surface(b.mesh(), 1000, 1);
    EXPECT_EQ(f_score(pb, b, pa, a, 1e-8).f, 1.0);
    EXPECT_EQ(f_score(pb, b, pa, a, 1e-9).f, 0.0);
}

TEST(OuterShell, NestedSpheresSeeOnlyOuter) {
    const Vec3d c{0.5, 0.5, 0.5};
    const BvhMesh nested(append(make_sphere(c, 0.4, 4), make_sphere(c, 0.2, 4, true)));
    const auto pts = outer_shell_points(nested, 20000, 3);
    EXPECT_EQ(pts.size(), 20000u);
    // Level-4 icosphere faces sit at most r (1 - cos(edge/2)) inside the sphere.
    for (const auto& p : pts) {
        const double r = length(p - c);
        EXPECT_GT(r, 0.39);
        EXPECT_LE(r, 0.4 + 1e-12);
    }
}

TEST(OuterShell, DeterministicAcrossThreads) {
    const BvhMesh s(make_sphere({0.5, 0.5, 0.5}, 0.3, 3));
    ShellConfig cfg;
    cfg.views = 20;
    cfg.threads = 1;
    const auto a = outer_shell_points(s, 3000, 9, cfg);
    cfg.threads = 4;
    EXPECT_EQ(a, outer_shell_points(s, 3000, 9, cfg));
    EXPECT_NE(a, outer_shell_points(s, 3000, 10, cfg));
}

TEST(FibonacciSphere, UnitAndBalanced) {
    const auto d = fibonacci_sphere(100);
    Vec3d sum{};
    for (const auto& v : d) {
        EXPECT_NEAR(length(v), 1.0, 1e-12);
        sum += v;
    }
    EXPECT_LT(length(sum) / 100, 0.02);
}

TEST(Evaluate, IdenticalMeshes) {
    auto s = make_sphere({3, 1, -2}, 5.0, 3);
    MetricsConfig cfg;
    cfg.samples = 5000;
    cfg.views = 20;
    cfg.seed = 7;
    const auto r = evaluate(s, s, cfg);
    EXPECT_LT(r.md, 1e-30);
    EXPECT_LT(r.cd, 1e-30);
    EXPECT_EQ(r.md_f.f, 1.0);
    EXPECT_EQ(r.cd_f.f, 1.0);
    EXPECT_EQ(r.surface_seed, 7u);
    EXPECT_EQ(r.shell_seed, 8u);
    // Normalization fits the ground truth into the unit cube.
    const auto b = transformed(s, r.normalization).bounds();
    EXPECT_NEAR(std::max({b.extent().x, b.extent().y, b.extent().z}), 1.0, 1e-12);
}

TEST(Evaluate, ScaledPredictionIsPenalised) {
    const auto gt = make_sphere({0, 0, 0}, 1.0, 3);
    const auto pred = make_sphere({0, 0, 0}, 1.1, 3);
    MetricsConfig cfg;
    cfg.samples = 5000;
    cfg.views = 20;
    const auto r = evaluate(gt, pred, cfg);
    // Unit-cube radius of the gt is 0.5, so the gap is about 0.05.
    EXPECT_NEAR(r.md, 0.05 * 0.05, 5e-4);
    EXPECT_NEAR(r.cd, 0.05 * 0.05, 5e-4);
    EXPECT_EQ(r.md_f.f, 0.0);
}
