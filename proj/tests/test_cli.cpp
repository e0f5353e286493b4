#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ovox/io/mesh_io.hpp"
#include "ovox/io/ovx.hpp"
#include "ovox/io/png.hpp"
#include "support/shapes.hpp"

using namespace ovox;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ovx_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Runs the binary, capturing stdout; returns the exit status.
    int run(const std::string& args, std::string* out = nullptr) const {
        const std::string log = path("stdout.txt");
        const std::string cmd = std::string(OVX_BINARY) + " " + args + " > " + log + " 2> " + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        if (out) *out = slurp(log);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static std::string slurp(const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    std::string write_cube() const {
        const std::string p = path("cube.obj");
        io::write_mesh(ovox::testing::make_centered_cube(0.8), p);
        return p;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, ArgumentErrorsExitTwo) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("voxelize --res 8 --out " + path("a.ovx")), 2);
    EXPECT_EQ(run("voxelize --in " + write_cube() + " --res 0 --out " + path("a.ovx")), 2);
    EXPECT_EQ(run("mesh --in x.ovx --colors rainbow --out y.ply"), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, MissingInputExitsThree) {
    EXPECT_EQ(run("voxelize --in " + path("nope.obj") + " --res 8 --out " + path("a.ovx")), 3);
    EXPECT_EQ(run("info --in " + path("nope.ovx")), 3);
}

TEST_F(Cli, DataErrorsExitFour) {
    {
        std::ofstream f(path("bad.ovx"), std::ios::binary);
        f << "OVX1garbage";
    }
    EXPECT_EQ(run("info --in " + path("bad.ovx")), 4);
    ASSERT_EQ(run("voxelize --in " + write_cube() + " --res 8 --out " + path("c.ovx")), 0);
    EXPECT_EQ(run("mesh --in " + path("c.ovx") + " --colors vertex --out " + path("c.ply")), 4);
}

TEST_F(Cli, VoxelizeInfoMeshDownsample) {
    std::string out;
    ASSERT_EQ(run("voxelize --in " + write_cube() + " --res 16 --out " + path("c.ovx"), &out), 0);
    EXPECT_NE(out.find("resolution=16\n"), std::string::npos);

    const auto grid = io::read_ovx(path("c.ovx"));
    EXPECT_EQ(grid.resolution(), 16);
    EXPECT_NE(out.find("voxels=" + std::to_string(grid.size()) + "\n"), std::string::npos);

    ASSERT_EQ(run("info --in " + path("c.ovx"), &out), 0);
    EXPECT_NE(out.find("voxels=" + std::to_string(grid.size())), std::string::npos);
    EXPECT_NE(out.find("(shape)"), std::string::npos);

    ASSERT_EQ(run("mesh --in " + path("c.ovx") + " --out " + path("c.obj")), 0);
    const auto mesh = io::read_mesh(path("c.obj"));
    EXPECT_FALSE(mesh.triangles.empty());
    // Files carry no world transform, so the mesh comes out in the unit frame
    // voxelize normalised into (margin 2/16).
    const auto b = mesh.bounds();
    EXPECT_NEAR(b.lo.x, 0.125, 1e-4);
    EXPECT_NEAR(b.hi.x, 0.875, 1e-4);

    ASSERT_EQ(run("downsample --in " + path("c.ovx") + " --factor 4 --out " + path("t.txt")), 0);
    std::set<VoxelCoord> oracle;
    for (const auto& p : grid.coords()) oracle.insert({p.i / 4, p.j / 4, p.k / 4});
    std::ifstream f(path("t.txt"));
    std::string header;
    std::getline(f, header);
    EXPECT_EQ(header, "# resolution 4 factor 4 count " + std::to_string(oracle.size()));
    std::set<VoxelCoord> got;
    for (int i, j, k; f >> i >> j >> k;) got.insert({i, j, k});
    EXPECT_EQ(got, oracle);
}

TEST_F(Cli, ResampleRoundTrip) {
    ASSERT_EQ(run("voxelize --in " + write_cube() + " --res 16 --out " + path("c.ovx")), 0);
    std::string out;
    ASSERT_EQ(run("resample --in " + path("c.ovx") + " --mode down --cout 56 --out " + path("d.ovx"), &out), 0);
    EXPECT_NE(out.find("resolution=8\nvoxels="), std::string::npos);
    EXPECT_NE(out.find("channels=56"), std::string::npos);
    ASSERT_EQ(run("resample --in " + path("d.ovx") + " --mode up --cout 7 --mask " + path("c.ovx") + " --out " +
                  path("u.ovx"), &out), 0);
    const auto fine = io::read_ovx_file(path("c.ovx"));
    const auto up = io::read_ovx_file(path("u.ovx"));
    EXPECT_EQ(up.coords, fine.coords);
    ASSERT_TRUE(up.generic);
    EXPECT_EQ(up.generic->channels, 7u);
    // C=7 -> 56 keeps every value; -> 7 with the fine mask recovers the packed shape features.
    for (std::size_t n = 0; n < fine.coords.size(); ++n)
        for (int a = 0; a < 3; ++a) EXPECT_EQ(up.generic->values[n * 7 + a], (*fine.shape)[n].dual_vertex[a]);
    EXPECT_EQ(run("resample --in " + path("c.ovx") + " --mode down --cout 5 --out " + path("x.ovx")), 2);
}

TEST_F(Cli, MetricsJson) {
    const std::string gt = path("gt.obj"), pred = path("pred.obj");
    io::write_mesh(ovox::testing::make_sphere({0.5, 0.5, 0.5}, 0.4, 3), gt);
    io::write_mesh(ovox::testing::make_sphere({0.5, 0.5, 0.5}, 0.4, 3), pred);
    std::string out;
    ASSERT_EQ(run("metrics --gt " + gt + " --pred " + pred + " --samples 2000 --views 10 --seed 3 --json", &out), 0);
    const auto j = nlohmann::json::parse(out);
    EXPECT_LT(j.at("md").get<double>(), 1e-20);
    EXPECT_LT(j.at("cd").get<double>(), 1e-20);
    EXPECT_EQ(j.at("md_f1").get<double>(), 1.0);
    EXPECT_EQ(j.at("seeds").at("surface").get<int>(), 3);
    EXPECT_EQ(j.at("seeds").at("shell").get<int>(), 4);
    ASSERT_EQ(run("metrics --gt " + gt + " --pred " + pred + " --samples 2000 --views 10", &out), 0);
    EXPECT_NE(out.find("md_f1"), std::string::npos);
}

TEST_F(Cli, BakeAndColorOutputs) {
    // Sphere with planar UVs, a constant texture and an MTL library.
    auto m = ovox::testing::make_sphere({0.5, 0.5, 0.5}, 0.4, 3);
    for (const auto& t : m.triangles)
        for (auto v : t) m.corner_uvs.push_back({m.vertices[v].x, m.vertices[v].z});
    Image tex(4, 4, 4, 1.f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            tex.at(x, y, 0) = 0.5f;
            tex.at(x, y, 1) = 0.25f;
            tex.at(x, y, 2) = 0.75f;
        }
    io::write_png(tex, path("tex.png"));
    {
        std::ofstream f(path("s.mtl"));
        f << "newmtl paint\nKd 1 1 1\nPm 0.2\nPr 0.8\nmap_Kd tex.png\n";
    }
    io::write_obj(m, path("s.obj"), "s.mtl", "paint");

    std::string out;
    ASSERT_EQ(run("voxelize --in " + path("s.obj") + " --res 32 --bake --out " + path("s.ovx"), &out), 0);
    EXPECT_NE(out.find("bake_fallback_voxels=0"), std::string::npos);
    const auto grid = io::read_ovx(path("s.ovx"));
    ASSERT_TRUE(grid.has_material());

    ASSERT_EQ(run("mesh --in " + path("s.ovx") + " --colors vertex --out " + path("v.ply")), 0);
    EXPECT_TRUE(fs::exists(path("v.ply")));
    EXPECT_EQ(run("mesh --in " + path("s.ovx") + " --colors vertex --out " + path("v.obj")), 2);

    ASSERT_EQ(run("mesh --in " + path("s.ovx") + " --colors map --uv-source " + path("s.obj") +
                  " --tex-size 32 --out " + path("m.obj")), 0);
    const auto base = io::read_png(path("m_basecolor.png"));
    EXPECT_EQ(base.width, 32);
    EXPECT_TRUE(fs::exists(path("m_metallic_roughness.png")));
    EXPECT_TRUE(fs::exists(path("m.mtl")));
    EXPECT_EQ(run("mesh --in " + path("s.ovx") + " --colors map --out " + path("m2.obj")), 2);
}
