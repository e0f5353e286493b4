// ovx: command-line front end for the O-Voxel toolkit.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ovox/io/mesh_io.hpp"
#include "ovox/io/ovx.hpp"
#include "ovox/io/png.hpp"
#include "ovox/io/report.hpp"
#include "ovox/ovox.hpp"

namespace {

using namespace ovox;

enum ExitCode { kOk = 0, kInvalidArgs = 2, kIoFailure = 3, kDataFailure = 4 };

struct VoxelizeArgs {
    std::string in, out;
    std::int32_t res = 0;
    double lambda_bound = VoxelizeConfig{}.lambda_bound;
    double lambda_reg = VoxelizeConfig{}.lambda_reg;
    bool bake = false;
    bool literal_weights = false;
};

struct MeshArgs {
    std::string in, out, colors, uv_source;
    int tex_size = 1024;
};

struct MetricsArgs {
    std::string gt, pred;
    std::size_t samples = MetricsConfig{}.samples;
    std::size_t views = MetricsConfig{}.views;
    std::uint64_t seed = 0;
    bool json = false;
};

struct DownsampleArgs {
    std::string in, out;
    std::int32_t factor = 16;
};

struct ResampleArgs {
    std::string in, out, mode, mask;
    std::size_t cout = 0;
};

void run_voxelize(const VoxelizeArgs& a) {
    const TriangleMesh mesh = io::read_mesh(a.in);
    VoxelizeConfig cfg;
    cfg.resolution = a.res;
    cfg.lambda_bound = a.lambda_bound;
    cfg.lambda_reg = a.lambda_reg;
    cfg.normalize = true;
    VoxelizeStats st;
    OVoxelGrid grid = voxelize(mesh, cfg, &st);
    std::size_t fallback = 0;
    if (a.bake) {
        const auto materials = io::load_materials(mesh);
        BakeConfig bc;
        bc.literal_weights = a.literal_weights;
        BakeStats bs;
        grid = bake_materials(mesh, materials, grid, bc, &bs);
        fallback = bs.fallback_voxels;
    }
    io::write_ovx(grid, a.out);
    std::cout << "resolution=" << grid.resolution() << "\nvoxels=" << grid.size()
              << "\nhermite_samples=" << st.hermite_samples << "\nintersected_edges=" << st.intersected_edges
              << "\ndegenerate_triangles=" << st.degenerate_triangles << "\nconstrained_solves=" << st.constrained_solves
              << "\nfallback_solves=" << st.fallback_solves << '\n';
    if (a.bake) std::cout << "bake_fallback_voxels=" << fallback << '\n';
}

void run_mesh(const MeshArgs& a) {
    OVoxelGrid grid = io::read_ovx(a.in);
    if (a.colors.empty()) {
        if (!a.uv_source.empty()) throw InvalidArgument("--uv-source needs --colors map");
        io::write_mesh(extract_mesh(grid), a.out);
        return;
    }
    if (!grid.has_material()) throw InvalidState("--colors needs a grid with material features (voxelize --bake)");
    if (a.colors == "vertex") {
        if (io::format_from_path(a.out) != io::MeshFormat::ply) throw InvalidArgument("vertex colors need a .ply output");
        const TriangleMesh mesh = extract_mesh(grid);
        const auto colors = bake_vertex_colors(mesh, grid);
        io::write_ply(mesh, a.out, colors);
        return;
    }
    // Map mode: the UV mesh is the original asset, so recover the frame
    // voxelize placed it in.
    if (a.uv_source.empty()) throw InvalidArgument("--colors map needs --uv-source");
    if (io::format_from_path(a.out) != io::MeshFormat::obj) throw InvalidArgument("texture-map output must be .obj");
    if (a.tex_size <= 0) throw InvalidArgument("--tex-size must be positive");
    const TriangleMesh uv_mesh = io::read_mesh(a.uv_source);
    grid = grid.with_transform(normalization_transform(uv_mesh, grid.resolution()));
    const BakedTextures tex = bake_texture_map(uv_mesh, grid, a.tex_size, a.tex_size);
    const std::filesystem::path out(a.out);
    const std::string stem = out.stem().string();
    const auto dir = out.parent_path();
    Image base = tex.base_color;
    for (std::size_t i = 0; i < base.data.size(); ++i)
        if (i % 4 != 3) base.data[i] = linear_to_srgb(base.data[i]);
    io::write_png(base, (dir / (stem + "_basecolor.png")).string());
    io::write_png(tex.metallic_roughness, (dir / (stem + "_metallic_roughness.png")).string());
    {
        const std::string mtl = (dir / (stem + ".mtl")).string();
        std::FILE* f = std::fopen(mtl.c_str(), "wb");
        if (!f) throw IoError("cannot open " + mtl + " for writing");
        const std::string body = "newmtl baked\nKd 1 1 1\nd 1\nPm 1\nPr 1\nmap_Kd " + stem +
                                 "_basecolor.png\nmap_Pr " + stem + "_metallic_roughness.png\n";
        const bool ok = std::fwrite(body.data(), 1, body.size(), f) == body.size();
        std::fclose(f);
        if (!ok) throw IoError("write failed: " + mtl);
    }
    TriangleMesh geometry = uv_mesh;
    geometry.materials.clear();
    geometry.material_ids.clear();
    io::write_obj(geometry, a.out, stem + ".mtl", "baked");
}

void run_metrics(const MetricsArgs& a) {
    MetricsConfig cfg;
    cfg.samples = a.samples;
    cfg.views = a.views;
    cfg.seed = a.seed;
    const MetricsReport r = evaluate(io::read_mesh(a.gt), io::read_mesh(a.pred), cfg);
    if (a.json)
        std::cout << io::report_json(r).dump(2) << '\n';
    else
        std::cout << io::report_text(r);
}

void run_downsample(const DownsampleArgs& a) {
    const io::OvxFile f = io::read_ovx_file(a.in);
    const auto coarse = downsample_structure(f.coords, f.resolution, a.factor);
    std::string body = "# resolution " + std::to_string(f.resolution / a.factor) + " factor " +
                       std::to_string(a.factor) + " count " + std::to_string(coarse.size()) + '\n';
    for (const auto& p : coarse)
        body += std::to_string(p.i) + ' ' + std::to_string(p.j) + ' ' + std::to_string(p.k) + '\n';
    io::write_bytes(a.out, std::span<const char>(body.data(), body.size()));
}

/// Generic features of a file, or its shape (+ material) features packed as
/// [v(3), edge flags(3), gamma(1), material(6)].
SparseFeatureGrid<float> features_of(const io::OvxFile& f) {
    if (f.generic) return io::to_features(f);
    if (!f.shape) throw io::OvxFormatError("shape", "file has neither generic nor shape features");
    const std::size_t c = f.material ? 13 : 7;
    std::vector<float> values;
    values.reserve(f.coords.size() * c);
    for (std::size_t n = 0; n < f.coords.size(); ++n) {
        const auto& s = (*f.shape)[n];
        values.insert(values.end(), s.dual_vertex.begin(), s.dual_vertex.end());
        for (Axis ax : kAxes) values.push_back(s.edge_flag(ax) ? 1.f : 0.f);
        values.push_back(s.split_weight);
        if (f.material)
            for (float v : (*f.material)[n].channels()) values.push_back(v);
    }
    return SparseFeatureGrid<float>(f.resolution, c, f.coords, std::move(values));
}

void run_resample(const ResampleArgs& a) {
    const SparseFeatureGrid<float> in = features_of(io::read_ovx_file(a.in));
    SparseFeatureGrid<float> out(1, 1);
    if (a.mode == "down") {
        if (!a.mask.empty()) throw InvalidArgument("--mask applies to --mode up only");
        out = space_to_channel_down(in, a.cout ? a.cout : in.channels());
    } else {
        std::map<VoxelCoord, ChildMask> masks;
        if (a.mask.empty()) {
            masks = full_masks(in);
        } else {
            const io::OvxFile fine = io::read_ovx_file(a.mask);
            if (fine.resolution != 2 * in.resolution())
                throw InvalidArgument("--mask grid resolution must be twice the input resolution");
            masks = occupancy_masks(fine.coords, fine.resolution);
        }
        out = channel_to_space_up(in, masks, a.cout ? a.cout : std::max<std::size_t>(1, in.channels() / 8));
    }
    io::write_ovx_file(io::to_ovx(out), a.out);
    std::cout << "resolution=" << out.resolution() << "\nvoxels=" << out.size() << "\nchannels=" << out.channels()
              << '\n';
}

void run_info(const std::string& path) {
    const io::OvxFile f = io::read_ovx_file(path);
    std::string flags;
    auto add = [&flags](const char* s) { flags += (flags.empty() ? "" : ",") + std::string(s); };
    if (f.shape) add("shape");
    if (f.material) add("material");
    if (f.generic) add("generic");
    std::cout << "resolution=" << f.resolution << "\nvoxels=" << f.coords.size() << "\nflags=" << f.flags() << " ("
              << (flags.empty() ? "none" : flags) << ")\n";
    if (f.generic) std::cout << "channels=" << f.generic->channels << '\n';
    if (f.coords.empty()) {
        std::cout << "bounds=empty\n";
    } else {
        VoxelCoord lo = f.coords.front(), hi = f.coords.front();
        for (const auto& p : f.coords)
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], p[a]);
                hi[a] = std::max(hi[a], p[a]);
            }
        std::cout << "bounds=" << lo.i << ' ' << lo.j << ' ' << lo.k << " .. " << hi.i << ' ' << hi.j << ' ' << hi.k
                  << '\n';
    }
    for (int factor : {4, 8, 16}) {
        std::cout << "tokens_" << factor << '=';
        if (f.resolution % factor == 0)
            std::cout << downsample_structure(f.coords, f.resolution, factor).size() << '\n';
        else
            std::cout << "n/a\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"O-Voxel codec and evaluation toolkit"};
    app.require_subcommand(1);

    VoxelizeArgs vox;
    auto* c_vox = app.add_subcommand("voxelize", "Convert a mesh to an O-Voxel file");
    c_vox->add_option("--in", vox.in, "Input mesh (.obj/.ply)")->required();
    c_vox->add_option("--res", vox.res, "Grid resolution N")->required()->check(CLI::Range(1, 65535));
    c_vox->add_option("--lambda-bound", vox.lambda_bound, "Boundary line-term weight")->check(CLI::NonNegativeNumber);
    c_vox->add_option("--lambda-reg", vox.lambda_reg, "Centroid regularisation weight")->check(CLI::PositiveNumber);
    c_vox->add_flag("--bake", vox.bake, "Bake PBR materials from the mesh's material library");
    c_vox->add_flag("--literal-weights", vox.literal_weights, "Bake with unnormalised weights w = 1 - d");
    c_vox->add_option("--out", vox.out, "Output .ovx")->required();

    MeshArgs msh;
    auto* c_mesh = app.add_subcommand("mesh", "Extract a triangle mesh from an O-Voxel file");
    c_mesh->add_option("--in", msh.in, "Input .ovx")->required();
    c_mesh->add_option("--colors", msh.colors, "Material output")->check(CLI::IsMember({"vertex", "map"}));
    c_mesh->add_option("--uv-source", msh.uv_source, "Mesh with UVs for --colors map");
    c_mesh->add_option("--tex-size", msh.tex_size, "Texture width and height for --colors map");
    c_mesh->add_option("--out", msh.out, "Output mesh (.ply/.obj)")->required();

    MetricsArgs met;
    auto* c_met = app.add_subcommand("metrics", "Compare a predicted mesh against ground truth");
    c_met->add_option("--gt", met.gt, "Ground-truth mesh")->required();
    c_met->add_option("--pred", met.pred, "Predicted mesh")->required();
    c_met->add_option("--samples", met.samples, "Points per surface sample")->check(CLI::PositiveNumber);
    c_met->add_option("--views", met.views, "Camera views for visible-surface points")->check(CLI::PositiveNumber);
    c_met->add_option("--seed", met.seed, "Sampling seed");
    c_met->add_flag("--json", met.json, "Emit JSON");

    DownsampleArgs dsm;
    auto* c_dsm = app.add_subcommand("downsample", "Write the coarse token coordinates");
    c_dsm->add_option("--in", dsm.in, "Input .ovx")->required();
    c_dsm->add_option("--factor", dsm.factor, "Downsampling factor")->required()->check(CLI::PositiveNumber);
    c_dsm->add_option("--out", dsm.out, "Output text file")->required();

    ResampleArgs rsm;
    auto* c_rsm = app.add_subcommand("resample", "Space-to-channel / channel-to-space feature resampling");
    c_rsm->add_option("--in", rsm.in, "Input .ovx")->required();
    c_rsm->add_option("--mode", rsm.mode, "down or up")->required()->check(CLI::IsMember({"down", "up"}));
    c_rsm->add_option("--cout", rsm.cout, "Output channel count")->check(CLI::PositiveNumber);
    c_rsm->add_option("--mask", rsm.mask, "Fine .ovx whose occupancy prunes --mode up (default: all children)");
    c_rsm->add_option("--out", rsm.out, "Output .ovx")->required();

    std::string info_in;
    auto* c_info = app.add_subcommand("info", "Summarise an O-Voxel file");
    c_info->add_option("--in", info_in, "Input .ovx")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalidArgs;
    }

    try {
        if (c_vox->parsed()) run_voxelize(vox);
        else if (c_mesh->parsed()) run_mesh(msh);
        else if (c_met->parsed()) run_metrics(met);
        else if (c_dsm->parsed()) run_downsample(dsm);
        else if (c_rsm->parsed()) run_resample(rsm);
        else if (c_info->parsed()) run_info(info_in);
    } catch (const InvalidArgument& e) {
        std::cerr << "ovx: invalid argument: " << e.what() << '\n';
        return kInvalidArgs;
    } catch (const IoError& e) {
        std::cerr << "ovx: I/O error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const DataError& e) {
        std::cerr << "ovx: data error: " << e.what() << '\n';
        return kDataFailure;
    } catch (const InvalidState& e) {
        std::cerr << "ovx: data error: " << e.what() << '\n';
        return kDataFailure;
    } catch (const std::exception& e) {
        std::cerr << "ovx: error: " << e.what() << '\n';
        return kDataFailure;
    }
    return kOk;
}
