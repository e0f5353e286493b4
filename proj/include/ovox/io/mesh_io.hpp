#pragma once

// Wavefront OBJ (+ MTL) and Stanford PLY readers and writers.
//
// OBJ: v, vt, f (any of v, v/vt, v//vn, v/vt/vn; negative indices
// allowed; polygons fan-triangulated), usemtl, mtllib. Other statements
// are ignored.
// PLY: ascii, binary_little_endian and binary_big_endian; vertex x/y/z,
// optional per-vertex u/v (or s/t), face vertex_indices (or vertex_index).
// Written PLY is binary little-endian.

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "../error.hpp"
#include "../grid.hpp"
#include "../mesh.hpp"
#include "../texture.hpp"
#include "ovx.hpp"
#include "png.hpp"

namespace ovox::io {

enum class MeshFormat { obj, ply };

inline MeshFormat format_from_path(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (ext == ".obj") return MeshFormat::obj;
    if (ext == ".ply") return MeshFormat::ply;
    throw InvalidArgument("unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

inline double to_double(std::string_view s, const std::string& path, std::size_t line) {
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        parse_fail(path, line, "expected a number, got '" + std::string(s) + "'");
    return v;
}

inline long long to_int(std::string_view s, const std::string& path, std::size_t line) {
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        parse_fail(path, line, "expected an integer, got '" + std::string(s) + "'");
    return v;
}

/// 1-based (or negative, relative) OBJ index -> 0-based.
inline std::uint32_t obj_index(long long idx, std::size_t count, const std::string& path, std::size_t line) {
    const long long resolved = idx > 0 ? idx - 1 : (long long)count + idx;
    if (idx == 0 || resolved < 0 || resolved >= (long long)count)
        parse_fail(path, line, "index " + std::to_string(idx) + " out of range (" + std::to_string(count) + " defined)");
    return std::uint32_t(resolved);
}

inline std::string fmt(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), float(v));
    return std::string(buf, r.ptr);
}

}  // namespace detail

/// Reads an MTL library. Keys: newmtl, Kd, d, Tr, Pm, Pr, map_Kd, map_Pm /
/// map_Pr (either is taken as a glTF-packed metallic-roughness map).
/// Map paths are made absolute relative to the library's directory.
inline std::vector<MaterialSlot> read_mtl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path + " for reading");
    const auto dir = std::filesystem::path(path).parent_path();
    std::vector<MaterialSlot> out;
    std::string raw;
    std::size_t line = 0;
    auto current = [&]() -> MaterialSlot& {
        if (out.empty()) detail::parse_fail(path, line, "material statement before newmtl");
        return out.back();
    };
    auto resolve = [&](std::string_view rest) {
        // Map statements may carry options; the file name is the last token.
        const auto tok = detail::split_ws(rest);
        if (tok.empty()) detail::parse_fail(path, line, "texture statement without a file name");
        return (dir / std::filesystem::path(std::string(tok.back()))).lexically_normal().string();
    };
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view s = detail::trim(raw);
        if (s.empty() || s.front() == '#') continue;
        const auto tok = detail::split_ws(s);
        const std::string_view key = tok[0];
        const std::string_view rest = detail::trim(s.substr(key.size()));
        auto number = [&](std::size_t k) {
            if (tok.size() <= k) detail::parse_fail(path, line, "missing value for " + std::string(key));
            return float(detail::to_double(tok[k], path, line));
        };
        if (key == "newmtl") {
            out.emplace_back();
            out.back().name = std::string(rest);
        } else if (key == "Kd") {
            auto& m = current();
            for (int c = 0; c < 3; ++c) m.base_color_factor[c] = number(std::size_t(c + 1));
        } else if (key == "d") {
            current().base_color_factor[3] = number(1);
        } else if (key == "Tr") {
            current().base_color_factor[3] = 1.f - number(1);
        } else if (key == "Pm") {
            current().metallic_factor = number(1);
        } else if (key == "Pr") {
            current().roughness_factor = number(1);
        } else if (key == "map_Kd") {
            current().base_color_map = resolve(rest);
        } else if (key == "map_Pm" || key == "map_Pr") {
            current().metallic_roughness_map = resolve(rest);
        }
    }
    return out;
}

inline TriangleMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path + " for reading");
    const auto dir = std::filesystem::path(path).parent_path();
    TriangleMesh mesh;
    std::vector<Vec2d> texcoords;
    std::vector<std::array<std::int64_t, 3>> corner_vt;  // per triangle, -1 = none
    std::map<std::string, std::int32_t> slot_of;
    std::vector<MaterialSlot> library;
    std::int32_t active = -1;  // faces before any usemtl use the default material
    bool any_material = false;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view s = detail::trim(raw);
        if (s.empty() || s.front() == '#') continue;
        const auto tok = detail::split_ws(s);
        const std::string_view key = tok[0];
        if (key == "v") {
            if (tok.size() < 4) detail::parse_fail(path, line, "vertex needs 3 coordinates");
            mesh.vertices.push_back({detail::to_double(tok[1], path, line), detail::to_double(tok[2], path, line),
                                     detail::to_double(tok[3], path, line)});
        } else if (key == "vt") {
            if (tok.size() < 3) detail::parse_fail(path, line, "texture coordinate needs u and v");
            texcoords.push_back({detail::to_double(tok[1], path, line), detail::to_double(tok[2], path, line)});
        } else if (key == "f") {
            if (tok.size() < 4) detail::parse_fail(path, line, "face needs at least 3 vertices");
            std::vector<std::uint32_t> v;
            std::vector<std::int64_t> t;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const std::string_view c = tok[k];
                const auto slash = c.find('/');
                v.push_back(detail::obj_index(detail::to_int(c.substr(0, slash), path, line), mesh.vertices.size(),
                                              path, line));
                std::int64_t vt = -1;
                if (slash != std::string_view::npos) {
                    const auto rest = c.substr(slash + 1);
                    const auto vt_str = rest.substr(0, rest.find('/'));
                    if (!vt_str.empty())
                        vt = detail::obj_index(detail::to_int(vt_str, path, line), texcoords.size(), path, line);
                }
                t.push_back(vt);
            }
            for (std::size_t k = 1; k + 1 < v.size(); ++k) {
                mesh.triangles.push_back({v[0], v[k], v[k + 1]});
                corner_vt.push_back({t[0], t[k], t[k + 1]});
                mesh.material_ids.push_back(active);
            }
        } else if (key == "mtllib") {
            const std::string lib = (dir / std::string(detail::trim(s.substr(key.size())))).string();
            for (auto& m : read_mtl(lib)) library.push_back(std::move(m));
        } else if (key == "usemtl") {
            const std::string name(detail::trim(s.substr(key.size())));
            any_material = true;
            auto it = slot_of.find(name);
            if (it == slot_of.end()) {
                MaterialSlot slot;
                slot.name = name;
                for (const auto& m : library)
                    if (m.name == name) slot = m;
                it = slot_of.emplace(name, std::int32_t(mesh.materials.size())).first;
                mesh.materials.push_back(slot);
            }
            active = it->second;
        }
    }
    if (!any_material) {
        mesh.material_ids.clear();
        if (!library.empty()) mesh.materials.push_back(library.front());
    }
    const bool has_uv = std::any_of(corner_vt.begin(), corner_vt.end(),
                                    [](const auto& c) { return c[0] >= 0 || c[1] >= 0 || c[2] >= 0; });
    if (has_uv) {
        mesh.corner_uvs.reserve(corner_vt.size() * 3);
        for (const auto& c : corner_vt)
            for (auto t : c) mesh.corner_uvs.push_back(t >= 0 ? texcoords[std::size_t(t)] : Vec2d{});
    }
    return mesh;
}

/// Geometry and per-corner UVs only. Values are written at f32 precision.
/// A nonempty `material` emits "mtllib <library>" and "usemtl <material>".
inline void write_obj(const TriangleMesh& mesh, const std::string& path, const std::string& library = {},
                      const std::string& material = {}) {
    mesh.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    std::string buf;
    if (!library.empty()) buf += "mtllib " + library + '\n';
    if (!material.empty()) buf += "usemtl " + material + '\n';
    for (const auto& v : mesh.vertices)
        buf += "v " + detail::fmt(v.x) + ' ' + detail::fmt(v.y) + ' ' + detail::fmt(v.z) + '\n';
    for (const auto& t : mesh.corner_uvs) buf += "vt " + detail::fmt(t.u) + ' ' + detail::fmt(t.v) + '\n';
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        buf += 'f';
        for (int c = 0; c < 3; ++c) {
            buf += ' ' + std::to_string(mesh.triangles[t][c] + 1);
            if (mesh.has_uvs()) buf += '/' + std::to_string(3 * t + c + 1);
        }
        buf += '\n';
    }
    out << buf;
    if (!out) throw IoError("write failed: " + path);
}

namespace detail {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

inline std::optional<PlyType> ply_type(std::string_view s) {
    if (s == "char" || s == "int8") return PlyType::i8;
    if (s == "uchar" || s == "uint8") return PlyType::u8;
    if (s == "short" || s == "int16") return PlyType::i16;
    if (s == "ushort" || s == "uint16") return PlyType::u16;
    if (s == "int" || s == "int32") return PlyType::i32;
    if (s == "uint" || s == "uint32") return PlyType::u32;
    if (s == "float" || s == "float32") return PlyType::f32;
    if (s == "double" || s == "float64") return PlyType::f64;
    return std::nullopt;
}

inline std::size_t ply_size(PlyType t) {
    switch (t) {
        case PlyType::i8: case PlyType::u8: return 1;
        case PlyType::i16: case PlyType::u16: return 2;
        case PlyType::i32: case PlyType::u32: case PlyType::f32: return 4;
        case PlyType::f64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::f32;
    bool is_list = false;
    PlyType count_type = PlyType::u8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

/// Pulls typed scalars from ascii tokens or binary bytes.
class PlySource {
public:
    PlySource(const std::string& path, std::vector<char> data, std::size_t pos, int format)
        : path_(path), data_(std::move(data)), pos_(pos), format_(format) {}

    double read(PlyType t) {
        if (format_ == 0) return ascii_token();
        const std::size_t n = ply_size(t);
        if (data_.size() - pos_ < n) fail("unexpected end of data");
        unsigned char b[8];
        std::memcpy(b, data_.data() + pos_, n);
        if ((format_ == 2) != (std::endian::native == std::endian::big)) std::reverse(b, b + n);
        pos_ += n;
        switch (t) {
            case PlyType::i8: return double(std::int8_t(b[0]));
            case PlyType::u8: return double(b[0]);
            case PlyType::i16: return scalar<std::int16_t>(b);
            case PlyType::u16: return scalar<std::uint16_t>(b);
            case PlyType::i32: return scalar<std::int32_t>(b);
            case PlyType::u32: return scalar<std::uint32_t>(b);
            case PlyType::f32: return scalar<float>(b);
            case PlyType::f64: return scalar<double>(b);
        }
        return 0;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw DataError(path_ + ": byte " + std::to_string(pos_) + ": " + what);
    }

private:
    template <typename T>
    static double scalar(const unsigned char* b) {
        T v;
        std::memcpy(&v, b, sizeof(T));
        return double(v);
    }

    double ascii_token() {
        while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
        if (start == pos_) fail("unexpected end of data");
        double v = 0;
        const auto r = std::from_chars(data_.data() + start, data_.data() + pos_, v);
        if (r.ec != std::errc() || r.ptr != data_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return v;
    }

    std::string path_;
    std::vector<char> data_;
    std::size_t pos_;
    int format_;  // 0 ascii, 1 little-endian, 2 big-endian
};

}  // namespace detail

/// Reads a PLY mesh. When `vertex_materials` is given and the file carries
/// red/green/blue[/alpha] plus metallic/roughness vertex properties (as
/// written by write_ply), they are decoded into it.
inline TriangleMesh read_ply(const std::string& path, std::vector<MaterialFeature>* vertex_materials = nullptr) {
    std::vector<char> data = read_bytes(path);
    std::size_t pos = 0, line = 0;
    auto next_line = [&]() -> std::string {
        if (pos >= data.size()) detail::parse_fail(path, line, "unterminated header");
        const auto end = std::find(data.begin() + std::ptrdiff_t(pos), data.end(), '\n');
        std::string l(data.begin() + std::ptrdiff_t(pos), end);
        pos = std::size_t(end - data.begin()) + (end == data.end() ? 0 : 1);
        ++line;
        if (!l.empty() && l.back() == '\r') l.pop_back();
        return l;
    };
    if (detail::trim(next_line()) != "ply") detail::parse_fail(path, line, "missing 'ply' magic");
    int format = -1;
    std::vector<detail::PlyElement> elements;
    for (;;) {
        const std::string l = next_line();
        const auto tok = detail::split_ws(l);
        if (tok.empty()) continue;
        if (tok[0] == "end_header") break;
        if (tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "format") {
            if (tok.size() < 2) detail::parse_fail(path, line, "format line needs a type");
            if (tok[1] == "ascii") format = 0;
            else if (tok[1] == "binary_little_endian") format = 1;
            else if (tok[1] == "binary_big_endian") format = 2;
            else detail::parse_fail(path, line, "unknown format '" + std::string(tok[1]) + "'");
        } else if (tok[0] == "element") {
            if (tok.size() < 3) detail::parse_fail(path, line, "element line needs a name and count");
            elements.push_back({std::string(tok[1]), std::size_t(detail::to_int(tok[2], path, line)), {}});
        } else if (tok[0] == "property") {
            if (elements.empty()) detail::parse_fail(path, line, "property before any element");
            detail::PlyProperty p;
            if (tok.size() >= 5 && tok[1] == "list") {
                const auto ct = detail::ply_type(tok[2]), vt = detail::ply_type(tok[3]);
                if (!ct || !vt) detail::parse_fail(path, line, "unknown list property type");
                p = {std::string(tok[4]), *vt, true, *ct};
            } else if (tok.size() >= 3) {
                const auto t = detail::ply_type(tok[1]);
                if (!t) detail::parse_fail(path, line, "unknown property type '" + std::string(tok[1]) + "'");
                p = {std::string(tok[2]), *t, false, detail::PlyType::u8};
            } else {
                detail::parse_fail(path, line, "malformed property line");
            }
            elements.back().props.push_back(p);
        } else {
            detail::parse_fail(path, line, "unexpected header line '" + l + "'");
        }
    }
    if (format < 0) detail::parse_fail(path, line, "missing format line");

    TriangleMesh mesh;
    std::vector<Vec2d> vertex_uv;
    std::vector<MaterialFeature> colors;
    bool have_uv = false, have_color = false;
    detail::PlySource src(path, std::move(data), pos, format);
    for (const auto& el : elements) {
        auto index_of = [&](std::initializer_list<const char*> names) -> int {
            for (const char* n : names)
                for (std::size_t k = 0; k < el.props.size(); ++k)
                    if (el.props[k].name == n && !el.props[k].is_list) return int(k);
            return -1;
        };
        if (el.name == "vertex") {
            const int ix = index_of({"x"}), iy = index_of({"y"}), iz = index_of({"z"});
            if (ix < 0 || iy < 0 || iz < 0) src.fail("vertex element lacks x/y/z");
            const int iu = index_of({"u", "s", "texture_u"}), iv = index_of({"v", "t", "texture_v"});
            have_uv = iu >= 0 && iv >= 0;
            const int ir = index_of({"red"}), ig = index_of({"green"}), ib = index_of({"blue"}),
                      ia = index_of({"alpha"}), im = index_of({"metallic"}), io = index_of({"roughness"});
            have_color = ir >= 0 && ig >= 0 && ib >= 0 && im >= 0 && io >= 0;
            std::vector<double> vals(el.props.size());
            for (std::size_t n = 0; n < el.count; ++n) {
                for (std::size_t k = 0; k < el.props.size(); ++k) {
                    const auto& p = el.props[k];
                    if (p.is_list) {
                        const auto cnt = std::size_t(src.read(p.count_type));
                        for (std::size_t q = 0; q < cnt; ++q) src.read(p.type);
                    } else {
                        vals[k] = src.read(p.type);
                    }
                }
                mesh.vertices.push_back({vals[std::size_t(ix)], vals[std::size_t(iy)], vals[std::size_t(iz)]});
                if (have_uv) vertex_uv.push_back({vals[std::size_t(iu)], vals[std::size_t(iv)]});
                if (have_color) {
                    auto unit = [&](int k) {
                        const auto t = el.props[std::size_t(k)].type;
                        const double scale = t == detail::PlyType::u8 ? 255.0 : t == detail::PlyType::u16 ? 65535.0 : 1.0;
                        return float(vals[std::size_t(k)] / scale);
                    };
                    MaterialFeature m;
                    m.base_color = {srgb_to_linear(unit(ir)), srgb_to_linear(unit(ig)), srgb_to_linear(unit(ib))};
                    m.opacity = ia >= 0 ? unit(ia) : 1.f;
                    m.metallic = unit(im);
                    m.roughness = unit(io);
                    colors.push_back(m.clamped());
                }
            }
        } else if (el.name == "face") {
            int list = -1;
            for (std::size_t k = 0; k < el.props.size(); ++k)
                if (el.props[k].is_list && (el.props[k].name == "vertex_indices" || el.props[k].name == "vertex_index"))
                    list = int(k);
            if (list < 0) src.fail("face element lacks vertex_indices");
            for (std::size_t n = 0; n < el.count; ++n) {
                std::vector<std::uint32_t> idx;
                for (std::size_t k = 0; k < el.props.size(); ++k) {
                    const auto& p = el.props[k];
                    if (!p.is_list) {
                        src.read(p.type);
                        continue;
                    }
                    const auto cnt = std::size_t(src.read(p.count_type));
                    for (std::size_t q = 0; q < cnt; ++q) {
                        const double v = src.read(p.type);
                        if (int(k) == list) {
                            if (v < 0 || v >= double(mesh.vertices.size()))
                                src.fail("face references vertex " + std::to_string((long long)v));
                            idx.push_back(std::uint32_t(v));
                        }
                    }
                }
                if (idx.size() < 3) src.fail("face with fewer than 3 vertices");
                for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
            }
        } else {
            for (std::size_t n = 0; n < el.count; ++n)
                for (const auto& p : el.props) {
                    const auto cnt = p.is_list ? std::size_t(src.read(p.count_type)) : 1;
                    for (std::size_t q = 0; q < cnt; ++q) src.read(p.type);
                }
        }
    }
    if (have_uv) {
        mesh.corner_uvs.reserve(mesh.triangles.size() * 3);
        for (const auto& t : mesh.triangles)
            for (auto v : t) mesh.corner_uvs.push_back(vertex_uv[v]);
    }
    if (vertex_materials) *vertex_materials = have_color ? std::move(colors) : std::vector<MaterialFeature>{};
    return mesh;
}

/// Binary little-endian PLY: float x/y/z and, when given, uchar
/// red/green/blue/alpha (sRGB-encoded colour, linear alpha) plus float
/// metallic/roughness per vertex.
inline void write_ply(const TriangleMesh& mesh, const std::string& path,
                      std::span<const MaterialFeature> vertex_materials = {}) {
    mesh.validate();
    const bool colored = !vertex_materials.empty();
    if (colored && vertex_materials.size() != mesh.vertices.size())
        throw InvalidArgument("vertex material count differs from vertex count");
    std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                         std::to_string(mesh.vertices.size()) + "\nproperty float x\nproperty float y\nproperty float z\n";
    if (colored)
        header +=
            "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n"
            "property float metallic\nproperty float roughness\n";
    header += "element face " + std::to_string(mesh.triangles.size()) +
              "\nproperty list uchar int vertex_indices\nend_header\n";
    detail::Writer w;
    w.bytes.assign(header.begin(), header.end());
    auto code = [](float v) { return std::uint8_t(std::lround(std::clamp(v, 0.f, 1.f) * 255.f)); };
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        const auto& v = mesh.vertices[n];
        w.put(float(v.x));
        w.put(float(v.y));
        w.put(float(v.z));
        if (colored) {
            const auto& m = vertex_materials[n];
            for (int c = 0; c < 3; ++c) w.put(code(linear_to_srgb(m.base_color[c])));
            w.put(code(m.opacity));
            w.put(m.metallic);
            w.put(m.roughness);
        }
    }
    for (const auto& t : mesh.triangles) {
        w.put(std::uint8_t(3));
        for (auto v : t) w.put(std::int32_t(v));
    }
    write_bytes(path, w.bytes);
}

inline TriangleMesh read_mesh(const std::string& path) {
    return format_from_path(path) == MeshFormat::obj ? read_obj(path) : read_ply(path);
}

inline void write_mesh(const TriangleMesh& mesh, const std::string& path,
                       std::span<const MaterialFeature> vertex_materials = {}) {
    if (format_from_path(path) == MeshFormat::obj) {
        if (!vertex_materials.empty()) throw InvalidArgument("OBJ output cannot carry vertex materials; use .ply");
        write_obj(mesh, path);
    } else {
        write_ply(mesh, path, vertex_materials);
    }
}

/// Loads the texture maps referenced by the mesh's material slots. Base
/// colour is sRGB-decoded; the metallic-roughness map stays linear.
inline std::vector<PbrMaterial> load_materials(const TriangleMesh& mesh) {
    std::vector<PbrMaterial> out;
    for (const auto& slot : mesh.materials) {
        PbrMaterial m;
        m.base_color_factor = slot.base_color_factor;
        m.metallic_factor = slot.metallic_factor;
        m.roughness_factor = slot.roughness_factor;
        if (!slot.base_color_map.empty()) {
            Image img = read_png(slot.base_color_map);
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    for (int c = 0; c < std::min(img.channels, 3); ++c)
                        if (!(img.channels == 2 && c == 1)) img.at(x, y, c) = srgb_to_linear(img.at(x, y, c));
            m.textures.base_color.emplace(std::move(img));
        }
        if (!slot.metallic_roughness_map.empty())
            m.textures.metallic_roughness.emplace(read_png(slot.metallic_roughness_map));
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace ovox::io
