#pragma once

// OVX container: 24-byte header, u16 coordinates, then optional shape,
// material and generic-feature sections. Little-endian throughout.
//
//   "OVX1" | u32 version | u32 N | u64 L | u32 flags
//   L x (u16 i, u16 j, u16 k)
//   [flags & 1] L x (f32 vx, f32 vy, f32 vz, u8 bits, f32 gamma)
//   [flags & 2] L x 6 f32
//   [flags & 4] u32 C, L x C f32

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../grid.hpp"
#include "../resample.hpp"

namespace ovox::io {

static_assert(std::endian::native == std::endian::little, "OVX I/O assumes a little-endian host");

inline constexpr std::array<char, 4> kOvxMagic{'O', 'V', 'X', '1'};
inline constexpr std::uint32_t kOvxVersion = 1;
inline constexpr std::size_t kOvxHeaderBytes = 24;

enum OvxFlags : std::uint32_t { kOvxShape = 1u, kOvxMaterial = 2u, kOvxGeneric = 4u };

/// Malformed OVX data; section() names where decoding failed
/// ("magic", "version", "header", "coordinates", "shape", "material", "generic").
class OvxFormatError : public DataError {
public:
    OvxFormatError(std::string section, const std::string& what)
        : DataError("OVX " + section + " section: " + what), section_(std::move(section)) {}
    const std::string& section() const { return section_; }

private:
    std::string section_;
};

struct GenericFeatures {
    std::uint32_t channels = 0;
    std::vector<float> values;  // L x channels
    bool operator==(const GenericFeatures&) const = default;
};

/// Raw file contents. Coordinates are in canonical order after decoding
/// and are sorted on encoding.
struct OvxFile {
    std::int32_t resolution = 1;
    std::vector<VoxelCoord> coords;
    std::optional<std::vector<ShapeFeature>> shape;
    std::optional<std::vector<MaterialFeature>> material;
    std::optional<GenericFeatures> generic;

    std::uint32_t flags() const {
        return (shape ? kOvxShape : 0u) | (material ? kOvxMaterial : 0u) | (generic ? kOvxGeneric : 0u);
    }
    bool operator==(const OvxFile&) const = default;
};

namespace detail {

class Writer {
public:
    template <typename T>
    void put(T v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    std::vector<char> bytes;
};

class Reader {
public:
    explicit Reader(std::span<const char> data) : data_(data) {}

    template <typename T>
    T get(const char* section) {
        if (data_.size() - pos_ < sizeof(T))
            throw OvxFormatError(section, "truncated at byte " + std::to_string(pos_));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void need(std::uint64_t bytes, const char* section) const {
        if (data_.size() - pos_ < bytes)
            throw OvxFormatError(section, "truncated: needs " + std::to_string(bytes) + " bytes at offset " +
                                              std::to_string(pos_) + ", " + std::to_string(data_.size() - pos_) +
                                              " available");
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const char> data_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Serializes `file`, reordering every section into canonical coordinate order.
inline std::vector<char> encode_ovx(const OvxFile& file) {
    const std::size_t l = file.coords.size();
    if (file.resolution < 1 || file.resolution > kMaxResolution) throw InvalidArgument("resolution outside [1, 65535]");
    if (file.shape && file.shape->size() != l) throw InvalidArgument("shape section length differs from L");
    if (file.material && file.material->size() != l) throw InvalidArgument("material section length differs from L");
    if (file.generic && file.generic->values.size() != l * file.generic->channels)
        throw InvalidArgument("generic section length differs from L x C");
    std::vector<std::size_t> order(l);
    for (std::size_t n = 0; n < l; ++n) {
        order[n] = n;
        if (!file.coords[n].in_grid(file.resolution)) throw InvalidArgument("coordinate outside grid");
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return file.coords[a] < file.coords[b]; });
    for (std::size_t n = 1; n < l; ++n)
        if (file.coords[order[n]] == file.coords[order[n - 1]]) throw InvalidArgument("duplicate coordinate");

    detail::Writer w;
    for (char c : kOvxMagic) w.put(c);
    w.put(kOvxVersion);
    w.put(std::uint32_t(file.resolution));
    w.put(std::uint64_t(l));
    w.put(file.flags());
    for (auto n : order) {
        const auto& p = file.coords[n];
        w.put(std::uint16_t(p.i));
        w.put(std::uint16_t(p.j));
        w.put(std::uint16_t(p.k));
    }
    if (file.shape)
        for (auto n : order) {
            const auto& s = (*file.shape)[n];
            for (float v : s.dual_vertex) w.put(v);
            w.put(s.edge_bits);
            w.put(s.split_weight);
        }
    if (file.material)
        for (auto n : order)
            for (float v : (*file.material)[n].channels()) w.put(v);
    if (file.generic) {
        const std::size_t c = file.generic->channels;
        w.put(file.generic->channels);
        for (auto n : order)
            for (std::size_t ch = 0; ch < c; ++ch) w.put(file.generic->values[n * c + ch]);
    }
    return std::move(w.bytes);
}

inline OvxFile decode_ovx(std::span<const char> data) {
    detail::Reader r(data);
    r.need(kOvxHeaderBytes, "header");
    std::array<char, 4> magic{};
    for (auto& c : magic) c = r.get<char>("magic");
    if (magic != kOvxMagic) throw OvxFormatError("magic", "expected \"OVX1\"");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kOvxVersion) throw OvxFormatError("version", "unsupported version " + std::to_string(version));
    const auto n = r.get<std::uint32_t>("header");
    const auto l = r.get<std::uint64_t>("header");
    const auto flags = r.get<std::uint32_t>("header");
    if (n < 1 || n > std::uint32_t(kMaxResolution))
        throw OvxFormatError("header", "resolution " + std::to_string(n) + " outside [1, 65535]");
    if (flags & ~std::uint32_t(kOvxShape | kOvxMaterial | kOvxGeneric))
        throw OvxFormatError("header", "unknown flag bits");
    if (l > r.remaining() / 6)
        throw OvxFormatError("coordinates", "declared L = " + std::to_string(l) + " exceeds file size");

    OvxFile f;
    f.resolution = std::int32_t(n);
    f.coords.resize(l);
    r.need(l * 6, "coordinates");
    for (auto& p : f.coords) {
        p.i = r.get<std::uint16_t>("coordinates");
        p.j = r.get<std::uint16_t>("coordinates");
        p.k = r.get<std::uint16_t>("coordinates");
        if (!p.in_grid(f.resolution)) throw OvxFormatError("coordinates", "coordinate outside grid");
    }
    for (std::size_t m = 1; m < l; ++m)
        if (!(f.coords[m - 1] < f.coords[m]))
            throw OvxFormatError("coordinates", "coordinates not strictly sorted at entry " + std::to_string(m));
    if (flags & kOvxShape) {
        r.need(l * 17, "shape");
        auto& shape = f.shape.emplace(l);
        for (auto& s : shape) {
            for (auto& v : s.dual_vertex) v = r.get<float>("shape");
            s.edge_bits = r.get<std::uint8_t>("shape");
            s.split_weight = r.get<float>("shape");
        }
    }
    if (flags & kOvxMaterial) {
        r.need(l * 24, "material");
        auto& mat = f.material.emplace(l);
        for (auto& m : mat) {
            std::array<float, 6> c{};
            for (auto& v : c) v = r.get<float>("material");
            m = MaterialFeature::from_channels(c);
        }
    }
    if (flags & kOvxGeneric) {
        auto& g = f.generic.emplace();
        g.channels = r.get<std::uint32_t>("generic");
        if (g.channels == 0) throw OvxFormatError("generic", "channel width is zero");
        if (l > 0 && std::uint64_t(g.channels) > r.remaining() / (4 * l))
            throw OvxFormatError("generic", "truncated: L x C exceeds remaining bytes");
        g.values.resize(l * g.channels);
        for (auto& v : g.values) v = r.get<float>("generic");
    }
    if (r.remaining() != 0) throw OvxFormatError("trailer", std::to_string(r.remaining()) + " unexpected trailing bytes");
    return f;
}

inline std::vector<char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path);
    return data;
}

inline void write_bytes(const std::string& path, std::span<const char> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(data.data(), std::streamsize(data.size()));
    if (!out) throw IoError("write failed: " + path);
}

inline OvxFile read_ovx_file(const std::string& path) { return decode_ovx(read_bytes(path)); }
inline void write_ovx_file(const OvxFile& file, const std::string& path) { write_bytes(path, encode_ovx(file)); }

inline OvxFile to_ovx(const OVoxelGrid& grid) {
    OvxFile f;
    f.resolution = grid.resolution();
    f.coords.assign(grid.coords().begin(), grid.coords().end());
    f.shape.emplace(grid.shape().begin(), grid.shape().end());
    if (grid.has_material()) f.material.emplace(grid.material().begin(), grid.material().end());
    return f;
}

/// Grid from a file's shape and material sections. Value-range violations
/// surface as DataError naming the section.
inline OVoxelGrid to_grid(const OvxFile& f) {
    if (!f.shape) throw OvxFormatError("shape", "file carries no shape features");
    try {
        OVoxelGrid g(f.resolution, f.coords, *f.shape);
        if (f.material) g = g.with_material(*f.material);
        return g;
    } catch (const InvalidArgument& e) {
        throw OvxFormatError(f.material ? "shape/material" : "shape", e.what());
    }
}

inline OvxFile to_ovx(const SparseFeatureGrid<float>& grid) {
    OvxFile f;
    f.resolution = grid.resolution();
    f.coords.assign(grid.coords().begin(), grid.coords().end());
    f.generic = GenericFeatures{std::uint32_t(grid.channels()), {grid.values().begin(), grid.values().end()}};
    return f;
}

inline SparseFeatureGrid<float> to_features(const OvxFile& f) {
    if (!f.generic) throw OvxFormatError("generic", "file carries no generic features");
    return SparseFeatureGrid<float>(f.resolution, f.generic->channels, f.coords, f.generic->values);
}

inline void write_ovx(const OVoxelGrid& grid, const std::string& path) { write_ovx_file(to_ovx(grid), path); }
inline OVoxelGrid read_ovx(const std::string& path) { return to_grid(read_ovx_file(path)); }

}  // namespace ovox::io
