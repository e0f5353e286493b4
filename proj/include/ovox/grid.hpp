#pragma once

// O-Voxel data model: sparse voxels on an N^3 grid, each carrying a shape
// tuple (dual vertex, edge flags, splitting weight) and optionally a PBR
// material tuple.
//
// Conventions
//   Voxel (i,j,k) spans [i/N,(i+1)/N] x [j/N,(j+1)/N] x [k/N,(k+1)/N] of the
//   unit cube. Every grid edge is owned by the voxel at its minimum corner:
//   edge (p, a) runs from corner p to corner p + e_a. A voxel therefore stores
//   flags for 3 of its 12 edges; the other 9 live in neighbouring voxels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coord_map.hpp"
#include "error.hpp"
#include "vec.hpp"

namespace ovox {

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

constexpr std::array<Axis, 3> kAxes{Axis::X, Axis::Y, Axis::Z};

constexpr int axis_index(Axis a) { return static_cast<int>(a); }

inline constexpr int kMaxResolution = 65535;

struct VoxelCoord {
    std::int32_t i = 0, j = 0, k = 0;

    constexpr std::int32_t operator[](int a) const { return a == 0 ? i : (a == 1 ? j : k); }
    constexpr std::int32_t& operator[](int a) { return a == 0 ? i : (a == 1 ? j : k); }

    constexpr VoxelCoord operator+(const VoxelCoord& o) const { return {i + o.i, j + o.j, k + o.k}; }
    constexpr VoxelCoord operator-(const VoxelCoord& o) const { return {i - o.i, j - o.j, k - o.k}; }

    constexpr bool operator==(const VoxelCoord&) const = default;
    constexpr auto operator<=>(const VoxelCoord&) const = default;

    constexpr bool in_grid(std::int32_t n) const {
        return i >= 0 && j >= 0 && k >= 0 && i < n && j < n && k < n;
    }

    /// 16 bits per axis, i most significant, so key order is lexicographic order.
    constexpr std::uint64_t key() const {
        return (std::uint64_t(std::uint16_t(i)) << 32) | (std::uint64_t(std::uint16_t(j)) << 16) |
               std::uint64_t(std::uint16_t(k));
    }
    static constexpr VoxelCoord from_key(std::uint64_t key) {
        return {std::int32_t((key >> 32) & 0xffff), std::int32_t((key >> 16) & 0xffff),
                std::int32_t(key & 0xffff)};
    }
};

constexpr VoxelCoord unit_offset(Axis a) {
    return a == Axis::X ? VoxelCoord{1, 0, 0} : (a == Axis::Y ? VoxelCoord{0, 1, 0} : VoxelCoord{0, 0, 1});
}

struct GridEdge {
    VoxelCoord base;
    Axis axis = Axis::X;

    constexpr bool operator==(const GridEdge&) const = default;
    constexpr auto operator<=>(const GridEdge&) const = default;

    constexpr std::uint64_t key() const { return (base.key() << 2) | std::uint64_t(axis_index(axis)); }
    static constexpr GridEdge from_key(std::uint64_t key) {
        return {VoxelCoord::from_key(key >> 2), static_cast<Axis>(key & 3)};
    }
};

/// Up to four voxels around an edge, listed in cyclic order.
struct EdgeNeighbors {
    std::array<VoxelCoord, 4> items{};
    int count = 0;

    const VoxelCoord* begin() const { return items.data(); }
    const VoxelCoord* end() const { return items.data() + count; }
    std::size_t size() const { return static_cast<std::size_t>(count); }
};

/// The four voxels sharing an edge, unclipped. Order is cyclic around the
/// edge: base, base - e_b, base - e_b - e_c, base - e_c with (a, b, c) a
/// cyclic permutation of (X, Y, Z). Walking that ring is counter-clockwise
/// when viewed from +a.
constexpr std::array<VoxelCoord, 4> edge_ring(const GridEdge& e) {
    const int a = axis_index(e.axis);
    const VoxelCoord db = unit_offset(static_cast<Axis>((a + 1) % 3));
    const VoxelCoord dc = unit_offset(static_cast<Axis>((a + 2) % 3));
    return {e.base, e.base - db, e.base - db - dc, e.base - dc};
}

/// Voxels sharing the edge that lie inside an N^3 grid. Out-of-range
/// neighbours are dropped silently.
constexpr EdgeNeighbors edge_neighbors(const GridEdge& e, std::int32_t n) {
    EdgeNeighbors out;
    for (const auto& c : edge_ring(e))
        if (c.in_grid(n)) out.items[out.count++] = c;
    return out;
}

constexpr std::array<GridEdge, 3> canonical_edges(const VoxelCoord& p) {
    return {GridEdge{p, Axis::X}, GridEdge{p, Axis::Y}, GridEdge{p, Axis::Z}};
}

struct ShapeFeature {
    /// Dual vertex in voxel-local coordinates, each component in [0,1].
    std::array<float, 3> dual_vertex{0.5f, 0.5f, 0.5f};
    /// Bits 0-2: intersection flags of the canonical X/Y/Z edges.
    /// Bits 3-5: the averaged surface normal on that edge points towards -axis.
    std::uint8_t edge_bits = 0;
    float split_weight = 0.5f;

    static constexpr std::uint8_t kFlagMask = 0x07;
    static constexpr std::uint8_t kUsedBits = 0x3f;

    constexpr bool edge_flag(Axis a) const { return (edge_bits >> axis_index(a)) & 1u; }
    constexpr bool normal_negative(Axis a) const { return (edge_bits >> (3 + axis_index(a))) & 1u; }
    constexpr void set_edge_flag(Axis a, bool on) { set_bit(axis_index(a), on); }
    constexpr void set_normal_negative(Axis a, bool on) { set_bit(3 + axis_index(a), on); }

    bool operator==(const ShapeFeature&) const = default;

private:
    constexpr void set_bit(int b, bool on) {
        if (on) edge_bits = static_cast<std::uint8_t>(edge_bits | (1u << b));
        else edge_bits = static_cast<std::uint8_t>(edge_bits & ~(1u << b));
    }
};

struct MaterialFeature {
    std::array<float, 3> base_color{0.f, 0.f, 0.f};
    float metallic = 0.f;
    float roughness = 0.f;
    float opacity = 1.f;

    static constexpr int kChannels = 6;

    constexpr std::array<float, 6> channels() const {
        return {base_color[0], base_color[1], base_color[2], metallic, roughness, opacity};
    }
    static constexpr MaterialFeature from_channels(const std::array<float, 6>& c) {
        return {{c[0], c[1], c[2]}, c[3], c[4], c[5]};
    }
    /// Every channel clamped into [0,1]; NaN maps to 0.
    MaterialFeature clamped() const {
        auto c = channels();
        for (auto& v : c) v = v >= 0.f ? (v <= 1.f ? v : 1.f) : 0.f;
        return from_channels(c);
    }

    bool operator==(const MaterialFeature&) const = default;
};

/// Maps source-mesh coordinates into the unit cube: unit = src * scale + offset.
struct WorldTransform {
    double scale = 1.0;
    Vec3d offset{};

    Vec3d to_unit(const Vec3d& p) const { return p * scale + offset; }
    Vec3d from_unit(const Vec3d& p) const { return (p - offset) / scale; }
    bool is_identity() const { return scale == 1.0 && offset == Vec3d{}; }
    bool operator==(const WorldTransform&) const = default;
};

namespace detail {

inline bool unit_range(float v) { return v >= 0.f && v <= 1.f; }

inline void check_shape(const ShapeFeature& s, const VoxelCoord& p) {
    for (float v : s.dual_vertex)
        if (!unit_range(v))
            throw InvalidArgument("dual vertex component outside [0,1] at voxel (" + std::to_string(p.i) + "," +
                                  std::to_string(p.j) + "," + std::to_string(p.k) + ")");
    if (!(s.split_weight > 0.f) || !std::isfinite(s.split_weight))
        throw InvalidArgument("split weight must be positive and finite");
    if (s.edge_bits & ~ShapeFeature::kUsedBits) throw InvalidArgument("reserved edge bits set");
}

inline void check_material(const MaterialFeature& m) {
    for (float v : m.channels())
        if (!unit_range(v)) throw InvalidArgument("material channel outside [0,1]");
}

}  // namespace detail

/// Immutable sparse O-Voxel grid. Entries are kept in lexicographic
/// coordinate order; lookups go through a packed-key hash index.
class OVoxelGrid {
public:
    OVoxelGrid() = default;
    explicit OVoxelGrid(std::int32_t resolution) : resolution_(resolution) { check_resolution(); }

    /// Builds a grid from parallel arrays. Entries are sorted into canonical
    /// order; materials may be empty (shape-only grid) or match coords 1:1.
    OVoxelGrid(std::int32_t resolution, std::vector<VoxelCoord> coords, std::vector<ShapeFeature> shape,
               std::vector<MaterialFeature> material = {}, WorldTransform transform = {})
        : resolution_(resolution), transform_(transform) {
        check_resolution();
        if (shape.size() != coords.size()) throw InvalidArgument("shape feature count differs from coordinate count");
        if (!material.empty() && material.size() != coords.size())
            throw InvalidArgument("material is all-or-nothing: count differs from coordinate count");
        for (std::size_t n = 0; n < coords.size(); ++n) {
            if (!coords[n].in_grid(resolution_)) throw InvalidArgument("voxel coordinate outside grid");
            detail::check_shape(shape[n], coords[n]);
            if (!material.empty()) detail::check_material(material[n]);
        }
        std::vector<std::uint32_t> order(coords.size());
        for (std::uint32_t n = 0; n < order.size(); ++n) order[n] = n;
        if (!std::is_sorted(coords.begin(), coords.end())) {
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return coords[a] < coords[b]; });
        }
        coords_.reserve(coords.size());
        shape_.reserve(coords.size());
        material_.reserve(material.size());
        for (auto n : order) {
            coords_.push_back(coords[n]);
            shape_.push_back(shape[n]);
            if (!material.empty()) material_.push_back(material[n]);
        }
        build_index();
    }

    std::int32_t resolution() const { return resolution_; }
    std::size_t size() const { return coords_.size(); }
    bool empty() const { return coords_.empty(); }
    bool has_material() const { return !material_.empty() || (coords_.empty() && material_flag_); }
    const WorldTransform& transform() const { return transform_; }

    std::span<const VoxelCoord> coords() const { return coords_; }
    std::span<const ShapeFeature> shape() const { return shape_; }
    std::span<const MaterialFeature> material() const { return material_; }

    const VoxelCoord& coord(std::size_t n) const { return coords_[n]; }
    const ShapeFeature& shape(std::size_t n) const { return shape_[n]; }
    const MaterialFeature& material(std::size_t n) const {
        if (material_.empty()) throw InvalidState("grid carries no material features");
        return material_[n];
    }

    /// Entry index of an active voxel, or nullopt for inactive / out-of-range coordinates.
    std::optional<std::size_t> find(const VoxelCoord& p) const {
        if (!p.in_grid(resolution_)) return std::nullopt;
        const auto* slot = index_.find(p.key());
        if (!slot) return std::nullopt;
        return *slot;
    }
    bool active(const VoxelCoord& p) const { return find(p).has_value(); }

    /// Copy of this grid with materials attached (one per entry, canonical order).
    OVoxelGrid with_material(std::vector<MaterialFeature> material) const {
        if (material.size() != coords_.size()) throw InvalidArgument("material count differs from voxel count");
        for (const auto& m : material) detail::check_material(m);
        OVoxelGrid g = *this;
        g.material_ = std::move(material);
        g.material_flag_ = true;
        return g;
    }

    OVoxelGrid with_transform(const WorldTransform& t) const {
        OVoxelGrid g = *this;
        g.transform_ = t;
        return g;
    }

    /// Structural equality: resolution, coordinates and features. The world
    /// transform is in-memory metadata and is not compared.
    bool operator==(const OVoxelGrid& o) const {
        return resolution_ == o.resolution_ && coords_ == o.coords_ && shape_ == o.shape_ &&
               material_ == o.material_ && has_material() == o.has_material();
    }

    /// Voxel size in unit-cube coordinates.
    double voxel_size() const { return 1.0 / resolution_; }

    /// Unit-cube position of a voxel-local point.
    Vec3d unit_position(const VoxelCoord& p, const std::array<float, 3>& local) const {
        const double inv = 1.0 / resolution_;
        return {(p.i + double(local[0])) * inv, (p.j + double(local[1])) * inv, (p.k + double(local[2])) * inv};
    }

    /// Empty grid flagged as material-carrying (for L = 0 round trips).
    static OVoxelGrid empty_with_material(std::int32_t resolution) {
        OVoxelGrid g(resolution);
        g.material_flag_ = true;
        return g;
    }

private:
    void check_resolution() const {
        if (resolution_ < 1 || resolution_ > kMaxResolution)
            throw InvalidArgument("resolution must be in [1, 65535], got " + std::to_string(resolution_));
    }
    void build_index() {
        index_ = CoordMap(coords_.size());
        for (std::uint32_t n = 0; n < coords_.size(); ++n)
            if (!index_.try_emplace(coords_[n].key(), n).second)
                throw InvalidArgument("duplicate voxel coordinate");
    }

    std::int32_t resolution_ = 1;
    WorldTransform transform_{};
    std::vector<VoxelCoord> coords_;
    std::vector<ShapeFeature> shape_;
    std::vector<MaterialFeature> material_;
    bool material_flag_ = false;
    CoordMap index_;
};

/// Coarse coordinate set { floor(p / factor) } of the active voxels, sorted
/// and deduplicated. With factor = 16 these are the latent token positions.
inline std::vector<VoxelCoord> downsample_structure(std::span<const VoxelCoord> coords, std::int32_t resolution,
                                                    std::int32_t factor) {
    if (factor <= 0) throw InvalidArgument("downsample factor must be positive");
    if (resolution % factor != 0)
        throw InvalidArgument("downsample factor " + std::to_string(factor) + " does not divide resolution " +
                              std::to_string(resolution));
    std::vector<std::uint64_t> keys;
    keys.reserve(coords.size());
    for (const auto& p : coords) keys.push_back(VoxelCoord{p.i / factor, p.j / factor, p.k / factor}.key());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<VoxelCoord> out;
    out.reserve(keys.size());
    for (auto k : keys) out.push_back(VoxelCoord::from_key(k));
    return out;
}

inline std::vector<VoxelCoord> downsample_structure(const OVoxelGrid& grid, std::int32_t factor) {
    return downsample_structure(grid.coords(), grid.resolution(), factor);
}

}  // namespace ovox
