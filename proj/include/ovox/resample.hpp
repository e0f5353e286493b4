#pragma once

// Parameter-free shortcut operators between sparse feature grids at
// resolutions N and N/2: space-to-channel averaging on the way down,
// channel-to-space duplication on the way up, plus the child occupancy
// masks that prune the way up.
//
// Children are enumerated in Morton order, octant bit = x + 2y + 4z.

#include <algorithm>
#include <bitset>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace ovox {

/// Sparse map VoxelCoord -> feature row of uniform width, rows kept in
/// lexicographic coordinate order.
template <typename T>
class SparseFeatureGrid {
public:
    SparseFeatureGrid(std::int32_t resolution, std::size_t channels) : resolution_(resolution), channels_(channels) {
        if (resolution < 1 || resolution > kMaxResolution) throw InvalidArgument("resolution must be in [1, 65535]");
        if (channels == 0) throw InvalidArgument("feature width must be positive");
    }

    /// Rows are sorted into coordinate order; `values` holds coords.size() x channels entries.
    SparseFeatureGrid(std::int32_t resolution, std::size_t channels, std::vector<VoxelCoord> coords,
                      std::vector<T> values)
        : SparseFeatureGrid(resolution, channels) {
        if (values.size() != coords.size() * channels)
            throw InvalidArgument("feature array size differs from coords x channels");
        std::vector<std::size_t> order(coords.size());
        for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return coords[a] < coords[b]; });
        coords_.reserve(coords.size());
        values_.reserve(values.size());
        for (std::size_t r = 0; r < order.size(); ++r) {
            const auto& p = coords[order[r]];
            if (!p.in_grid(resolution)) throw InvalidArgument("feature coordinate outside grid");
            if (r > 0 && coords_.back() == p) throw InvalidArgument("duplicate feature coordinate");
            coords_.push_back(p);
            values_.insert(values_.end(), values.begin() + order[r] * channels,
                           values.begin() + (order[r] + 1) * channels);
        }
    }

    std::int32_t resolution() const { return resolution_; }
    std::size_t channels() const { return channels_; }
    std::size_t size() const { return coords_.size(); }
    std::span<const VoxelCoord> coords() const { return coords_; }
    std::span<const T> values() const { return values_; }
    std::span<const T> row(std::size_t n) const { return {values_.data() + n * channels_, channels_}; }

    std::optional<std::size_t> find(const VoxelCoord& p) const {
        auto it = std::lower_bound(coords_.begin(), coords_.end(), p);
        if (it == coords_.end() || *it != p) return std::nullopt;
        return std::size_t(it - coords_.begin());
    }

    bool operator==(const SparseFeatureGrid&) const = default;

private:
    std::int32_t resolution_;
    std::size_t channels_;
    std::vector<VoxelCoord> coords_;
    std::vector<T> values_;
};

using ChildMask = std::bitset<8>;

inline int octant_of(const VoxelCoord& child) { return (child.i & 1) | ((child.j & 1) << 1) | ((child.k & 1) << 2); }

inline VoxelCoord child_of(const VoxelCoord& parent, int octant) {
    return {2 * parent.i + (octant & 1), 2 * parent.j + ((octant >> 1) & 1), 2 * parent.k + ((octant >> 2) & 1)};
}

inline VoxelCoord parent_of(const VoxelCoord& child) { return {child.i / 2, child.j / 2, child.k / 2}; }

/// Exact child occupancy of every parent with at least one active child.
inline std::map<VoxelCoord, ChildMask> occupancy_masks(std::span<const VoxelCoord> fine, std::int32_t resolution) {
    if (resolution % 2 != 0) throw InvalidArgument("occupancy masks need an even fine resolution");
    std::map<VoxelCoord, ChildMask> out;
    for (const auto& p : fine) out[parent_of(p)].set(std::size_t(octant_of(p)));
    return out;
}

template <typename T>
std::map<VoxelCoord, ChildMask> occupancy_masks(const SparseFeatureGrid<T>& fine) {
    return occupancy_masks(fine.coords(), fine.resolution());
}

inline std::map<VoxelCoord, ChildMask> occupancy_masks(const OVoxelGrid& fine) {
    return occupancy_masks(fine.coords(), fine.resolution());
}

/// Every child active under every parent of `coarse`.
template <typename T>
std::map<VoxelCoord, ChildMask> full_masks(const SparseFeatureGrid<T>& coarse) {
    std::map<VoxelCoord, ChildMask> out;
    for (const auto& p : coarse.coords()) out[p].set();
    return out;
}

/// N -> N/2. Children are stacked child-major (8C channels, zeros for
/// inactive children) and averaged in C_out contiguous groups.
template <typename T>
SparseFeatureGrid<T> space_to_channel_down(const SparseFeatureGrid<T>& fine, std::size_t c_out, unsigned threads = 0) {
    const std::size_t c = fine.channels();
    if (fine.resolution() % 2 != 0) throw InvalidArgument("downsampling needs an even resolution");
    if (c_out == 0 || (8 * c) % c_out != 0)
        throw InvalidArgument("8 x C = " + std::to_string(8 * c) + " is not divisible by C_out = " +
                              std::to_string(c_out));
    const std::size_t group = 8 * c / c_out;

    // Fine rows are lexicographic, so children of one parent are not
    // contiguous; gather row indices per parent first.
    std::vector<std::pair<VoxelCoord, std::uint32_t>> keyed(fine.size());
    for (std::size_t n = 0; n < fine.size(); ++n) keyed[n] = {parent_of(fine.coords()[n]), std::uint32_t(n)};
    std::sort(keyed.begin(), keyed.end());
    std::vector<VoxelCoord> parents;
    std::vector<std::size_t> start;
    for (std::size_t n = 0; n < keyed.size(); ++n)
        if (n == 0 || keyed[n].first != keyed[n - 1].first) {
            parents.push_back(keyed[n].first);
            start.push_back(n);
        }
    start.push_back(keyed.size());

    std::vector<T> values(parents.size() * c_out, T(0));
    parallel_for(
        parents.size(),
        [&](std::size_t p) {
            std::vector<T> stacked(8 * c, T(0));
            for (std::size_t s = start[p]; s < start[p + 1]; ++s) {
                const std::uint32_t row = keyed[s].second;
                const int oct = octant_of(fine.coords()[row]);
                const auto src = fine.row(row);
                std::copy(src.begin(), src.end(), stacked.begin() + oct * c);
            }
            for (std::size_t g = 0; g < c_out; ++g) {
                T acc = T(0);
                for (std::size_t q = 0; q < group; ++q) acc += stacked[g * group + q];
                values[p * c_out + g] = acc / T(group);
            }
        },
        256, threads);
    return SparseFeatureGrid<T>(fine.resolution() / 2, c_out, std::move(parents), std::move(values));
}

/// N -> 2N. Each parent's C' channels split into 8 child blocks; each
/// channel of a block is copied into a contiguous group, giving width
/// C_out. Only children set in the parent's mask are emitted; parents
/// without a mask entry emit nothing.
template <typename T>
SparseFeatureGrid<T> channel_to_space_up(const SparseFeatureGrid<T>& coarse,
                                         const std::map<VoxelCoord, ChildMask>& masks, std::size_t c_out) {
    const std::size_t c = coarse.channels();
    if (c % 8 != 0) throw InvalidArgument("C' = " + std::to_string(c) + " is not divisible by 8");
    const std::size_t block = c / 8;
    if (c_out == 0 || c_out % block != 0)
        throw InvalidArgument("C_out = " + std::to_string(c_out) + " is not divisible by C'/8 = " +
                              std::to_string(block));
    const std::size_t repeat = c_out / block;
    if (std::int64_t(coarse.resolution()) * 2 > kMaxResolution) throw InvalidArgument("upsampled resolution too large");
    std::vector<VoxelCoord> coords;
    std::vector<T> values;
    for (std::size_t p = 0; p < coarse.size(); ++p) {
        const auto it = masks.find(coarse.coords()[p]);
        if (it == masks.end()) continue;
        const auto src = coarse.row(p);
        for (int oct = 0; oct < 8; ++oct) {
            if (!it->second.test(std::size_t(oct))) continue;
            coords.push_back(child_of(coarse.coords()[p], oct));
            for (std::size_t ch = 0; ch < c_out; ++ch) values.push_back(src[oct * block + ch / repeat]);
        }
    }
    return SparseFeatureGrid<T>(coarse.resolution() * 2, c_out, std::move(coords), std::move(values));
}

}  // namespace ovox
