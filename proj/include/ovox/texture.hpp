#pragma once

// Linear-float images with box-filtered mip chains and filtered sampling.
//
// Texture coordinates follow the OBJ convention: u grows to the right, v
// grows upwards, image row 0 is the top. Wrapping is repeat.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "vec.hpp"

namespace ovox {

struct Image {
    int width = 0;
    int height = 0;
    int channels = 4;
    std::vector<float> data;  // row-major, interleaved

    Image() = default;
    Image(int w, int h, int c, float fill = 0.f) : width(w), height(h), channels(c), data(std::size_t(w) * h * c, fill) {
        if (w <= 0 || h <= 0 || c <= 0 || c > 4) throw InvalidArgument("image dimensions must be positive, channels 1-4");
    }

    float& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * channels + c]; }
    float at(int x, int y, int c) const { return data[(std::size_t(y) * width + x) * channels + c]; }

    /// Channel value with missing channels filled glTF-style (alpha 1, colour 0).
    float channel(int x, int y, int c) const {
        if (c < channels) return at(x, y, c);
        if (channels == 1 && c < 3) return at(x, y, 0);
        return c == 3 ? 1.f : 0.f;
    }
    bool operator==(const Image&) const = default;
};

inline float srgb_to_linear(float c) {
    return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

inline float linear_to_srgb(float c) {
    c = std::clamp(c, 0.f, 1.f);
    return c <= 0.0031308f ? c * 12.92f : 1.055f * std::pow(c, 1.f / 2.4f) - 0.055f;
}

/// Level 0 is the source; level k+1 halves each dimension (floor, min 1)
/// and averages the source texels it covers.
class MipChain {
public:
    MipChain() = default;
    explicit MipChain(Image base) {
        levels_.push_back(std::move(base));
        while (levels_.back().width > 1 || levels_.back().height > 1) levels_.push_back(downsample(levels_.back()));
    }

    std::size_t levels() const { return levels_.size(); }
    const Image& level(std::size_t k) const { return levels_[k]; }
    int width() const { return levels_.empty() ? 0 : levels_[0].width; }
    int height() const { return levels_.empty() ? 0 : levels_[0].height; }

    /// Bilinear lookup at one level (4 channels, see Image::channel).
    std::array<float, 4> bilinear(std::size_t k, const Vec2d& uv) const {
        const Image& img = levels_[std::min(k, levels_.size() - 1)];
        const double s = uv.u * img.width - 0.5;
        const double t = (1.0 - uv.v) * img.height - 0.5;
        const double fs = std::floor(s), ft = std::floor(t);
        const double ws = s - fs, wt = t - ft;
        auto wrap = [](long long i, int n) { return int(((i % n) + n) % n); };
        const int x0 = wrap((long long)fs, img.width), x1 = wrap((long long)fs + 1, img.width);
        const int y0 = wrap((long long)ft, img.height), y1 = wrap((long long)ft + 1, img.height);
        std::array<float, 4> out{};
        for (int c = 0; c < 4; ++c) {
            const double top = (1 - ws) * img.channel(x0, y0, c) + ws * img.channel(x1, y0, c);
            const double bot = (1 - ws) * img.channel(x0, y1, c) + ws * img.channel(x1, y1, c);
            out[c] = float((1 - wt) * top + wt * bot);
        }
        return out;
    }

    /// Bilinear within the two nearest levels, linear between them.
    std::array<float, 4> sample(const Vec2d& uv, double level) const {
        if (levels_.empty()) throw InvalidState("empty mip chain");
        const double max_level = double(levels_.size() - 1);
        level = std::clamp(level, 0.0, max_level);
        const auto k0 = std::size_t(std::floor(level));
        const double f = level - double(k0);
        auto a = bilinear(k0, uv);
        if (f == 0.0 || k0 + 1 >= levels_.size()) return a;
        const auto b = bilinear(k0 + 1, uv);
        for (int c = 0; c < 4; ++c) a[c] = float((1 - f) * a[c] + f * b[c]);
        return a;
    }

private:
    static Image downsample(const Image& src) {
        const int w = std::max(1, src.width / 2), h = std::max(1, src.height / 2);
        Image dst(w, h, src.channels);
        for (int y = 0; y < h; ++y) {
            const int y0 = int(std::int64_t(y) * src.height / h), y1 = int(std::int64_t(y + 1) * src.height / h);
            for (int x = 0; x < w; ++x) {
                const int x0 = int(std::int64_t(x) * src.width / w), x1 = int(std::int64_t(x + 1) * src.width / w);
                const double inv = 1.0 / double((y1 - y0) * (x1 - x0));
                for (int c = 0; c < src.channels; ++c) {
                    double acc = 0;
                    for (int sy = y0; sy < y1; ++sy)
                        for (int sx = x0; sx < x1; ++sx) acc += src.at(sx, sy, c);
                    dst.at(x, y, c) = float(acc * inv);
                }
            }
        }
        return dst;
    }

    std::vector<Image> levels_;
};

/// PBR texture maps of one material. Base colour is linear RGBA (already
/// sRGB-decoded); metallic-roughness uses glTF packing (G roughness, B metallic).
struct TextureSet {
    std::optional<MipChain> base_color;
    std::optional<MipChain> metallic_roughness;
};

/// Factors multiply the texture samples, glTF style.
struct PbrMaterial {
    std::array<float, 4> base_color_factor{1.f, 1.f, 1.f, 1.f};
    float metallic_factor = 0.f;
    float roughness_factor = 1.f;
    TextureSet textures;
};

/// Mip level whose texel footprint matches one voxel:
///   max(0, log2(voxel_size * tex_dim * sqrt(uv_area / world_area))).
/// Zero UV area yields level 0 and sets *degenerate.
inline double mip_level(double world_area, double uv_area, double voxel_size, double tex_dim,
                        bool* degenerate = nullptr) {
    if (degenerate) *degenerate = false;
    if (!(uv_area > 0.0) || !(world_area > 0.0)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    const double ratio = voxel_size * tex_dim * std::sqrt(uv_area / world_area);
    return std::max(0.0, std::log2(ratio));
}

}  // namespace ovox
