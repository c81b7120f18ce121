#include "otguide/patches.hpp"

#include "otguide/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace otguide {

namespace {

struct Tap {
    int lo;
    int hi;
    double w_lo;
    double w_hi;
};

// One axis of the resize: output index r samples the crop at
// ((2r + 1) size - p) / (2p), clamped to [0, size - 1].
std::vector<Tap> axis_taps(int size, int resolution) {
    std::vector<Tap> taps(static_cast<std::size_t>(resolution));
    for (int r = 0; r < resolution; ++r) {
        const double numerator = static_cast<double>((2 * r + 1) * size - resolution);
        const double src = std::clamp(numerator / (2.0 * resolution), 0.0, size - 1.0);
        const int lo = static_cast<int>(std::floor(src));
        const int hi = std::min(lo + 1, size - 1);
        const double t = src - lo;
        taps[static_cast<std::size_t>(r)] = Tap{lo, hi, 1.0 - t, t};
    }
    return taps;
}

void require_inside(const PatchGeometry& g, int height, int width) {
    if (g.size < 1 || g.resolution < 1 || g.x0 < 0 || g.y0 < 0 || g.x0 + g.size > width ||
        g.y0 + g.size > height) {
        throw ShapeError("patch (" + std::to_string(g.x0) + "," + std::to_string(g.y0) +
                         ", size " + std::to_string(g.size) + ") does not fit a " +
                         std::to_string(height) + "x" + std::to_string(width) + " image");
    }
}

}  // namespace

PatchSampler::PatchSampler(PatchSamplerConfig cfg) : cfg_(cfg) {
    if (cfg_.size_min < 1 || cfg_.size_max < cfg_.size_min || cfg_.resolution < 1) {
        throw ConfigError("patch sampler needs 1 <= size_min <= size_max and resolution >= 1");
    }
}

std::vector<PatchGeometry> PatchSampler::draw(int image_height, int image_width, int n,
                                              RngStream& rng) const {
    if (n < 1) {
        throw ArgumentError("need at least one patch");
    }
    if (cfg_.size_max > std::min(image_height, image_width)) {
        throw ConfigError("patch size_max " + std::to_string(cfg_.size_max) +
                          " exceeds the image (" + std::to_string(image_height) + "x" +
                          std::to_string(image_width) + ")");
    }
    std::vector<PatchGeometry> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        PatchGeometry g;
        g.size = static_cast<int>(rng.uniform_int(cfg_.size_min, cfg_.size_max));
        g.x0 = static_cast<int>(rng.uniform_int(0, image_width - g.size));
        g.y0 = static_cast<int>(rng.uniform_int(0, image_height - g.size));
        g.resolution = cfg_.resolution;
        out.push_back(g);
    }
    return out;
}

Image extract_patch(const Image& image, const PatchGeometry& g) {
    require_inside(g, image.height(), image.width());
    const std::vector<Tap> taps = axis_taps(g.size, g.resolution);
    Image patch(g.resolution, g.resolution);
    for (int r = 0; r < g.resolution; ++r) {
        const Tap& ty = taps[static_cast<std::size_t>(r)];
        for (int c = 0; c < g.resolution; ++c) {
            const Tap& tx = taps[static_cast<std::size_t>(c)];
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                const double top = tx.w_lo * image.at(g.y0 + ty.lo, g.x0 + tx.lo, ch) +
                                   tx.w_hi * image.at(g.y0 + ty.lo, g.x0 + tx.hi, ch);
                const double bottom = tx.w_lo * image.at(g.y0 + ty.hi, g.x0 + tx.lo, ch) +
                                      tx.w_hi * image.at(g.y0 + ty.hi, g.x0 + tx.hi, ch);
                patch.at(r, c, ch) = ty.w_lo * top + ty.w_hi * bottom;
            }
        }
    }
    return patch;
}

PatchBatch sample_patches(const Image& image, int n, const PatchSampler& sampler, RngStream& rng) {
    PatchBatch batch;
    batch.geometries = sampler.draw(image.height(), image.width(), n, rng);
    batch.patches.reserve(batch.geometries.size());
    for (const PatchGeometry& g : batch.geometries) batch.patches.push_back(extract_patch(image, g));
    return batch;
}

void accumulate_patch_vjp(const PatchGeometry& g, const Image& patch_cotangent,
                          Image& image_cotangent) {
    require_inside(g, image_cotangent.height(), image_cotangent.width());
    if (patch_cotangent.height() != g.resolution || patch_cotangent.width() != g.resolution) {
        throw ShapeError("patch cotangent is " + std::to_string(patch_cotangent.height()) + "x" +
                         std::to_string(patch_cotangent.width()) + ", expected resolution " +
                         std::to_string(g.resolution));
    }
    const std::vector<Tap> taps = axis_taps(g.size, g.resolution);
    for (int r = 0; r < g.resolution; ++r) {
        const Tap& ty = taps[static_cast<std::size_t>(r)];
        for (int c = 0; c < g.resolution; ++c) {
            const Tap& tx = taps[static_cast<std::size_t>(c)];
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                const double w = patch_cotangent.at(r, c, ch);
                const double top = ty.w_lo * w;
                const double bottom = ty.w_hi * w;
                image_cotangent.at(g.y0 + ty.lo, g.x0 + tx.lo, ch) += tx.w_lo * top;
                image_cotangent.at(g.y0 + ty.lo, g.x0 + tx.hi, ch) += tx.w_hi * top;
                image_cotangent.at(g.y0 + ty.hi, g.x0 + tx.lo, ch) += tx.w_lo * bottom;
                image_cotangent.at(g.y0 + ty.hi, g.x0 + tx.hi, ch) += tx.w_hi * bottom;
            }
        }
    }
}

Image patch_vjp(const PatchGeometry& geometry, const Image& patch_cotangent, int image_height,
                int image_width) {
    Image out(image_height, image_width);
    accumulate_patch_vjp(geometry, patch_cotangent, out);
    return out;
}

}  // namespace otguide
