#pragma once

#include "otguide/image.hpp"
#include "otguide/rng.hpp"

#include <vector>

namespace otguide {

// An axis-aligned square crop, resampled to resolution x resolution.
struct PatchGeometry {
    int x0 = 0;
    int y0 = 0;
    int size = 1;
    int resolution = 1;

    friend bool operator==(const PatchGeometry&, const PatchGeometry&) = default;
};

struct PatchSamplerConfig {
    int size_min = 8;
    int size_max = 32;
    int resolution = 16;
};

struct PatchBatch {
    std::vector<PatchGeometry> geometries;
    std::vector<Image> patches;
};

class PatchSampler {
public:
    explicit PatchSampler(PatchSamplerConfig cfg);

    // Draws n geometries uniformly over size in [size_min, size_max] and over
    // every placement that keeps the crop inside the image.
    std::vector<PatchGeometry> draw(int image_height, int image_width, int n,
                                    RngStream& rng) const;

    const PatchSamplerConfig& config() const noexcept { return cfg_; }

private:
    PatchSamplerConfig cfg_;
};

// Bilinear crop-and-resize with half-pixel centers, sampling clamped to the
// crop. A linear map of the image pixels for a fixed geometry.
Image extract_patch(const Image& image, const PatchGeometry& geometry);

PatchBatch sample_patches(const Image& image, int n, const PatchSampler& sampler, RngStream& rng);

// Adjoint of extract_patch: scatters a patch cotangent back to image space,
// adding into `image_cotangent` so overlapping patches accumulate.
void accumulate_patch_vjp(const PatchGeometry& geometry, const Image& patch_cotangent,
                          Image& image_cotangent);

Image patch_vjp(const PatchGeometry& geometry, const Image& patch_cotangent, int image_height,
                int image_width);

}  // namespace otguide
