#pragma once

#include "otguide/encoder.hpp"
#include "otguide/image.hpp"
#include "otguide/loss.hpp"
#include "otguide/patches.hpp"
#include "otguide/prompts.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace otguide {

struct PipelineConfig {
    int latent_dim = 16;
    int image_height = 32;
    int image_width = 32;
    int patch_resolution = 16;
    int patch_size_min = 8;
    int patch_size_max = 32;
    int pool = 2;
    int embed_dim = 32;
    double generator_bias_scale = 0.1;
};

// latent -> generator -> patch sampler -> encoder, against a fixed prompt set.
struct Pipeline {
    ToyGenerator generator;
    PatchSampler sampler;
    ToyEncoder encoder;
    PromptSet prompts;
    Metric metric = Metric::Cosine;

    // Generator and encoder weights come from separate named streams of `seed`.
    static Pipeline build(const PipelineConfig& cfg, PromptSet prompts, Metric metric,
                          std::uint64_t seed);
};

// z0 ~ N(0, I) from the "latent" stream of `seed`.
LatentState initial_latent(int latent_dim, std::uint64_t seed);

// Everything the backward pass reuses from a forward evaluation.
struct ForwardCache {
    LatentState z;
    Image image;
    std::vector<PatchGeometry> geometries;
    std::vector<Image> patches;
    std::vector<Encoding> encodings;
    EmbeddingList embeddings;
    LossReport loss;
};

/// Loss at z for fixed patch geometries. Stage failures are re-raised with
/// the stage name prepended.
ForwardCache forward_loss(const Pipeline& pipeline, const LatentState& z,
                          std::span<const PatchGeometry> geometries, const AggregationMode& mode);

/// Gradient of the forward loss with respect to z: envelope gradients on the
/// patch embeddings, then the encoder, crop and generator adjoints. Patch
/// contributions are accumulated in index order.
Eigen::VectorXd backward(const Pipeline& pipeline, const ForwardCache& cache);

struct OptimizerConfig {
    double learning_rate = 0.05;
    int iterations = 200;
    int n_patches = 16;
    AggregationMode mode = AggregationMode::optimal_transport({});
    std::uint64_t seed = 0;
    // Redraw geometries at every step; otherwise one draw is reused throughout.
    bool resample_each_iteration = true;

    void validate() const;
};

struct TrajectoryRow {
    int iteration = 0;
    double loss = 0.0;
    double transport_cost = 0.0;
    double marginal_error = 0.0;
    std::vector<int> counts;  // closest-prompt counts of this step's patches
};

struct TrajectoryRecord {
    std::vector<TrajectoryRow> rows;
};

struct OptimizeResult {
    LatentState z;
    TrajectoryRecord trajectory;
    // Forward evaluation at the final z on the patches drawn after the last
    // step (the frozen ones when resampling is off).
    ForwardCache final_state;
};

/// Plain gradient descent z <- z - lr * grad F(z). Geometries come from the
/// "geometry" stream of cfg.seed, so two runs differing only in mode see the
/// same patches.
OptimizeResult optimize(const OptimizerConfig& cfg, const Pipeline& pipeline,
                        const LatentState& z0);

}  // namespace otguide
