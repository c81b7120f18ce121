#include "otguide/pipeline.hpp"

#include "otguide/diagnostics.hpp"
#include "otguide/errors.hpp"
#include "otguide/rng.hpp"

#include <string>
#include <utility>

namespace otguide {

namespace {

// Runs `fn`, prefixing any library error with the stage label while keeping
// its type.
template <typename Fn>
decltype(auto) in_stage(const std::string& label, Fn&& fn) {
    const auto with = [&label](const std::exception& e) { return label + ": " + e.what(); };
    try {
        return std::forward<Fn>(fn)();
    } catch (const NonConvergenceError& e) {
        throw NonConvergenceError(with(e), e.iterations());
    } catch (const SingularGradientError& e) {
        throw SingularGradientError(with(e));
    } catch (const NumericalError& e) {
        throw NumericalError(with(e));
    } catch (const ShapeError& e) {
        throw ShapeError(with(e));
    } catch (const DomainError& e) {
        throw DomainError(with(e));
    } catch (const ConfigError& e) {
        throw ConfigError(with(e));
    } catch (const ArgumentError& e) {
        throw ArgumentError(with(e));
    } catch (const InputError& e) {
        throw InputError(with(e));
    }
}

}  // namespace

Pipeline Pipeline::build(const PipelineConfig& cfg, PromptSet prompts, Metric metric,
                         std::uint64_t seed) {
    if (prompts.dim() != cfg.embed_dim) {
        throw ConfigError("prompt dimension " + std::to_string(prompts.dim()) +
                          " does not match embed_dim " + std::to_string(cfg.embed_dim));
    }
    return Pipeline{
        ToyGenerator::from_seed({cfg.latent_dim, cfg.image_height, cfg.image_width}, seed,
                                cfg.generator_bias_scale),
        PatchSampler({cfg.patch_size_min, cfg.patch_size_max, cfg.patch_resolution}),
        ToyEncoder::from_seed({cfg.patch_resolution, cfg.pool, cfg.embed_dim}, seed),
        std::move(prompts),
        metric,
    };
}

LatentState initial_latent(int latent_dim, std::uint64_t seed) {
    if (latent_dim < 1) {
        throw ConfigError("latent_dim must be >= 1");
    }
    RngStream rng(seed, "latent");
    Eigen::VectorXd z(latent_dim);
    for (int k = 0; k < latent_dim; ++k) z[k] = rng.normal();
    return LatentState{std::move(z)};
}

ForwardCache forward_loss(const Pipeline& pipeline, const LatentState& z,
                          std::span<const PatchGeometry> geometries, const AggregationMode& mode) {
    if (geometries.empty()) {
        throw ArgumentError("forward_loss needs at least one patch geometry");
    }
    ForwardCache cache;
    cache.z = z;
    cache.image = in_stage("generator", [&] { return pipeline.generator.generate(z); });
    cache.geometries.assign(geometries.begin(), geometries.end());
    cache.patches.reserve(geometries.size());
    cache.encodings.reserve(geometries.size());
    cache.embeddings.reserve(geometries.size());
    for (std::size_t i = 0; i < geometries.size(); ++i) {
        const std::string label = "patch " + std::to_string(i);
        cache.patches.push_back(
            in_stage("sampler, " + label, [&] { return extract_patch(cache.image, geometries[i]); }));
        cache.encodings.push_back(
            in_stage("encoder, " + label, [&] { return pipeline.encoder.encode(cache.patches[i]); }));
        cache.embeddings.push_back(cache.encodings.back().embedding);
    }
    cache.loss = in_stage("loss", [&] {
        return aggregate_loss(mode, cache.embeddings, pipeline.prompts.embeddings(), pipeline.metric);
    });
    return cache;
}

Eigen::VectorXd backward(const Pipeline& pipeline, const ForwardCache& cache) {
    const std::size_t n = cache.geometries.size();
    if (cache.loss.patch_gradients.size() != n || cache.encodings.size() != n) {
        throw ShapeError("backward: forward cache is incomplete");
    }
    Image image_cotangent(cache.image.height(), cache.image.width());
    for (std::size_t i = 0; i < n; ++i) {
        const Image patch_cotangent =
            pipeline.encoder.vjp(cache.encodings[i], cache.loss.patch_gradients[i]);
        accumulate_patch_vjp(cache.geometries[i], patch_cotangent, image_cotangent);
    }
    return pipeline.generator.vjp(cache.image, image_cotangent);
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be a positive finite number");
    }
    if (iterations < 1) {
        throw ConfigError("iterations must be >= 1");
    }
    if (n_patches < 1) {
        throw ConfigError("n_patches must be >= 1");
    }
    if (!mode.is_mean()) mode.sinkhorn.validate();
}

OptimizeResult optimize(const OptimizerConfig& cfg, const Pipeline& pipeline,
                        const LatentState& z0) {
    cfg.validate();
    const GeneratorShape& shape = pipeline.generator.shape();
    if (z0.z.size() != shape.latent_dim) {
        throw ShapeError("initial latent does not match the generator");
    }

    RngStream geometry_rng(cfg.seed, "geometry");
    const auto draw = [&] {
        return pipeline.sampler.draw(shape.height, shape.width, cfg.n_patches, geometry_rng);
    };

    OptimizeResult result;
    result.z = z0;
    result.trajectory.rows.reserve(static_cast<std::size_t>(cfg.iterations));
    std::vector<PatchGeometry> geometries = draw();

    for (int step = 0; step < cfg.iterations; ++step) {
        if (step > 0 && cfg.resample_each_iteration) geometries = draw();
        ForwardCache cache;
        Eigen::VectorXd grad;
        try {
            cache = forward_loss(pipeline, result.z, geometries, cfg.mode);
            grad = backward(pipeline, cache);
        } catch (const NonConvergenceError& e) {
            throw NonConvergenceError("iteration " + std::to_string(step) + ": " + e.what(),
                                      e.iterations());
        }

        TrajectoryRow row;
        row.iteration = step;
        row.loss = cache.loss.value;
        row.transport_cost = cache.loss.transport_cost;
        row.marginal_error = cache.loss.marginal_error;
        row.counts = assign_patches(cache.embeddings, pipeline.prompts, pipeline.metric).counts;
        result.trajectory.rows.push_back(std::move(row));

        result.z.z -= cfg.learning_rate * grad;
    }

    if (cfg.resample_each_iteration) geometries = draw();
    result.final_state = forward_loss(pipeline, result.z, geometries, cfg.mode);
    return result;
}

}  // namespace otguide
