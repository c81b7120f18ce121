#pragma once

#include "otguide/loss.hpp"
#include "otguide/measures.hpp"
#include "otguide/pipeline.hpp"
#include "otguide/prompts.hpp"
#include "otguide/sinkhorn.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace otguide {

// Every knob of a run. Parsed from flat `key = value` text (with `#`
// comments); unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;
    int repeats = 1;  // compare: seeds seed .. seed + repeats - 1

    PipelineConfig pipeline;

    AggregationMode::Kind mode = AggregationMode::Kind::OptimalTransport;
    Metric metric = Metric::Cosine;
    SinkhornConfig sinkhorn;
    bool strict = false;

    double learning_rate = 0.05;
    int iterations = 200;
    int n_patches = 16;
    bool resample_each_iteration = true;

    std::string prompts_path;             // CSV of prompt vectors; empty -> generated
    std::string prompt_layout = "random";  // random | antipodal
    int prompt_count = 2;
    std::vector<std::string> prompt_labels;

    double arrow_scale = 0.0;  // <= 0: automatic

    // Validates every field; throws ConfigError on the first violation.
    void validate() const;

    AggregationMode aggregation() const;
    OptimizerConfig optimizer(std::uint64_t run_seed) const;
    // Generated prompts are drawn from the "prompts" stream of run_seed.
    PromptSet prompts(std::uint64_t run_seed) const;
};

// Sets one key from its text value; throws ConfigError for unknown keys or
// unparsable values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

RunConfig parse_config(std::string_view text, std::string_view source);
RunConfig load_config(const std::filesystem::path& path);

// Canonical `key = value` text of every field in a fixed order, followed by
// the derived random-stream keys as comments. Parses back to the same config.
std::string to_manifest(const RunConfig& cfg);

}  // namespace otguide
