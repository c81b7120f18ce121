#include "otguide/config.hpp"

#include "otguide/errors.hpp"
#include "otguide/io.hpp"
#include "otguide/rng.hpp"

#include <charconv>
#include <functional>
#include <limits>

namespace otguide {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
    throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) +
                      "' (expected " + std::string(want) + ")");
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
    Int out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
        bad_value(key, value, "an integer");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() ||
        !std::isfinite(out)) {
        bad_value(key, value, "a finite number");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "true|false");
}

std::vector<std::string> parse_list(std::string_view value) {
    std::vector<std::string> out;
    if (trim(value).empty()) return out;
    while (true) {
        const std::size_t comma = value.find(',');
        out.emplace_back(trim(value.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        value = value.substr(comma + 1);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k > 0) out += ", ";
        out += items[k];
    }
    return out;
}

std::string show(bool b) { return b ? "true" : "false"; }

struct Field {
    std::string_view key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define OTG_INT_FIELD(name, member)                                                        \
    Field {                                                                                \
        name,                                                                              \
            [](RunConfig& c, std::string_view v) {                                         \
                c.member = parse_int<decltype(c.member)>(name, v);                         \
            },                                                                             \
            [](const RunConfig& c) { return std::to_string(c.member); }                    \
    }
#define OTG_REAL_FIELD(name, member)                                                       \
    Field {                                                                                \
        name, [](RunConfig& c, std::string_view v) { c.member = parse_real(name, v); },    \
            [](const RunConfig& c) { return io::format_double(c.member); }                 \
    }
#define OTG_BOOL_FIELD(name, member)                                                       \
    Field {                                                                                \
        name, [](RunConfig& c, std::string_view v) { c.member = parse_bool(name, v); },    \
            [](const RunConfig& c) { return show(c.member); }                              \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        OTG_INT_FIELD("seed", seed),
        OTG_INT_FIELD("repeats", repeats),
        OTG_INT_FIELD("latent_dim", pipeline.latent_dim),
        OTG_INT_FIELD("image_height", pipeline.image_height),
        OTG_INT_FIELD("image_width", pipeline.image_width),
        OTG_INT_FIELD("patch_resolution", pipeline.patch_resolution),
        OTG_INT_FIELD("patch_size_min", pipeline.patch_size_min),
        OTG_INT_FIELD("patch_size_max", pipeline.patch_size_max),
        OTG_INT_FIELD("pool_factor", pipeline.pool),
        OTG_INT_FIELD("embed_dim", pipeline.embed_dim),
        OTG_REAL_FIELD("generator_bias_scale", pipeline.generator_bias_scale),
        Field{"mode", [](RunConfig& c, std::string_view v) { c.mode = parse_mode(v); },
              [](const RunConfig& c) { return std::string(to_string(c.mode)); }},
        Field{"metric", [](RunConfig& c, std::string_view v) { c.metric = parse_metric(v); },
              [](const RunConfig& c) { return std::string(to_string(c.metric)); }},
        OTG_REAL_FIELD("epsilon", sinkhorn.epsilon),
        OTG_INT_FIELD("sinkhorn_max_iterations", sinkhorn.max_iterations),
        OTG_REAL_FIELD("sinkhorn_tolerance", sinkhorn.tolerance),
        OTG_BOOL_FIELD("log_domain", sinkhorn.log_domain),
        OTG_BOOL_FIELD("epsilon_scaling", sinkhorn.epsilon_scaling),
        OTG_BOOL_FIELD("strict", strict),
        OTG_REAL_FIELD("learning_rate", learning_rate),
        OTG_INT_FIELD("iterations", iterations),
        OTG_INT_FIELD("n_patches", n_patches),
        OTG_BOOL_FIELD("resample_each_iteration", resample_each_iteration),
        Field{"prompts", [](RunConfig& c, std::string_view v) { c.prompts_path = v; },
              [](const RunConfig& c) { return c.prompts_path; }},
        Field{"prompt_layout",
              [](RunConfig& c, std::string_view v) {
                  if (v != "random" && v != "antipodal") {
                      bad_value("prompt_layout", v, "random|antipodal");
                  }
                  c.prompt_layout = v;
              },
              [](const RunConfig& c) { return c.prompt_layout; }},
        OTG_INT_FIELD("prompt_count", prompt_count),
        Field{"prompt_labels",
              [](RunConfig& c, std::string_view v) { c.prompt_labels = parse_list(v); },
              [](const RunConfig& c) { return join(c.prompt_labels); }},
        OTG_REAL_FIELD("arrow_scale", arrow_scale),
    };
    return table;
}

#undef OTG_INT_FIELD
#undef OTG_REAL_FIELD
#undef OTG_BOOL_FIELD

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    for (const Field& f : fields()) {
        if (f.key == key) {
            f.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, std::string_view source) {
    RunConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) {
            throw ConfigError(where + "expected 'key = value'");
        }
        try {
            apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path.string());
}

std::string to_manifest(const RunConfig& cfg) {
    std::string out = "# resolved run configuration\n";
    for (const Field& f : fields()) {
        out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    }
    for (const std::string_view stream : {"generator", "encoder", "prompts", "latent", "geometry"}) {
        out += "# stream " + std::string(stream) + " = " +
               std::to_string(RngStream(cfg.seed, stream).key()) + "\n";
    }
    return out;
}

void RunConfig::validate() const {
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    const PipelineConfig& p = pipeline;
    if (p.latent_dim < 1 || p.image_height < 1 || p.image_width < 1 || p.embed_dim < 1) {
        throw ConfigError("latent_dim, image_height, image_width and embed_dim must be >= 1");
    }
    if (p.patch_resolution < 1 || p.pool < 1 || p.patch_resolution % p.pool != 0) {
        throw ConfigError("pool_factor must divide patch_resolution");
    }
    if (p.patch_size_min < 1 || p.patch_size_max < p.patch_size_min) {
        throw ConfigError("need 1 <= patch_size_min <= patch_size_max");
    }
    if (p.patch_size_max > std::min(p.image_height, p.image_width)) {
        throw ConfigError("patch_size_max exceeds the image");
    }
    if (!(p.generator_bias_scale >= 0.0)) throw ConfigError("generator_bias_scale must be >= 0");
    sinkhorn.validate();
    optimizer(seed).validate();
    if (prompts_path.empty()) {
        if (prompt_layout == "antipodal" && prompt_count != 2) {
            throw ConfigError("prompt_layout = antipodal requires prompt_count = 2");
        }
        if (prompt_count < 1) throw ConfigError("prompt_count must be >= 1");
        if (!prompt_labels.empty() &&
            prompt_labels.size() != static_cast<std::size_t>(prompt_count)) {
            throw ConfigError("prompt_labels must list one label per prompt");
        }
    }
}

AggregationMode RunConfig::aggregation() const {
    if (mode == AggregationMode::Kind::Mean) return AggregationMode::mean();
    return AggregationMode::optimal_transport(sinkhorn, strict);
}

OptimizerConfig RunConfig::optimizer(std::uint64_t run_seed) const {
    OptimizerConfig out;
    out.learning_rate = learning_rate;
    out.iterations = iterations;
    out.n_patches = n_patches;
    out.mode = aggregation();
    out.seed = run_seed;
    out.resample_each_iteration = resample_each_iteration;
    return out;
}

PromptSet RunConfig::prompts(std::uint64_t run_seed) const {
    PromptSet base = [&] {
        if (!prompts_path.empty()) return PromptSet::from_vectors(io::read_embeddings(prompts_path));
        if (prompt_layout == "antipodal") return PromptSet::antipodal(pipeline.embed_dim, run_seed);
        return PromptSet::random(prompt_count, pipeline.embed_dim, run_seed);
    }();
    if (prompt_labels.empty()) return base;
    if (prompt_labels.size() != base.size()) {
        throw ConfigError("prompt_labels must list one label per prompt");
    }
    return PromptSet(prompt_labels, base.embeddings());
}

}  // namespace otguide
