#include "otguide/cli.hpp"

#include "otguide/config.hpp"
#include "otguide/diagnostics.hpp"
#include "otguide/errors.hpp"
#include "otguide/io.hpp"
#include "otguide/pipeline.hpp"
#include "otguide/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace otguide::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    std::optional<std::string> mode;
    bool strict = false;
    std::vector<std::string> settings;  // --set key=value
};

void add_common(CLI::App& cmd, CommonFlags& flags, const std::string& default_out) {
    flags.out_dir = default_out;
    cmd.add_option("--config", flags.config_path, "run configuration (key = value)");
    cmd.add_option("--out", flags.out_dir, "output directory")->capture_default_str();
    cmd.add_option("--seed", flags.seed, "override the config seed");
    cmd.add_option("--epsilon", flags.epsilon, "entropic regularization strength");
    cmd.add_option("--mode", flags.mode, "aggregation: ot|mean");
    cmd.add_flag("--strict", flags.strict, "treat Sinkhorn nonconvergence as fatal (exit 3)");
    cmd.add_option("--set", flags.settings, "override any config key, as key=value");
}

RunConfig resolve(const CommonFlags& flags) {
    RunConfig cfg = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.epsilon) cfg.sinkhorn.epsilon = *flags.epsilon;
    if (flags.mode) cfg.mode = parse_mode(*flags.mode);
    if (flags.strict) cfg.strict = true;
    for (const std::string& kv : flags.settings) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        }
        apply_setting(cfg, std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

fs::path prepare_out(const std::string& dir) {
    const fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return out;
}

WeightVector read_weights(const std::string& path) {
    const Eigen::MatrixXd m = io::read_csv_matrix(path);
    Eigen::VectorXd flat(m.size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat[k++] = m(i, j);
    }
    return WeightVector(std::move(flat));
}

struct RunOutcome {
    PromptSet prompts;
    OptimizeResult result;
    AssignmentReport assignment;
};

RunOutcome run_once(const RunConfig& cfg, std::uint64_t seed) {
    PromptSet prompts = cfg.prompts(seed);
    const Pipeline pipeline = Pipeline::build(cfg.pipeline, prompts, cfg.metric, seed);
    OptimizeResult result =
        optimize(cfg.optimizer(seed), pipeline, initial_latent(cfg.pipeline.latent_dim, seed));
    AssignmentReport assignment =
        assign_patches(result.final_state.embeddings, pipeline.prompts, cfg.metric);
    return RunOutcome{std::move(prompts), std::move(result), std::move(assignment)};
}

std::string counts_text(const std::vector<int>& counts) {
    std::string text;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (j > 0) text += '/';
        text += std::to_string(counts[j]);
    }
    return text;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string cost_path;
    std::string a_path;
    std::string b_path;
    std::optional<int> max_iterations;
    std::optional<double> tolerance;
    bool plain = false;
};

int cmd_solve(const SolveArgs& args, const CommonFlags& flags, std::ostream& out) {
    const RunConfig cfg = resolve(flags);
    const CostMatrix cost(io::read_csv_matrix(args.cost_path));
    const WeightVector a = args.a_path.empty()
                               ? uniform_weights(static_cast<std::size_t>(cost.rows()))
                               : read_weights(args.a_path);
    const WeightVector b = args.b_path.empty()
                               ? uniform_weights(static_cast<std::size_t>(cost.cols()))
                               : read_weights(args.b_path);

    SinkhornConfig sk = cfg.sinkhorn;
    if (args.max_iterations) sk.max_iterations = *args.max_iterations;
    if (args.tolerance) sk.tolerance = *args.tolerance;
    if (args.plain) sk.log_domain = false;
    sk.validate();

    SinkhornSolution sol = [&] {
        if (cfg.mode != AggregationMode::Kind::Mean) return sinkhorn_solve(a, b, cost, sk);
        if (a.size() != cost.rows() || b.size() != cost.cols()) {
            throw ShapeError("marginals do not match the cost matrix");
        }
        Coupling plan(a.values() * b.values().transpose());
        SinkhornSolution s{plan, Eigen::VectorXd::Zero(a.size()), Eigen::VectorXd::Zero(b.size())};
        s.transport_cost = cost.entries().cwiseProduct(plan.plan()).sum();
        s.reg_objective = s.transport_cost;
        s.converged = true;
        s.marginal_error = check_marginals(plan, a, b);
        return s;
    }();

    const fs::path dir = prepare_out(flags.out_dir);
    io::write_csv_matrix(dir / "plan.csv", sol.plan.plan());
    nlohmann::ordered_json summary;
    summary["epsilon"] = sk.epsilon;
    summary["iterations"] = sol.iterations_used;
    summary["transport_cost"] = sol.transport_cost;
    summary["reg_objective"] = sol.reg_objective;
    summary["marginal_error"] = sol.marginal_error;
    summary["converged"] = sol.converged;
    const std::string line = summary.dump();
    io::write_text(dir / "summary.json", line + "\n");
    out << line << '\n';

    if (cfg.strict && !sol.converged) {
        throw NonConvergenceError("sinkhorn did not converge within " +
                                      std::to_string(sk.max_iterations) + " iterations",
                                  sol.iterations_used);
    }
    return kSuccess;
}

int cmd_optimize(const CommonFlags& flags, std::ostream& out) {
    const RunConfig cfg = resolve(flags);
    const fs::path dir = prepare_out(flags.out_dir);
    io::write_text(dir / "manifest.txt", to_manifest(cfg));

    const RunOutcome run = run_once(cfg, cfg.seed);
    const ForwardCache& final_state = run.result.final_state;
    io::write_ppm(dir / "image.ppm", final_state.image);
    io::write_text(dir / "trajectory.csv", io::trajectory_csv(run.result.trajectory, run.prompts.size()));
    io::write_text(dir / "assignment.csv", io::assignment_csv(run.assignment));
    io::write_embeddings(dir / "latent.csv", std::vector<Embedding>{run.result.z.z});
    io::write_embeddings(dir / "patch_embeddings.csv", final_state.embeddings);
    io::write_embeddings(dir / "prompts.csv", run.prompts.embeddings());

    const BalanceMetrics balance = balance_metrics(run.assignment);
    out << "mode=" << to_string(cfg.mode) << " iterations=" << cfg.iterations
        << " final_loss=" << io::format_double(final_state.loss.value)
        << " counts=" << counts_text(run.assignment.counts) << " min_count=" << balance.min_count
        << " normalized_entropy=" << io::format_double(balance.normalized_entropy) << '\n';
    return kSuccess;
}

struct DiagnoseArgs {
    std::string embeddings_path;
    std::string latent_path;
    std::optional<double> arrow_scale;
};

int cmd_diagnose(const DiagnoseArgs& args, const CommonFlags& flags, std::ostream& out,
                 std::ostream& err) {
    RunConfig cfg = resolve(flags);
    if (args.arrow_scale) cfg.arrow_scale = *args.arrow_scale;
    const fs::path dir = prepare_out(flags.out_dir);

    PromptSet prompts = cfg.prompts(cfg.seed);
    EmbeddingList us;
    std::string source;
    if (!args.embeddings_path.empty()) {
        us = io::read_embeddings(args.embeddings_path);
        source = "embeddings " + args.embeddings_path;
    } else if (!args.latent_path.empty()) {
        const EmbeddingList rows = io::read_embeddings(args.latent_path);
        if (rows.size() != 1) {
            throw InputError(args.latent_path + ": expected a single latent row");
        }
        const Pipeline pipeline = Pipeline::build(cfg.pipeline, prompts, cfg.metric, cfg.seed);
        RngStream rng(cfg.seed, "evaluation");
        const Image image = pipeline.generator.generate(LatentState{rows.front()});
        const PatchBatch batch = sample_patches(image, cfg.n_patches, pipeline.sampler, rng);
        for (const Image& patch : batch.patches) us.push_back(pipeline.encoder.encode(patch).embedding);
        source = "latent " + args.latent_path;
    } else {
        RunOutcome run = run_once(cfg, cfg.seed);
        us = std::move(run.result.final_state.embeddings);
        source = "optimized run";
    }
    for (const Embedding& u : us) {
        if (u.size() != prompts.dim()) {
            throw ShapeError("patch embeddings have dimension " + std::to_string(u.size()) +
                             " but prompts have " + std::to_string(prompts.dim()));
        }
    }

    const TangentReport report = tangent_report(us, prompts, cfg.metric, cfg.aggregation());
    io::write_text(dir / "manifest.txt", to_manifest(cfg) + "# diagnose source = " + source + "\n");
    io::write_text(dir / "tangent.csv", io::tangent_csv(report));
    io::write_csv_matrix(dir / "plan.csv", report.coupling.plan());

    out << "mode=" << to_string(report.mode) << " objective=" << report.objective
        << " patches=" << us.size() << " prompts=" << prompts.size();
    if (prompts.size() >= 2) {
        QuiverOptions options;
        options.arrow_scale = cfg.arrow_scale;
        io::write_text(dir / "tangent.svg", render_tangent_svg(report, prompts.labels(), options));
        out << " mix_ratio_stddev=" << io::format_double(mix_ratio_stddev(report.coupling));
    } else {
        err << "diagnose: the cost-plane plot needs at least two prompts; wrote tangent.csv only\n";
    }
    out << '\n';
    return kSuccess;
}

int cmd_compare(const CommonFlags& flags, std::ostream& out) {
    const RunConfig cfg = resolve(flags);
    const fs::path dir = prepare_out(flags.out_dir);
    io::write_text(dir / "manifest.txt", to_manifest(cfg));

    std::string table = "seed,mode,min_count,normalized_entropy,mix_ratio_stddev,final_loss";
    const std::size_t m = cfg.prompts(cfg.seed).size();
    for (std::size_t j = 0; j < m; ++j) table += ",count_" + std::to_string(j);
    table += '\n';

    struct Totals {
        double min_count = 0.0;
        double entropy = 0.0;
    };
    Totals totals[2];
    const AggregationMode::Kind kinds[2] = {AggregationMode::Kind::OptimalTransport,
                                            AggregationMode::Kind::Mean};
    for (int r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
        for (int k = 0; k < 2; ++k) {
            RunConfig variant = cfg;
            variant.mode = kinds[k];
            const RunOutcome run = run_once(variant, seed);
            const std::string tag = std::string(to_string(kinds[k])) + "_seed" + std::to_string(seed);
            io::write_text(dir / ("trajectory_" + tag + ".csv"),
                           io::trajectory_csv(run.result.trajectory, run.prompts.size()));
            io::write_text(dir / ("assignment_" + tag + ".csv"), io::assignment_csv(run.assignment));

            const BalanceMetrics balance = balance_metrics(run.assignment);
            const double spread = m >= 2 ? mix_ratio_stddev(run.result.final_state.loss.coupling) : 0.0;
            totals[k].min_count += balance.min_count;
            totals[k].entropy += balance.normalized_entropy;
            table += std::to_string(seed) + ',' + std::string(to_string(kinds[k])) + ',' +
                     std::to_string(balance.min_count) + ',' +
                     io::format_double(balance.normalized_entropy) + ',' + io::format_double(spread) +
                     ',' + io::format_double(run.result.final_state.loss.value);
            for (const int c : run.assignment.counts) table += ',' + std::to_string(c);
            table += '\n';
            out << "seed=" << seed << " mode=" << to_string(kinds[k])
                << " counts=" << counts_text(run.assignment.counts)
                << " min_count=" << balance.min_count
                << " normalized_entropy=" << io::format_double(balance.normalized_entropy) << '\n';
        }
    }
    io::write_text(dir / "compare.csv", table);

    std::string summary = "mode,mean_min_count,mean_normalized_entropy\n";
    for (int k = 0; k < 2; ++k) {
        const double runs = static_cast<double>(cfg.repeats);
        summary += std::string(to_string(kinds[k])) + ',' +
                   io::format_double(totals[k].min_count / runs) + ',' +
                   io::format_double(totals[k].entropy / runs) + '\n';
        out << "mean over " << cfg.repeats << " seed(s): mode=" << to_string(kinds[k])
            << " min_count=" << io::format_double(totals[k].min_count / runs)
            << " normalized_entropy=" << io::format_double(totals[k].entropy / runs) << '\n';
    }
    io::write_text(dir / "compare_summary.csv", summary);
    return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prompt-guided latent optimization with an entropic optimal-transport loss",
                 "otguide"};
    app.require_subcommand(1);

    CommonFlags solve_flags;
    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "solve one entropic transport problem");
    solve->add_option("cost", solve_args.cost_path, "headerless CSV cost matrix")->required();
    solve->add_option("--a", solve_args.a_path, "source weights CSV (default uniform)");
    solve->add_option("--b", solve_args.b_path, "target weights CSV (default uniform)");
    solve->add_option("--max-iterations", solve_args.max_iterations);
    solve->add_option("--tolerance", solve_args.tolerance, "marginal L-inf tolerance");
    solve->add_flag("--plain", solve_args.plain, "plain scaling iterations instead of log-domain");
    add_common(*solve, solve_flags, ".");

    CommonFlags optimize_flags;
    CLI::App* optimize_cmd = app.add_subcommand("optimize", "run gradient descent on the latent");
    add_common(*optimize_cmd, optimize_flags, "out");

    CommonFlags diagnose_flags;
    DiagnoseArgs diagnose_args;
    CLI::App* diagnose = app.add_subcommand("diagnose", "tangent report and cost-plane plot");
    diagnose->add_option("--embeddings", diagnose_args.embeddings_path, "patch embeddings CSV");
    diagnose->add_option("--latent", diagnose_args.latent_path, "latent CSV written by optimize");
    diagnose->add_option("--arrow-scale", diagnose_args.arrow_scale, "arrow length factor");
    add_common(*diagnose, diagnose_flags, "out");

    CommonFlags compare_flags;
    CLI::App* compare = app.add_subcommand("compare", "run ot and mean with identical seeds");
    add_common(*compare, compare_flags, "out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        if (solve->parsed()) return cmd_solve(solve_args, solve_flags, out);
        if (optimize_cmd->parsed()) return cmd_optimize(optimize_flags, out);
        if (diagnose->parsed()) return cmd_diagnose(diagnose_args, diagnose_flags, out, err);
        if (compare->parsed()) return cmd_compare(compare_flags, out);
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace otguide::cli
