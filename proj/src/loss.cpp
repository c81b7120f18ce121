#include "otguide/loss.hpp"

#include "otguide/errors.hpp"

#include <string>

namespace otguide {

namespace {

void require_nonempty(std::span<const Embedding> us, std::span<const Embedding> vs) {
    if (us.empty() || vs.empty()) {
        throw ArgumentError("loss needs at least one patch and one prompt embedding");
    }
}

}  // namespace

std::string_view to_string(AggregationMode::Kind kind) {
    return kind == AggregationMode::Kind::Mean ? "mean" : "ot";
}

AggregationMode::Kind parse_mode(std::string_view name) {
    if (name == "mean") return AggregationMode::Kind::Mean;
    if (name == "ot") return AggregationMode::Kind::OptimalTransport;
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected ot|mean)");
}

Coupling independent_coupling(Eigen::Index n, Eigen::Index m) {
    return Coupling(Eigen::MatrixXd::Constant(n, m, 1.0 / static_cast<double>(n * m)));
}

double mean_loss(std::span<const Embedding> us, std::span<const Embedding> vs, Metric metric) {
    require_nonempty(us, vs);
    double total = 0.0;
    for (const Embedding& u : us) {
        for (const Embedding& v : vs) total += distance(metric, u, v);
    }
    return total / static_cast<double>(us.size() * vs.size());
}

EmbeddingList loss_gradients(const Coupling& coupling, std::span<const Embedding> us,
                             std::span<const Embedding> vs, Metric metric) {
    require_nonempty(us, vs);
    if (coupling.rows() != static_cast<Eigen::Index>(us.size()) ||
        coupling.cols() != static_cast<Eigen::Index>(vs.size())) {
        throw ShapeError("coupling shape does not match the embedding lists");
    }
    EmbeddingList grads;
    grads.reserve(us.size());
    for (std::size_t i = 0; i < us.size(); ++i) {
        Embedding g = Embedding::Zero(us[i].size());
        for (std::size_t j = 0; j < vs.size(); ++j) {
            try {
                g += coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                     distance_grad(metric, us[i], vs[j]);
            } catch (const SingularGradientError& e) {
                throw SingularGradientError("patch " + std::to_string(i) + ", prompt " +
                                            std::to_string(j) + ": " + e.what());
            }
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

LossReport aggregate_loss(const AggregationMode& mode, const CostMatrix& cost,
                          std::span<const Embedding> us, std::span<const Embedding> vs,
                          Metric metric) {
    require_nonempty(us, vs);
    const Eigen::Index n = cost.rows();
    const Eigen::Index m = cost.cols();
    if (n != static_cast<Eigen::Index>(us.size()) || m != static_cast<Eigen::Index>(vs.size())) {
        throw ShapeError("cost matrix shape does not match the embedding lists");
    }

    if (mode.is_mean()) {
        Coupling coupling = independent_coupling(n, m);
        const double value = cost.entries().cwiseProduct(coupling.plan()).sum();
        const WeightVector a = uniform_weights(static_cast<std::size_t>(n));
        const WeightVector b = uniform_weights(static_cast<std::size_t>(m));
        const double marginal_error = check_marginals(coupling, a, b);
        EmbeddingList grads = loss_gradients(coupling, us, vs, metric);
        return LossReport{value, value, std::move(coupling), std::move(grads), mode,
                          marginal_error, 0, true};
    }

    SinkhornSolution sol = sinkhorn_solve(uniform_weights(static_cast<std::size_t>(n)),
                                          uniform_weights(static_cast<std::size_t>(m)), cost,
                                          mode.sinkhorn);
    if (mode.strict && !sol.converged) {
        throw NonConvergenceError("sinkhorn did not converge after " +
                                      std::to_string(sol.iterations_used) +
                                      " iterations (marginal error " +
                                      std::to_string(sol.marginal_error) + ")",
                                  sol.iterations_used);
    }
    EmbeddingList grads = loss_gradients(sol.plan, us, vs, metric);
    return LossReport{sol.reg_objective, sol.transport_cost, std::move(sol.plan), std::move(grads),
                      mode,              sol.marginal_error, sol.iterations_used, sol.converged};
}

LossReport aggregate_loss(const AggregationMode& mode, std::span<const Embedding> us,
                          std::span<const Embedding> vs, Metric metric) {
    return aggregate_loss(mode, build_cost_matrix(us, vs, metric), us, vs, metric);
}

LossReport ot_loss(std::span<const Embedding> us, std::span<const Embedding> vs, Metric metric,
                   const SinkhornConfig& cfg, bool strict) {
    return aggregate_loss(AggregationMode::optimal_transport(cfg, strict), us, vs, metric);
}

EmbeddingList loss_gradients(const AggregationMode& mode, std::span<const Embedding> us,
                             std::span<const Embedding> vs, Metric metric) {
    return aggregate_loss(mode, us, vs, metric).patch_gradients;
}

}  // namespace otguide
