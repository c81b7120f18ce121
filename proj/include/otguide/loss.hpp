#pragma once

#include "otguide/measures.hpp"
#include "otguide/sinkhorn.hpp"

#include <span>
#include <string_view>

namespace otguide {

// How the n x m patch/prompt distances are aggregated into one loss.
//
// Mean is the fixed independent coupling a b^T (every entry 1/(nm)); the
// optimal-transport mode replaces it with the entropic Sinkhorn plan.
struct AggregationMode {
    enum class Kind { Mean, OptimalTransport };

    Kind kind = Kind::OptimalTransport;
    SinkhornConfig sinkhorn{};
    // Nonconvergent Sinkhorn raises NonConvergenceError instead of returning
    // a report with converged == false.
    bool strict = false;

    static AggregationMode mean() { return {Kind::Mean, {}, false}; }
    static AggregationMode optimal_transport(SinkhornConfig cfg, bool strict = false) {
        return {Kind::OptimalTransport, cfg, strict};
    }

    bool is_mean() const noexcept { return kind == Kind::Mean; }
};

std::string_view to_string(AggregationMode::Kind kind);
// Accepts "ot" or "mean"; throws ConfigError otherwise.
AggregationMode::Kind parse_mode(std::string_view name);

struct LossReport {
    // The optimized objective: the regularized transport objective in OT
    // mode, the plain mean distance in Mean mode.
    double value = 0.0;
    double transport_cost = 0.0;  // <C, coupling>
    Coupling coupling;
    EmbeddingList patch_gradients;  // d value / d u_i
    AggregationMode mode;
    double marginal_error = 0.0;
    int sinkhorn_iterations = 0;
    bool converged = true;
};

/// (1/(nm)) sum_ij D(u_i, v_j)
double mean_loss(std::span<const Embedding> us, std::span<const Embedding> vs, Metric metric);

/// Envelope gradients g_i = sum_j coupling_ij * grad_u D(u_i, v_j), the
/// coupling held fixed. Singular distance gradients are re-raised with the
/// patch index attached.
EmbeddingList loss_gradients(const Coupling& coupling, std::span<const Embedding> us,
                             std::span<const Embedding> vs, Metric metric);

/// Solves for the coupling the mode prescribes, then differentiates with it.
EmbeddingList loss_gradients(const AggregationMode& mode, std::span<const Embedding> us,
                             std::span<const Embedding> vs, Metric metric);

LossReport ot_loss(std::span<const Embedding> us, std::span<const Embedding> vs, Metric metric,
                   const SinkhornConfig& cfg, bool strict = false);

/// Dispatches on the mode; Mean goes through the same <C, coupling> path.
LossReport aggregate_loss(const AggregationMode& mode, std::span<const Embedding> us,
                          std::span<const Embedding> vs, Metric metric);

/// Same as above on an already-built cost matrix.
LossReport aggregate_loss(const AggregationMode& mode, const CostMatrix& cost,
                          std::span<const Embedding> us, std::span<const Embedding> vs,
                          Metric metric);

/// The coupling every patch shares in Mean mode: entries 1/(nm).
Coupling independent_coupling(Eigen::Index n, Eigen::Index m);

}  // namespace otguide
