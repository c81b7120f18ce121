#pragma once

#include "otguide/loss.hpp"
#include "otguide/measures.hpp"
#include "otguide/prompts.hpp"

#include <span>
#include <string>
#include <vector>

namespace otguide {

// Closest-prompt grouping of patches.
struct AssignmentReport {
    std::vector<int> assigned;   // j*_i, ties to the lowest index
    std::vector<int> counts;     // patches per prompt, sums to n
    Eigen::MatrixXd distances;   // row i is phi(u_i)
};

struct BalanceMetrics {
    int min_count = 0;
    // Shannon entropy of counts/n divided by log m; 1 means perfectly even.
    double normalized_entropy = 0.0;
};

// Per-patch cost-plane positions and pushed-forward loss gradients.
struct TangentReport {
    Eigen::MatrixXd phi;          // n x m
    Eigen::MatrixXd pushforward;  // n x m, row i is w_i
    Coupling coupling;            // the mixing weights the gradients were taken with
    std::vector<int> assigned;
    AggregationMode::Kind mode = AggregationMode::Kind::OptimalTransport;
    Metric metric = Metric::Cosine;
    double epsilon = 0.0;  // 0 in Mean mode
    // Which scalar the patch gradients differentiate.
    std::string objective;
};

/// [D(u, v_1), ..., D(u, v_m)]
Eigen::VectorXd phi(const Embedding& u, const PromptSet& prompts, Metric metric);

/// Jacobian of phi at u applied to g: w_j = <grad_u D(u, v_j), g>.
Eigen::VectorXd pushforward(const Embedding& u, const PromptSet& prompts, Metric metric,
                            const Embedding& g);

AssignmentReport assign_patches(std::span<const Embedding> us, const PromptSet& prompts,
                                Metric metric);

BalanceMetrics balance_metrics(const AssignmentReport& report);
BalanceMetrics balance_metrics(std::span<const int> counts);

TangentReport tangent_report(std::span<const Embedding> us, const PromptSet& prompts,
                             Metric metric, const AggregationMode& mode);

/// Population standard deviation over rows of P_i0 / (P_i0 + P_i1). Zero when
/// every patch uses the same mix of the first two prompts. Requires m >= 2.
double mix_ratio_stddev(const Coupling& coupling);

}  // namespace otguide
