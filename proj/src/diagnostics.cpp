#include "otguide/diagnostics.hpp"

#include "otguide/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otguide {

Eigen::VectorXd phi(const Embedding& u, const PromptSet& prompts, Metric metric) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(prompts.size()));
    for (std::size_t j = 0; j < prompts.size(); ++j) {
        out[static_cast<Eigen::Index>(j)] = distance(metric, u, prompts[j]);
    }
    return out;
}

Eigen::VectorXd pushforward(const Embedding& u, const PromptSet& prompts, Metric metric,
                            const Embedding& g) {
    if (g.size() != u.size()) {
        throw ShapeError("pushforward: tangent vector dimension does not match the embedding");
    }
    Eigen::VectorXd w(static_cast<Eigen::Index>(prompts.size()));
    for (std::size_t j = 0; j < prompts.size(); ++j) {
        w[static_cast<Eigen::Index>(j)] = distance_grad(metric, u, prompts[j]).dot(g);
    }
    return w;
}

AssignmentReport assign_patches(std::span<const Embedding> us, const PromptSet& prompts,
                                Metric metric) {
    const CostMatrix cost = build_cost_matrix(us, prompts.embeddings(), metric);
    AssignmentReport report;
    report.distances = cost.entries();
    report.counts.assign(prompts.size(), 0);
    report.assigned.reserve(us.size());
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < cost.cols(); ++j) {
            if (cost(i, j) < cost(i, best)) best = j;
        }
        report.assigned.push_back(static_cast<int>(best));
        ++report.counts[static_cast<std::size_t>(best)];
    }
    return report;
}

BalanceMetrics balance_metrics(std::span<const int> counts) {
    if (counts.empty()) {
        throw ArgumentError("balance metrics need at least one prompt");
    }
    const int total = std::accumulate(counts.begin(), counts.end(), 0);
    BalanceMetrics out;
    out.min_count = *std::min_element(counts.begin(), counts.end());
    if (counts.size() == 1) {
        // log m = 0: a single prompt is trivially balanced.
        out.normalized_entropy = 1.0;
        return out;
    }
    if (total <= 0) {
        throw ArgumentError("balance metrics need at least one patch");
    }
    double h = 0.0;
    for (const int c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) / total;
            h -= p * std::log(p);
        }
    }
    out.normalized_entropy = h / std::log(static_cast<double>(counts.size()));
    return out;
}

BalanceMetrics balance_metrics(const AssignmentReport& report) {
    return balance_metrics(std::span<const int>(report.counts));
}

TangentReport tangent_report(std::span<const Embedding> us, const PromptSet& prompts,
                             Metric metric, const AggregationMode& mode) {
    const std::span<const Embedding> vs(prompts.embeddings());
    const CostMatrix cost = build_cost_matrix(us, vs, metric);
    LossReport loss = aggregate_loss(mode, cost, us, vs, metric);

    TangentReport report;
    report.phi = cost.entries();
    report.pushforward = Eigen::MatrixXd(cost.rows(), cost.cols());
    report.coupling = std::move(loss.coupling);
    for (std::size_t i = 0; i < us.size(); ++i) {
        report.pushforward.row(static_cast<Eigen::Index>(i)) =
            pushforward(us[i], prompts, metric, loss.patch_gradients[i]).transpose();
    }
    report.assigned = assign_patches(us, prompts, metric).assigned;
    report.mode = mode.kind;
    report.metric = metric;
    if (mode.is_mean()) {
        report.epsilon = 0.0;
        report.objective = "mean_distance";
    } else {
        report.epsilon = mode.sinkhorn.epsilon;
        report.objective = "regularized_transport";
    }
    return report;
}

double mix_ratio_stddev(const Coupling& coupling) {
    if (coupling.cols() < 2) {
        throw ArgumentError("mix ratio needs at least two prompts");
    }
    const Eigen::Index n = coupling.rows();
    Eigen::VectorXd ratio(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double denom = coupling(i, 0) + coupling(i, 1);
        ratio[i] = denom > 0.0 ? coupling(i, 0) / denom : 0.5;
    }
    const double mean = ratio.sum() / static_cast<double>(n);
    return std::sqrt((ratio.array() - mean).square().sum() / static_cast<double>(n));
}

}  // namespace otguide
