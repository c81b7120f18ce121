#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace otguide {

// A point in the shared image/prompt embedding space. Embeddings are not
// normalized here; the encoder owns normalization.
using Embedding = Eigen::VectorXd;
using EmbeddingList = std::vector<Embedding>;

enum class Metric {
    Cosine,    // 1 - cos(u, v), in [0, 2]
    Geodesic,  // arccos(cos(u, v)), in [0, pi]
};

std::string_view to_string(Metric metric);
// Accepts "cosine" or "geodesic"; throws ConfigError otherwise.
Metric parse_metric(std::string_view name);

// Probability weights: nonnegative entries summing to one within 1e-12.
class WeightVector {
public:
    explicit WeightVector(Eigen::VectorXd weights);

    const Eigen::VectorXd& values() const noexcept { return weights_; }
    Eigen::Index size() const noexcept { return weights_.size(); }
    double operator[](Eigen::Index i) const { return weights_[i]; }

private:
    Eigen::VectorXd weights_;
};

// Pairwise ground cost between n sources and m targets. Entries are finite
// and nonnegative.
class CostMatrix {
public:
    explicit CostMatrix(Eigen::MatrixXd entries);

    const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    Eigen::Index rows() const noexcept { return entries_.rows(); }
    Eigen::Index cols() const noexcept { return entries_.cols(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
    Eigen::MatrixXd entries_;
};

/// Cosine of the angle between u and v, clamped to [-1, 1].
double cosine_similarity(const Embedding& u, const Embedding& v);

double cosine_distance(const Embedding& u, const Embedding& v);
double geodesic_distance(const Embedding& u, const Embedding& v);
double distance(Metric metric, const Embedding& u, const Embedding& v);

/// Gradient of distance(metric, u, v) with respect to u.
///
/// The geodesic gradient carries a factor 1/sqrt(1 - s^2) and is refused with
/// SingularGradientError when |s| >= 1 - 1e-9.
Embedding distance_grad(Metric metric, const Embedding& u, const Embedding& v);

CostMatrix build_cost_matrix(std::span<const Embedding> us, std::span<const Embedding> vs,
                             Metric metric);

WeightVector uniform_weights(std::size_t k);

}  // namespace otguide
