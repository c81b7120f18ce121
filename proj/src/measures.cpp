#include "otguide/measures.hpp"

#include "otguide/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace otguide {

namespace {

constexpr double kGeodesicSingularity = 1e-9;

void require_compatible(const Embedding& u, const Embedding& v) {
    if (u.size() == 0 || v.size() == 0) {
        throw ShapeError("embedding must have at least one coordinate");
    }
    if (u.size() != v.size()) {
        throw ShapeError("embedding dimension mismatch: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    }
    if (!u.allFinite() || !v.allFinite()) {
        throw DomainError("embedding has non-finite entries");
    }
}

struct Norms {
    double u;
    double v;
};

Norms nonzero_norms(const Embedding& u, const Embedding& v) {
    require_compatible(u, v);
    const Norms norms{u.norm(), v.norm()};
    if (!(norms.u > 0.0) || !(norms.v > 0.0)) {
        throw DomainError("zero-norm embedding has no angular distance");
    }
    return norms;
}

}  // namespace

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::Cosine:
            return "cosine";
        case Metric::Geodesic:
            return "geodesic";
    }
    return "unknown";
}

Metric parse_metric(std::string_view name) {
    if (name == "cosine") return Metric::Cosine;
    if (name == "geodesic") return Metric::Geodesic;
    throw ConfigError("unknown metric '" + std::string(name) + "' (expected cosine|geodesic)");
}

WeightVector::WeightVector(Eigen::VectorXd weights) : weights_(std::move(weights)) {
    if (weights_.size() == 0) {
        throw ArgumentError("weight vector must be non-empty");
    }
    if (!weights_.allFinite()) {
        throw DomainError("weight vector has non-finite entries");
    }
    if ((weights_.array() < 0.0).any()) {
        throw DomainError("weight vector has a negative entry");
    }
    if (std::abs(weights_.sum() - 1.0) > 1e-12) {
        throw DomainError("weights must sum to 1 (got " + std::to_string(weights_.sum()) + ")");
    }
}

CostMatrix::CostMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.size() == 0) {
        throw ShapeError("cost matrix must be non-empty");
    }
    if (!entries_.allFinite()) {
        throw InputError("cost matrix has non-finite entries");
    }
    if ((entries_.array() < 0.0).any()) {
        throw DomainError("cost matrix has a negative entry");
    }
}

double cosine_similarity(const Embedding& u, const Embedding& v) {
    const Norms norms = nonzero_norms(u, v);
    return std::clamp(u.dot(v) / (norms.u * norms.v), -1.0, 1.0);
}

double cosine_distance(const Embedding& u, const Embedding& v) {
    return 1.0 - cosine_similarity(u, v);
}

double geodesic_distance(const Embedding& u, const Embedding& v) {
    return std::acos(cosine_similarity(u, v));
}

double distance(Metric metric, const Embedding& u, const Embedding& v) {
    switch (metric) {
        case Metric::Cosine:
            return cosine_distance(u, v);
        case Metric::Geodesic:
            return geodesic_distance(u, v);
    }
    throw ArgumentError("unknown metric");
}

Embedding distance_grad(Metric metric, const Embedding& u, const Embedding& v) {
    const Norms norms = nonzero_norms(u, v);
    const double uv = u.dot(v);
    // d/du <u,v>/(|u||v|) = v/(|u||v|) - <u,v> u/(|u|^3 |v|)
    Embedding sim_grad = v / (norms.u * norms.v) - (uv / (norms.u * norms.u * norms.u * norms.v)) * u;
    switch (metric) {
        case Metric::Cosine:
            return -sim_grad;
        case Metric::Geodesic: {
            const double s = std::clamp(uv / (norms.u * norms.v), -1.0, 1.0);
            if (std::abs(s) >= 1.0 - kGeodesicSingularity) {
                throw SingularGradientError(
                    "geodesic distance gradient is singular at collinear embeddings (|cos| = " +
                    std::to_string(std::abs(s)) + ")");
            }
            return (-1.0 / std::sqrt(1.0 - s * s)) * sim_grad;
        }
    }
    throw ArgumentError("unknown metric");
}

CostMatrix build_cost_matrix(std::span<const Embedding> us, std::span<const Embedding> vs,
                             Metric metric) {
    if (us.empty() || vs.empty()) {
        throw ArgumentError("cost matrix needs at least one source and one target embedding");
    }
    Eigen::MatrixXd entries(static_cast<Eigen::Index>(us.size()),
                            static_cast<Eigen::Index>(vs.size()));
    for (std::size_t i = 0; i < us.size(); ++i) {
        for (std::size_t j = 0; j < vs.size(); ++j) {
            try {
                entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    distance(metric, us[i], vs[j]);
            } catch (const ShapeError& e) {
                throw ShapeError("cost entry (" + std::to_string(i) + "," + std::to_string(j) +
                                 "): " + e.what());
            } catch (const DomainError& e) {
                throw DomainError("cost entry (" + std::to_string(i) + "," + std::to_string(j) +
                                  "): " + e.what());
            }
        }
    }
    return CostMatrix(std::move(entries));
}

WeightVector uniform_weights(std::size_t k) {
    if (k == 0) {
        throw ArgumentError("uniform_weights requires k >= 1");
    }
    return WeightVector(
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)));
}

}  // namespace otguide
