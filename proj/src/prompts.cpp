#include "otguide/prompts.hpp"

#include "otguide/errors.hpp"
#include "otguide/rng.hpp"

#include <cmath>

namespace otguide {

namespace {

std::vector<std::string> default_labels(std::size_t m) {
    std::vector<std::string> labels;
    labels.reserve(m);
    for (std::size_t j = 0; j < m; ++j) labels.push_back("prompt_" + std::to_string(j));
    return labels;
}

Embedding random_unit(RngStream& rng, int dim) {
    Embedding v(dim);
    do {
        for (int k = 0; k < dim; ++k) v[k] = rng.normal();
    } while (!(v.norm() > 0.0));
    return v / v.norm();
}

}  // namespace

PromptSet::PromptSet(std::vector<std::string> labels, EmbeddingList embeddings)
    : labels_(std::move(labels)), embeddings_(std::move(embeddings)) {
    if (embeddings_.empty()) {
        throw ArgumentError("prompt set needs at least one prompt");
    }
    if (labels_.size() != embeddings_.size()) {
        throw ShapeError("prompt labels and embeddings differ in count");
    }
    for (std::size_t j = 0; j < embeddings_.size(); ++j) {
        const Embedding& v = embeddings_[j];
        if (v.size() == 0 || v.size() != embeddings_.front().size()) {
            throw ShapeError("prompt " + std::to_string(j) + " has inconsistent dimension");
        }
        if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-9) {
            throw DomainError("prompt " + std::to_string(j) + " is not a finite unit vector");
        }
    }
}

PromptSet PromptSet::from_vectors(const EmbeddingList& vectors) {
    EmbeddingList normalized;
    normalized.reserve(vectors.size());
    for (std::size_t j = 0; j < vectors.size(); ++j) {
        const double norm = vectors[j].norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw DomainError("prompt " + std::to_string(j) + " has zero or non-finite norm");
        }
        normalized.push_back(vectors[j] / norm);
    }
    return PromptSet(default_labels(vectors.size()), std::move(normalized));
}

PromptSet PromptSet::random(int m, int dim, std::uint64_t seed) {
    if (m < 1 || dim < 1) {
        throw ConfigError("random prompts need m >= 1 and dim >= 1");
    }
    RngStream rng(seed, "prompts");
    EmbeddingList vs;
    for (int j = 0; j < m; ++j) vs.push_back(random_unit(rng, dim));
    return PromptSet(default_labels(static_cast<std::size_t>(m)), std::move(vs));
}

PromptSet PromptSet::antipodal(int dim, std::uint64_t seed) {
    if (dim < 1) {
        throw ConfigError("antipodal prompts need dim >= 1");
    }
    RngStream rng(seed, "prompts");
    Embedding v = random_unit(rng, dim);
    Embedding w = -v;
    return PromptSet(default_labels(2), EmbeddingList{std::move(v), std::move(w)});
}

}  // namespace otguide
