#pragma once

#include "otguide/measures.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace otguide {

// Prompt embeddings v_1..v_m with display labels. Text encoding is out of
// scope; prompts arrive as unit vectors.
class PromptSet {
public:
    // Throws unless m >= 1, labels match embeddings, and every embedding has
    // unit norm within 1e-9 and a common dimension.
    PromptSet(std::vector<std::string> labels, EmbeddingList embeddings);

    // Normalizes each row and labels them "prompt_0", "prompt_1", ...
    static PromptSet from_vectors(const EmbeddingList& vectors);

    // m independent directions drawn uniformly on the unit sphere.
    static PromptSet random(int m, int dim, std::uint64_t seed);

    // v and -v for a random unit v: cosine distance 2 apart.
    static PromptSet antipodal(int dim, std::uint64_t seed);

    std::size_t size() const noexcept { return embeddings_.size(); }
    Eigen::Index dim() const noexcept { return embeddings_.front().size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const EmbeddingList& embeddings() const noexcept { return embeddings_; }
    const Embedding& operator[](std::size_t j) const { return embeddings_[j]; }

private:
    std::vector<std::string> labels_;
    EmbeddingList embeddings_;
};

}  // namespace otguide
