#pragma once

#include "otguide/image.hpp"
#include "otguide/measures.hpp"

#include <cstdint>

namespace otguide {

struct EncoderShape {
    int resolution = 16;  // input patch side p
    int pool = 2;         // average-pool window; must divide p
    int embed_dim = 32;   // output dimension d
};

// Output of ToyEncoder::encode with what its VJP needs.
struct Encoding {
    Embedding embedding;     // unit norm
    double pre_norm = 0.0;   // norm of the projected vector before normalization
};

// Stand-in image encoder: average pool, random linear projection, then L2
// normalization onto the unit sphere.
class ToyEncoder {
public:
    ToyEncoder(EncoderShape shape, Eigen::MatrixXd projection);

    // Projection ~ N(0, 1/pooled_length), drawn from `seed`.
    static ToyEncoder from_seed(EncoderShape shape, std::uint64_t seed);

    Encoding encode(const Image& patch) const;

    // Cotangent on the unit embedding -> cotangent on the input patch.
    Image vjp(const Encoding& encoding, const Embedding& cotangent) const;

    Eigen::VectorXd pool(const Image& patch) const;
    Eigen::Index pooled_length() const noexcept { return projection_.cols(); }

    const EncoderShape& shape() const noexcept { return shape_; }
    const Eigen::MatrixXd& projection() const noexcept { return projection_; }

private:
    EncoderShape shape_;
    Eigen::MatrixXd projection_;
};

}  // namespace otguide
