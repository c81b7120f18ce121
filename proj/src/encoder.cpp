#include "otguide/encoder.hpp"

#include "otguide/errors.hpp"
#include "otguide/rng.hpp"

#include <cmath>
#include <string>

namespace otguide {

namespace {

Eigen::Index pooled_size(const EncoderShape& s) {
    const Eigen::Index side = s.resolution / s.pool;
    return side * side * Image::kChannels;
}

void validate(const EncoderShape& s) {
    if (s.resolution < 1 || s.pool < 1 || s.embed_dim < 1) {
        throw ConfigError("encoder dimensions must be positive");
    }
    if (s.resolution % s.pool != 0) {
        throw ConfigError("encoder pool factor " + std::to_string(s.pool) +
                          " does not divide the patch resolution " + std::to_string(s.resolution));
    }
}

}  // namespace

ToyEncoder::ToyEncoder(EncoderShape shape, Eigen::MatrixXd projection)
    : shape_(shape), projection_(std::move(projection)) {
    validate(shape_);
    if (projection_.rows() != shape_.embed_dim || projection_.cols() != pooled_size(shape_)) {
        throw ShapeError("encoder projection does not match the declared shape");
    }
}

ToyEncoder ToyEncoder::from_seed(EncoderShape shape, std::uint64_t seed) {
    validate(shape);
    RngStream rng(seed, "encoder");
    const Eigen::Index cols = pooled_size(shape);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    Eigen::MatrixXd projection(shape.embed_dim, cols);
    for (Eigen::Index r = 0; r < projection.rows(); ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) projection(r, c) = scale * rng.normal();
    }
    return ToyEncoder(shape, std::move(projection));
}

Eigen::VectorXd ToyEncoder::pool(const Image& patch) const {
    if (patch.height() != shape_.resolution || patch.width() != shape_.resolution) {
        throw ShapeError("encoder expects " + std::to_string(shape_.resolution) + "x" +
                         std::to_string(shape_.resolution) + " patches, got " +
                         std::to_string(patch.height()) + "x" + std::to_string(patch.width()));
    }
    const int k = shape_.pool;
    const int side = shape_.resolution / k;
    const double inv_area = 1.0 / static_cast<double>(k * k);
    Eigen::VectorXd pooled = Eigen::VectorXd::Zero(pooled_size(shape_));
    for (int by = 0; by < side; ++by) {
        for (int bx = 0; bx < side; ++bx) {
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                double sum = 0.0;
                for (int dy = 0; dy < k; ++dy) {
                    for (int dx = 0; dx < k; ++dx) sum += patch.at(by * k + dy, bx * k + dx, ch);
                }
                pooled[(static_cast<Eigen::Index>(by) * side + bx) * Image::kChannels + ch] =
                    sum * inv_area;
            }
        }
    }
    return pooled;
}

Encoding ToyEncoder::encode(const Image& patch) const {
    const Eigen::VectorXd projected = projection_ * pool(patch);
    const double norm = projected.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DomainError("degenerate encoding: projected patch has zero norm");
    }
    return Encoding{projected / norm, norm};
}

Image ToyEncoder::vjp(const Encoding& encoding, const Embedding& cotangent) const {
    const Embedding& u = encoding.embedding;
    if (cotangent.size() != u.size() || u.size() != shape_.embed_dim) {
        throw ShapeError("encoder vjp: cotangent dimension does not match the embedding");
    }
    // d(e/|e|) applied transposed: (g - u <u, g>) / |e|
    const Eigen::VectorXd d_projected = (cotangent - u * u.dot(cotangent)) / encoding.pre_norm;
    const Eigen::VectorXd d_pooled = projection_.transpose() * d_projected;

    const int k = shape_.pool;
    const int side = shape_.resolution / k;
    const double inv_area = 1.0 / static_cast<double>(k * k);
    Image out(shape_.resolution, shape_.resolution);
    for (int by = 0; by < side; ++by) {
        for (int bx = 0; bx < side; ++bx) {
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                const double share =
                    d_pooled[(static_cast<Eigen::Index>(by) * side + bx) * Image::kChannels + ch] *
                    inv_area;
                for (int dy = 0; dy < k; ++dy) {
                    for (int dx = 0; dx < k; ++dx) out.at(by * k + dy, bx * k + dx, ch) = share;
                }
            }
        }
    }
    return out;
}

}  // namespace otguide
