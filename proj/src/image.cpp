#include "otguide/image.hpp"

#include "otguide/errors.hpp"
#include "otguide/rng.hpp"

#include <cmath>
#include <string>

namespace otguide {

Image::Image(int height, int width)
    : Image(height, width,
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(height) * width * kChannels)) {}

Image::Image(int height, int width, Eigen::VectorXd pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (height <= 0 || width <= 0) {
        throw ShapeError("image dimensions must be positive");
    }
    if (pixels_.size() != static_cast<Eigen::Index>(height) * width * kChannels) {
        throw ShapeError("image buffer of size " + std::to_string(pixels_.size()) +
                         " does not match " + std::to_string(height) + "x" +
                         std::to_string(width) + "x3");
    }
}

ToyGenerator::ToyGenerator(GeneratorShape shape, Eigen::MatrixXd weight, Eigen::VectorXd bias)
    : shape_(shape), weight_(std::move(weight)), bias_(std::move(bias)) {
    if (shape_.latent_dim <= 0 || shape_.height <= 0 || shape_.width <= 0) {
        throw ConfigError("generator dimensions must be positive");
    }
    const Eigen::Index out = static_cast<Eigen::Index>(shape_.height) * shape_.width * Image::kChannels;
    if (weight_.rows() != out || weight_.cols() != shape_.latent_dim || bias_.size() != out) {
        throw ShapeError("generator weight/bias do not match the declared shape");
    }
}

ToyGenerator ToyGenerator::from_seed(GeneratorShape shape, std::uint64_t seed, double bias_scale) {
    if (shape.latent_dim <= 0 || shape.height <= 0 || shape.width <= 0) {
        throw ConfigError("generator dimensions must be positive");
    }
    RngStream rng(seed, "generator");
    const Eigen::Index out = static_cast<Eigen::Index>(shape.height) * shape.width * Image::kChannels;
    const double scale = 1.0 / std::sqrt(static_cast<double>(shape.latent_dim));
    Eigen::MatrixXd weight(out, shape.latent_dim);
    for (Eigen::Index r = 0; r < out; ++r) {
        for (Eigen::Index c = 0; c < shape.latent_dim; ++c) weight(r, c) = scale * rng.normal();
    }
    Eigen::VectorXd bias(out);
    for (Eigen::Index r = 0; r < out; ++r) bias[r] = bias_scale * rng.normal();
    return ToyGenerator(shape, std::move(weight), std::move(bias));
}

Image ToyGenerator::generate(const LatentState& z) const {
    if (z.z.size() != shape_.latent_dim) {
        throw ShapeError("latent of dimension " + std::to_string(z.z.size()) +
                         " fed to a generator expecting " + std::to_string(shape_.latent_dim));
    }
    if (!z.z.allFinite()) {
        throw DomainError("latent has non-finite entries");
    }
    Eigen::VectorXd x = (weight_ * z.z + bias_).array().tanh().matrix();
    return Image(shape_.height, shape_.width, std::move(x));
}

Eigen::VectorXd ToyGenerator::vjp(const Image& output, const Image& cotangent) const {
    if (output.height() != shape_.height || output.width() != shape_.width ||
        !output.same_shape(cotangent)) {
        throw ShapeError("generator vjp: image shapes do not match the generator");
    }
    const Eigen::VectorXd& x = output.pixels();
    const Eigen::VectorXd pre = cotangent.pixels().cwiseProduct((1.0 - x.array().square()).matrix());
    return weight_.transpose() * pre;
}

}  // namespace otguide
