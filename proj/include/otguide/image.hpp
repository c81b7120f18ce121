#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace otguide {

// An h x w x 3 grid of reals stored row-major with interleaved channels.
// Generator outputs live in (-1, 1); the same type carries cotangents, which
// are unbounded.
class Image {
public:
    static constexpr int kChannels = 3;

    Image() = default;
    Image(int height, int width);
    Image(int height, int width, Eigen::VectorXd pixels);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    Eigen::Index index(int y, int x, int c) const noexcept {
        return (static_cast<Eigen::Index>(y) * width_ + x) * kChannels + c;
    }
    double& at(int y, int x, int c) { return pixels_[index(y, x, c)]; }
    double at(int y, int x, int c) const { return pixels_[index(y, x, c)]; }

    const Eigen::VectorXd& pixels() const noexcept { return pixels_; }
    Eigen::VectorXd& pixels() noexcept { return pixels_; }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    Eigen::VectorXd pixels_;
};

struct LatentState {
    Eigen::VectorXd z;
};

struct GeneratorShape {
    int latent_dim = 16;
    int height = 32;
    int width = 32;
};

// Stand-in image generator x = tanh(W z + c) with fixed random weights.
class ToyGenerator {
public:
    ToyGenerator(GeneratorShape shape, Eigen::MatrixXd weight, Eigen::VectorXd bias);

    // W ~ N(0, 1/d_z), c ~ N(0, bias_scale^2), drawn from `seed`.
    static ToyGenerator from_seed(GeneratorShape shape, std::uint64_t seed,
                                  double bias_scale = 0.1);

    Image generate(const LatentState& z) const;

    // Given x = generate(z) and a cotangent on x, returns W^T (cot * (1 - x^2)).
    Eigen::VectorXd vjp(const Image& output, const Image& cotangent) const;

    const GeneratorShape& shape() const noexcept { return shape_; }
    const Eigen::MatrixXd& weight() const noexcept { return weight_; }
    const Eigen::VectorXd& bias() const noexcept { return bias_; }

private:
    GeneratorShape shape_;
    Eigen::MatrixXd weight_;
    Eigen::VectorXd bias_;
};

}  // namespace otguide
