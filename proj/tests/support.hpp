#pragma once

#include "otguide/image.hpp"
#include "otguide/measures.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace otguide::testing {

// Test-side generator, independent of the library's RngStream so property
// tests do not share a code path with what they check.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd vector(Eigen::Index d) {
        Eigen::VectorXd v(d);
        for (Eigen::Index k = 0; k < d; ++k) v[k] = normal();
        return v;
    }

    Eigen::VectorXd unit(Eigen::Index d) {
        Eigen::VectorXd v = vector(d);
        while (v.norm() < 1e-3) v = vector(d);
        return v / v.norm();
    }

    EmbeddingList units(std::size_t count, Eigen::Index d) {
        EmbeddingList out;
        for (std::size_t k = 0; k < count; ++k) out.push_back(unit(d));
        return out;
    }

    Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
        }
        return m;
    }

    Image image(int h, int w) {
        Image img(h, w);
        for (Eigen::Index k = 0; k < img.pixels().size(); ++k) img.pixels()[k] = uniform(-1.0, 1.0);
        return img;
    }

private:
    std::uint64_t state_;
};

// ||a - b|| / max(||b||, 1e-12) on the stacked vectors.
inline double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-12);
}

inline Eigen::VectorXd stack(const EmbeddingList& parts) {
    Eigen::Index total = 0;
    for (const auto& p : parts) total += p.size();
    Eigen::VectorXd out(total);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.segment(at, p.size()) = p;
        at += p.size();
    }
    return out;
}

// Central differences of f at x with step h.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd grad(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd plus = x;
        Eigen::VectorXd minus = x;
        plus[k] += h;
        minus[k] -= h;
        grad[k] = (f(plus) - f(minus)) / (2.0 * h);
    }
    return grad;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("otguide_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace otguide::testing
