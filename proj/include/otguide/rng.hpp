#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace otguide {

// A named, seedable random stream. Streams derived from the same seed under
// different names are independent, so e.g. the patch-geometry stream does not
// shift when the generator's shape changes.
//
// Only the 64-bit Mersenne Twister output is used (its sequence is fixed by
// the standard); uniform/normal/integer draws are computed here rather than
// through <random> distributions, whose algorithms vary between standard
// libraries.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view name);

    RngStream split(std::string_view name) const;

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double normal();
    // Uniform on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    std::uint64_t key() const noexcept { return key_; }

private:
    explicit RngStream(std::uint64_t key);

    std::uint64_t key_;
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

}  // namespace otguide
