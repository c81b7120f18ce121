#include "otguide/rng.hpp"

#include "otguide/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace otguide {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive(std::uint64_t parent, std::string_view name) {
    return splitmix64(splitmix64(parent) ^ fnv1a(name));
}

}  // namespace

RngStream::RngStream(std::uint64_t key) : key_(key), engine_(key) {}

RngStream::RngStream(std::uint64_t seed, std::string_view name) : RngStream(derive(seed, name)) {}

RngStream RngStream::split(std::string_view name) const { return RngStream(derive(key_, name)); }

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (spare_normal_) {
        const double z = *spare_normal_;
        spare_normal_.reset();
        return z;
    }
    // Box-Muller; 1 - uniform() lies in (0, 1] so the log is finite.
    const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = r * std::sin(theta);
    return r * std::cos(theta);
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) {
        throw ArgumentError("uniform_int: empty range");
    }
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());
    // Rejection sampling removes the modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return lo + static_cast<std::int64_t>(x % range);
}

}  // namespace otguide
