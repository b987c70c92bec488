#pragma once

// Reproducible Brownian increments.
//
// Each component of a path draws from its own std::mt19937_64 whose seed is
// SplitMix64(seed, component). Normals come from the Marsaglia polar method on
// 53-bit uniforms taken from the top bits of each engine output, so paths are
// bit-identical across standard library implementations.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pwlv {

/// Recorded in output headers; any change here changes the bits of every path.
inline constexpr std::string_view kNoiseMethod = "mt19937_64+splitmix64-substreams+marsaglia-polar";

/// SplitMix64 finalizer applied to seed + (stream + 1) * golden gamma.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Standard normal stream, polar method.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct BrownianIncrement {
    double db1 = 0.0;
    double db2 = 0.0;

    friend bool operator==(const BrownianIncrement&, const BrownianIncrement&) = default;
};

struct BrownianPath {
    std::vector<BrownianIncrement> increments;
    std::uint64_t seed = 0;
    double h = 0.0;

    std::size_t size() const noexcept { return increments.size(); }
};

/// n_steps pairs of independent Normal(0, h) draws.
inline BrownianPath generate_path(std::uint64_t seed, std::size_t n_steps, double h) {
    if (n_steps < 1) throw std::domain_error("generate_path: n_steps must be >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::domain_error("generate_path: step must be positive, got " + std::to_string(h));
    }
    NormalStream first(derive_seed(seed, 0));
    NormalStream second(derive_seed(seed, 1));
    const double scale = std::sqrt(h);

    BrownianPath path;
    path.seed = seed;
    path.h = h;
    path.increments.resize(n_steps);
    for (auto& inc : path.increments) inc.db1 = scale * first.next();
    for (auto& inc : path.increments) inc.db2 = scale * second.next();
    return path;
}

}  // namespace pwlv
