#pragma once

// Deterministic sampling helpers on top of std::mt19937_64. Distribution
// draws are hand-rolled (std::*_distribution is implementation-defined), so
// a seed reproduces byte-identical streams on any platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace rttp::rnd {

inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

inline std::uint64_t uniform_index(std::mt19937_64& g, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    return g() % n;
}

inline std::int64_t uniform_int(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: bad range");
    return lo + static_cast<std::int64_t>(
                    uniform_index(g, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline bool bernoulli(std::mt19937_64& g, double p) {
    return uniform01(g) < p;
}

// Box-Muller without state; two uniforms per draw.
inline double normal(std::mt19937_64& g, double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01(g);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform01(g);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
}

// Knuth multiplication method for small rates, normal approximation above.
inline std::uint64_t poisson(std::mt19937_64& g, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("poisson: negative rate");
    if (lambda == 0.0) return 0;
    if (lambda <= 60.0) {
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01(g);
        } while (p > limit);
        return k - 1;
    }
    const double draw = std::round(normal(g, lambda, std::sqrt(lambda)));
    return draw <= 0.0 ? 0 : static_cast<std::uint64_t>(draw);
}

}  // namespace rttp::rnd
