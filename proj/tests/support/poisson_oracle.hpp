#pragma once

// Test-only reference for Poisson tail surprise: naive high-precision
// summation in long double, each pmf term evaluated independently through
// lgammal. Deliberately shares no code with rttp::burst::poisson_surprise.

#include <cmath>
#include <cstdint>

namespace rttp_test {

inline long double poisson_pmf_ld(std::uint64_t k, long double lambda) {
    return expl(static_cast<long double>(k) * logl(lambda) - lambda -
                lgammal(static_cast<long double>(k) + 1.0L));
}

// -ln P(X >= observed), X ~ Poisson(lambda)
inline long double poisson_surprise_oracle(std::uint64_t observed, long double lambda) {
    if (observed == 0) return 0.0L;
    if (static_cast<long double>(observed) <= lambda) {
        long double cdf = 0.0L;
        for (std::uint64_t k = 0; k < observed; ++k) cdf += poisson_pmf_ld(k, lambda);
        return -log1pl(-cdf);
    }
    long double tail = 0.0L;
    for (std::uint64_t k = observed;; ++k) {
        const long double term = poisson_pmf_ld(k, lambda);
        tail += term;
        if (term < tail * 1e-22L && k > observed + 4) break;
    }
    return -logl(tail);
}

}  // namespace rttp_test
