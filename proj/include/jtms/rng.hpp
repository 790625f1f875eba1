#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace jtms {

/// Seeded deterministic random source. mt19937_64 output is pinned by the
/// standard; the distributions here are hand-rolled because the std ones
/// differ across library implementations. Consumers document their draw
/// order so fixtures stay stable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Box-Muller, two draws per call, no caching.
    double normal(double mean, double stddev) {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Knuth's product method; draw count varies with the outcome, which is
    /// fine as long as callers treat one poisson() as one logical draw.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        double product = uniform();
        int count = 0;
        while (product > limit) {
            ++count;
            product *= uniform();
        }
        return count;
    }

    /// Uniform integer in [0, n), n > 0. Rejection-free modulo is biased for
    /// huge n; acceptable here since n stays far below 2^53.
    std::uint64_t integer(std::uint64_t n) {
        return (engine_() >> 11) % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace jtms
