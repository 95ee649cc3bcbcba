#pragma once

#include <cstdint>
#include <random>

namespace impactor {

/**
 * Seeded random source used by every stochastic routine.
 *
 * Wraps a 64-bit Mersenne Twister. Streams are fully determined by the seed,
 * so identical seeds reproduce identical draws across process restarts.
 * Independent streams for parallel work are derived with substream().
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    /// Stream derived deterministically from (seed, index).
    [[nodiscard]] static Rng substream(std::uint64_t seed, std::uint64_t index);

    double uniform();              // [0, 1)
    double normal();               // N(0, 1)
    double gamma(double shape);    // Gamma(shape, 1)
    double chi_square(double df);
    std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace impactor
