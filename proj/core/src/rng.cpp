#include "impactor/rng.hpp"

#include <array>

namespace impactor {

Rng::Rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
    Rng rng;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x9e3779b9u};
    rng.engine_.seed(seq);
    return rng;
}

double Rng::uniform() {
    return std::generate_canonical<double, 53>(engine_);
}

double Rng::normal() {
    return normal_(engine_);
}

double Rng::gamma(double shape) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
}

double Rng::chi_square(double df) {
    return 2.0 * gamma(0.5 * df);
}

std::uint64_t Rng::below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
}

}  // namespace impactor
