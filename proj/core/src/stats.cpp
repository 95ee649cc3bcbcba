#include "impactor/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace impactor::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("stats: mean of empty sequence");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("stats: sd needs at least 2 values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw std::invalid_argument("stats: quantile of empty sequence");
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("stats: probability outside [0, 1]");
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> x, double prob) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, prob);
}

Interval summarize(std::span<const double> x, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("stats: credible level must lie in (0, 1)");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double tail = 0.5 * (1.0 - level);
    return {quantile_sorted(sorted, 0.5), quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 4) return static_cast<double>(n);
    const double m = mean(chain);
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += (chain[i] - m) * (chain[i + lag] - m);
        return s / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (c0 <= 0.0) return static_cast<double>(n);
    // Geyer: sum consecutive autocorrelation pairs while the pair sum stays positive.
    double tau = -1.0;
    for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
        const double pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    tau = std::max(tau, 1.0 / static_cast<double>(n));
    return static_cast<double>(n) / tau;
}

}  // namespace impactor::stats
