#pragma once

#include <span>
#include <vector>

namespace impactor::stats {

double mean(std::span<const double> x);

/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> x);

/// Quantile with linear interpolation between order statistics (type 7).
double quantile(std::span<const double> x, double prob);

/// Quantile of data that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double prob);

struct Interval {
    double median;
    double lower;
    double upper;
};

/// Median and equal-tailed interval at credible `level` (e.g. 0.95).
Interval summarize(std::span<const double> x, double level);

/// Effective sample size from the initial-positive-sequence autocorrelation sum.
double effective_sample_size(std::span<const double> chain);

}  // namespace impactor::stats
