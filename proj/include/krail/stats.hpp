#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace krail {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1) standard deviation; 0 for n == 1
};

/// Throws Error(EmptyInput).
MeanStd mean_std(std::span<const double> values);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
};

inline constexpr std::size_t kDefaultResamples = 10'000;

/// Percentile bootstrap of the mean. Deterministic in `seed`.
/// Throws Error(EmptyInput) or Error(InvalidArgument).
ConfidenceInterval bootstrap_ci(std::span<const double> values, std::size_t n_resamples, double level,
                                std::uint64_t seed);
ConfidenceInterval bootstrap_ci_serial(std::span<const double> values, std::size_t n_resamples, double level,
                                       std::uint64_t seed);

/// Sorted bootstrap means, for callers that need the whole distribution.
std::vector<double> bootstrap_distribution(std::span<const double> values, std::size_t n_resamples,
                                           std::uint64_t seed);

/// Linear-interpolation quantile of sorted data (q in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double q);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

/// Welch's unequal-variance two-sample t-test, two-sided.
/// Throws Error(InsufficientData) when either sample has fewer than 2 values.
TTestResult t_test_welch(std::span<const double> a, std::span<const double> b);

}  // namespace krail
