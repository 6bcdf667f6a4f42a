#include "krail/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "krail/error.hpp"
#include "krail/kernels.hpp"

namespace krail {

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "mean_std of an empty list");
  MeanStd out;
  out.mean = kernels::shifted_mean(values);
  if (values.size() == 1) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty list");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

void check_bootstrap_args(std::span<const double> values, std::size_t n_resamples, double level) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "bootstrap of an empty list");
  if (n_resamples == 0) throw Error(ErrorCode::InvalidArgument, "n_resamples must be positive");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must be in (0, 1)");
}

ConfidenceInterval percentile_interval(std::vector<double>& means, double level) {
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail), level};
}

}  // namespace

std::vector<double> bootstrap_distribution(std::span<const double> values, std::size_t n_resamples,
                                           std::uint64_t seed) {
  check_bootstrap_args(values, n_resamples, 0.5);
  std::vector<double> means(n_resamples);
  kernels::bootstrap_means(values, seed, means);
  std::sort(means.begin(), means.end());
  return means;
}

ConfidenceInterval bootstrap_ci(std::span<const double> values, std::size_t n_resamples, double level,
                                std::uint64_t seed) {
  check_bootstrap_args(values, n_resamples, level);
  std::vector<double> means(n_resamples);
  kernels::bootstrap_means(values, seed, means);
  return percentile_interval(means, level);
}

ConfidenceInterval bootstrap_ci_serial(std::span<const double> values, std::size_t n_resamples, double level,
                                       std::uint64_t seed) {
  check_bootstrap_args(values, n_resamples, level);
  std::vector<double> means(n_resamples);
  kernels::bootstrap_means_serial(values, seed, means);
  return percentile_interval(means, level);
}

TTestResult t_test_welch(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "t-test needs at least two values per sample");
  }
  const auto sa = mean_std(a);
  const auto sb = mean_std(b);
  const double va = sa.std * sa.std / static_cast<double>(a.size());
  const double vb = sb.std * sb.std / static_cast<double>(b.size());
  const double se2 = va + vb;
  const double diff = sa.mean - sb.mean;

  TTestResult out;
  if (se2 == 0.0) {
    if (diff == 0.0) return {0.0, 1.0, static_cast<double>(a.size() + b.size() - 2)};
    out.t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    out.p = 0.0;
    out.df = static_cast<double>(a.size() + b.size() - 2);
    return out;
  }
  out.t = diff / std::sqrt(se2);
  out.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  if (out.t == 0.0) {
    out.p = 1.0;
    return out;
  }
  boost::math::students_t dist(out.df);
  out.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t))));
  return out;
}

}  // namespace krail
