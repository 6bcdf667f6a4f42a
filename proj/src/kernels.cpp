#include "krail/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace krail::kernels {

void score_entries(const KnowledgeGraph& graph, std::span<const std::size_t> positions,
                   const PreparedAttributes& attrs, const ScoreWeights& weights, std::span<ScoreBreakdown> out) {
  const auto& entries = graph.store().entries();
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
#pragma omp parallel for schedule(static) if (n > 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t p = positions[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = match_score(entries[p], graph.features(p), attrs, weights);
  }
}

void score_entries_serial(const KnowledgeGraph& graph, std::span<const std::size_t> positions,
                          const PreparedAttributes& attrs, const ScoreWeights& weights,
                          std::span<ScoreBreakdown> out) {
  const auto& entries = graph.store().entries();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::size_t p = positions[i];
    out[i] = match_score(entries[p], graph.features(p), attrs, weights);
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 mix(seed ^ SplitMix64(stream)());
  return mix();
}

double shifted_mean(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  const double x0 = values[0];
  double acc = 0.0;
  for (double v : values) acc += v - x0;
  return x0 + acc / static_cast<double>(values.size());
}

namespace {

__extension__ using u128 = unsigned __int128;

// One resample's mean; identical arithmetic in both kernels.
inline double resample_mean(std::span<const double> values, std::uint64_t seed, std::size_t r) {
  SplitMix64 rng(derive_seed(seed, r));
  const std::size_t n = values.size();
  double x0 = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Multiply-shift maps a 64-bit draw onto [0, n).
    const auto j = static_cast<std::size_t>((static_cast<u128>(rng()) * n) >> 64);
    if (i == 0) x0 = values[j];
    acc += values[j] - x0;
  }
  return x0 + acc / static_cast<double>(n);
}

}  // namespace

void bootstrap_means(std::span<const double> values, std::uint64_t seed, std::span<double> out) {
  if (values.empty()) return;
  const auto resamples = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < resamples; ++r) {
    out[static_cast<std::size_t>(r)] = resample_mean(values, seed, static_cast<std::size_t>(r));
  }
}

void bootstrap_means_serial(std::span<const double> values, std::uint64_t seed, std::span<double> out) {
  if (values.empty()) return;
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = resample_mean(values, seed, r);
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace krail::kernels
