#pragma once

#include <cstdint>
#include <span>

#include "krail/graph.hpp"
#include "krail/resolver.hpp"

// Data-parallel inner loops. Every kernel has an OpenMP version and a serial
// reference with identical results; the serial one stays for tests and the
// benchmark.
namespace krail::kernels {

/// out[i] = score of store entry positions[i].
void score_entries(const KnowledgeGraph& graph, std::span<const std::size_t> positions,
                   const PreparedAttributes& attrs, const ScoreWeights& weights, std::span<ScoreBreakdown> out);
void score_entries_serial(const KnowledgeGraph& graph, std::span<const std::size_t> positions,
                          const PreparedAttributes& attrs, const ScoreWeights& weights,
                          std::span<ScoreBreakdown> out);

/// out[r] = mean of resample r drawn with replacement from `values`. Resample
/// r uses its own stream derived from (seed, r), so results do not depend on
/// thread count or scheduling.
void bootstrap_means(std::span<const double> values, std::uint64_t seed, std::span<double> out);
void bootstrap_means_serial(std::span<const double> values, std::uint64_t seed, std::span<double> out);

/// SplitMix64; also used to derive per-stream seeds.
struct SplitMix64 {
  using result_type = std::uint64_t;
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Mean computed as x0 + sum(x_i - x0) / n so constant inputs come back exact.
double shifted_mean(std::span<const double> values) noexcept;

int max_threads() noexcept;

}  // namespace krail::kernels
