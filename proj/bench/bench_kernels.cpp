#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "krail/graph.hpp"
#include "krail/kernels.hpp"
#include "krail/resolver.hpp"

using namespace krail;

namespace {

const std::vector<std::string> kWords = {"operator", "crew",  "alarm",   "panel",  "valve",     "reading",
                                         "shift",    "check", "procedure", "data", "situation", "bias",
                                         "pump",     "relay", "signal",  "control"};

std::string phrase(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " " : "") + kWords[pick(rng)];
  return out;
}

std::shared_ptr<const KnowledgeGraph> make_graph(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> major(0, 4);
  std::uniform_int_distribution<int> cfm(0, 4);
  std::vector<IdTableEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    IdTableEntry e;
    e.entry_id = "sf-" + std::to_string(100000 + i);
    e.table = TableId::ScenarioFamiliarity;
    e.pif = parse_pif_code("SF" + std::to_string(major(rng)));
    e.cfms = {static_cast<Cfm>(cfm(rng))};
    e.error_rate = 0.001 * static_cast<double>(1 + i % 900);
    e.task = phrase(rng, 5);
    e.error_measure = phrase(rng, 3);
    e.pif_measure = phrase(rng, 4);
    e.other_pifs = phrase(rng, 2);
    e.reference_id = "ref" + std::to_string(i % 17);
    entries.push_back(std::move(e));
  }
  return std::make_shared<const KnowledgeGraph>(build_graph(std::make_shared<const EntryStore>(std::move(entries))));
}

PreparedAttributes query_attrs() {
  ResolvedAttributeSet a;
  a.pif = parse_pif_code("SF4");
  a.cfms = {Cfm::D};
  a.task = "crew check relay panel shift";
  a.pif_measure = "bias reading";
  a.other_pifs = "procedure";
  return prepare(a);
}

template <bool Parallel>
void BM_ScoreEntries(benchmark::State& state) {
  const auto graph = make_graph(static_cast<std::size_t>(state.range(0)));
  const auto& positions = graph->all_entries();
  const auto attrs = query_attrs();
  std::vector<ScoreBreakdown> out(positions.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::score_entries(*graph, positions, attrs, {}, out);
    } else {
      kernels::score_entries_serial(*graph, positions, attrs, {}, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_BootstrapMeans(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution hit(0.6);
  std::vector<double> values(static_cast<std::size_t>(state.range(0)));
  for (auto& v : values) v = hit(rng) ? 1.0 : 0.0;
  std::vector<double> out(10000);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::bootstrap_means(values, 1, out);
    } else {
      kernels::bootstrap_means_serial(values, 1, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

}  // namespace

BENCHMARK(BM_ScoreEntries<true>)->Name("score_entries/omp")->Arg(1000)->Arg(20000);
BENCHMARK(BM_ScoreEntries<false>)->Name("score_entries/serial")->Arg(1000)->Arg(20000);
BENCHMARK(BM_BootstrapMeans<true>)->Name("bootstrap_means/omp")->Arg(50)->Arg(500);
BENCHMARK(BM_BootstrapMeans<false>)->Name("bootstrap_means/serial")->Arg(50)->Arg(500);

BENCHMARK_MAIN();
