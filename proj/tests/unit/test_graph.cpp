#include <doctest.h>

#include <map>

#include "krail/graph.hpp"
#include "../support/fixtures.hpp"
#include "../support/generators.hpp"
#include "../support/oracles.hpp"

using namespace krail;

namespace {

std::vector<std::string> ids(const std::vector<IdTableEntry>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.entry_id);
  return out;
}

std::size_t count_edges(const KnowledgeGraph& g, const std::string& from, EdgeLabel label) {
  std::size_t n = 0;
  for (const auto& e : g.edges()) n += e.from == from && e.label == label;
  return n;
}

}  // namespace

TEST_CASE("sample graph node counts") {
  const auto g = testfx::sample_graph();
  CHECK(g->count(NodeKind::Entry) == 6);
  CHECK(g->count(NodeKind::Pif) == 3);
  CHECK(g->count(NodeKind::Cfm) == 3);
  CHECK(g->count(NodeKind::Table) == 1);
  CHECK(g->node("pif:SF3.3"));
  CHECK(g->node("cfm:DM"));
  CHECK(g->node("entry:sf-001"));
  CHECK_FALSE(g->node("pif:SF9"));
}

TEST_CASE("empty store builds an empty graph") {
  const auto g = build_graph(EntryStore{});
  CHECK(g.nodes().empty());
  CHECK(g.edges().empty());
  CHECK(query_entries(g, {}).empty());
  CHECK(serialize_graph_context(g, TableId::ScenarioFamiliarity) == kEmptyContextSentinel);
}

TEST_CASE("shared PIF values share one node") {
  testgen::Gen gen(4);
  for (int trial = 0; trial < 40; ++trial) {
    auto store = std::make_shared<const EntryStore>(gen.entries(static_cast<std::size_t>(gen.uniform(1, 30))));
    const auto g = build_graph(store);
    std::map<std::string, std::size_t> by_pif;
    for (const auto& e : store->entries()) ++by_pif[e.pif.to_string()];
    CHECK(g.count(NodeKind::Pif) == by_pif.size());
    for (const auto& [pif, n] : by_pif) {
      std::size_t incoming = 0;
      for (const auto& e : g.edges()) incoming += e.label == EdgeLabel::HasPif && e.to == "pif:" + pif;
      CHECK(incoming == n);
      CHECK(g.entries_into("pif:" + pif).size() == n);
    }
  }
}

TEST_CASE("edge cardinality per entry node") {
  testgen::Gen gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    auto store = std::make_shared<const EntryStore>(gen.entries(static_cast<std::size_t>(gen.uniform(0, 30))));
    const auto g = build_graph(store);
    for (const auto& e : store->entries()) {
      const auto id = node_id_for(NodeKind::Entry, e.entry_id);
      CHECK(count_edges(g, id, EdgeLabel::InTable) == 1);
      CHECK(count_edges(g, id, EdgeLabel::HasPif) == 1);
      CHECK(count_edges(g, id, EdgeLabel::HasCfm) == e.cfms.size());
      CHECK(count_edges(g, id, EdgeLabel::Cites) == 1);
    }
    for (const auto& edge : g.edges()) {
      CHECK(g.node(edge.from));
      CHECK(g.node(edge.to));
    }
  }
}

TEST_CASE("builds are deterministic and independent of entry order") {
  testgen::Gen gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto entries = gen.entries(20);
    const auto a = build_graph(EntryStore(entries));
    std::shuffle(entries.begin(), entries.end(), gen.engine());
    const auto b = build_graph(EntryStore(entries));
    REQUIRE(a.nodes().size() == b.nodes().size());
    for (std::size_t i = 0; i < a.nodes().size(); ++i) CHECK(a.nodes()[i].node_id == b.nodes()[i].node_id);
    CHECK(a.edges() == b.edges());
    CHECK(export_triples(a) == export_triples(b));
    for (TableId t : kAllTables) CHECK(serialize_graph_context(a, t) == serialize_graph_context(b, t));
  }
}

TEST_CASE("query example over the sample rows") {
  const auto g = testfx::sample_graph();
  EntryFilter f;
  f.pif = parse_pif_code("SF4");
  f.cfm = Cfm::U;
  const auto got = query_entries(*g, f);
  CHECK(ids(got) == std::vector<std::string>{"sf-004", "sf-006"});
  REQUIRE(got.size() == 2);
  CHECK(got[0].error_rate == 0.25);
  CHECK(got[1].error_rate == 0.0082);

  EntryFilter major;
  major.pif = parse_pif_code("SF3");
  CHECK(query_entries(*g, major).empty());
  major.pif_prefix_major_only = true;
  CHECK(ids(query_entries(*g, major)) == std::vector<std::string>{"sf-001"});

  EntryFilter words;
  words.task_contains = {"EOP", "situation"};
  CHECK(ids(query_entries(*g, words)) == std::vector<std::string>{"sf-003", "sf-004"});
  CHECK(query_entries(*g, {}).size() == 6);
}

TEST_CASE("query_entries equals a linear scan") {
  testgen::Gen gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto entries = gen.entries(static_cast<std::size_t>(gen.uniform(0, 30)));
    const auto g = build_graph(EntryStore(entries));
    for (int q = 0; q < 5; ++q) {
      const auto f = gen.filter(entries);
      CHECK(ids(query_entries(g, f)) == oracle::query(entries, f));
    }
  }
}

TEST_CASE("graph context rendering") {
  const auto g = testfx::sample_graph();
  const auto text = serialize_graph_context(*g, TableId::ScenarioFamiliarity, 2);
  const auto first_block_end = text.find("sf-002");
  REQUIRE(first_block_end != std::string::npos);
  const auto first = text.substr(0, first_block_end);
  CHECK(first.find("PIF SF3.3") != std::string::npos);
  CHECK(first.find("error rate 0.5") != std::string::npos);
  CHECK(text.find("sf-003") == std::string::npos);
  CHECK(text == serialize_graph_context(*g, TableId::ScenarioFamiliarity, 2));
  CHECK(serialize_graph_context(*g, TableId::TaskComplexity) == kEmptyContextSentinel);
}

TEST_CASE("context length is monotone in max_entries") {
  testgen::Gen gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = build_graph(EntryStore(gen.entries(static_cast<std::size_t>(gen.uniform(1, 20)), true)));
    const TableId t = g.store().entries().front().table;
    std::size_t last = 0;
    for (std::size_t k = 1; k <= 25; ++k) {
      const auto len = serialize_graph_context(g, t, k).size();
      CHECK(len >= last);
      last = len;
    }
  }
}

TEST_CASE("triple export is sorted and tab separated") {
  const auto g = testfx::sample_graph();
  const auto lines = text::split_lines(export_triples(*g));
  CHECK(lines.size() == g->edges().size());
  CHECK(std::is_sorted(lines.begin(), lines.end()));
  CHECK(std::find(lines.begin(), lines.end(), "entry:sf-001\tHAS_PIF\tpif:SF3.3") != lines.end());
}
