#include <doctest.h>

#include "krail/attributes.hpp"
#include "krail/error.hpp"
#include "../support/fixtures.hpp"
#include "../support/generators.hpp"

using namespace krail;

namespace {

std::size_t occurrences(const std::string& hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::vector<std::string> shot_ids(const std::vector<FewShotExample>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.source_entry_id);
  return out;
}

std::vector<AgentReport> sample_reports() {
  std::vector<AgentReport> out;
  for (AgentKind k : kAllAgents) out.push_back(parse_agent_report(k, testfx::agent_reply(k)));
  return out;
}

const CaseInput kCase{testfx::kRailroadCase, TableId::ScenarioFamiliarity};

}  // namespace

TEST_CASE("shot configurations") {
  for (int k : kLegalShotCounts) CHECK(ShotConfig::of(k).k() == k);
  for (int k : {-1, 2, 4, 6, 10}) CHECK_THROWS_AS(ShotConfig::of(k), Error);
  CHECK(ShotConfig{}.k() == 0);
}

TEST_CASE("dimension keys") {
  for (Dimension d : kAllDimensions) CHECK(parse_dimension_key(dimension_key(d)) == d);
  CHECK(dimension_key(Dimension::PifMeasure) == "pif_measure");
  CHECK_FALSE(parse_dimension_key("nope").has_value());
}

TEST_CASE("few-shot selection on the sample table") {
  const auto store = testfx::sample_store();
  const auto T = TableId::ScenarioFamiliarity;
  CHECK(select_few_shots(*store, T, ShotConfig::of(0)).empty());
  CHECK(shot_ids(select_few_shots(*store, T, ShotConfig::of(5))) ==
        std::vector<std::string>{"sf-001", "sf-002", "sf-003", "sf-004", "sf-005"});
  // sf-001 and sf-002 cite distinct references; exclude each in turn to
  // reproduce the take-3-after-filter rule.
  CHECK(shot_ids(select_few_shots(*store, T, ShotConfig::of(3), std::string("cohen2012risk"))) ==
        std::vector<std::string>{"sf-002", "sf-003", "sf-004"});
  CHECK(shot_ids(select_few_shots(*store, T, ShotConfig::of(5), std::string("xing2017integrated"))) ==
        std::vector<std::string>{"sf-001", "sf-002"});
  CHECK(select_few_shots(*store, TableId::TaskComplexity, ShotConfig::of(5)).empty());

  const auto shot = select_few_shots(*store, T, ShotConfig::of(1)).front();
  CHECK(shot.rendered_text.find("SF3.3") != std::string::npos);
  CHECK(shot.rendered_text.find("RANK 1:") != std::string::npos);
}

TEST_CASE("few-shot selection never leaks and takes min(k, eligible)") {
  testgen::Gen g(31);
  for (int trial = 0; trial < 300; ++trial) {
    const EntryStore store(g.entries(static_cast<std::size_t>(g.uniform(0, 15)), g.chance(0.5)));
    const TableId t = g.table();
    const int k = kLegalShotCounts[static_cast<std::size_t>(g.uniform(0, 3))];
    std::optional<std::string> excluded;
    if (g.chance(0.7) && !store.empty()) excluded = g.pick(store.entries()).reference_id;

    std::vector<std::string> eligible;
    for (const auto& e : store.entries()) {
      if (e.table == t && (!excluded || e.reference_id != *excluded)) eligible.push_back(e.entry_id);
    }
    std::sort(eligible.begin(), eligible.end());
    eligible.resize(std::min<std::size_t>(eligible.size(), static_cast<std::size_t>(k)));

    const auto shots = select_few_shots(store, t, ShotConfig::of(k), excluded);
    CHECK(shot_ids(shots) == eligible);
    for (const auto& s : shots) {
      const auto* e = store.find(s.source_entry_id);
      REQUIRE(e);
      if (excluded) CHECK(e->reference_id != *excluded);
    }
  }
}

TEST_CASE("attribute prompt layout") {
  const auto store = testfx::sample_store();
  const auto reports = sample_reports();
  const std::string context = "CONTEXT BLOCK";
  const auto five = build_attribute_prompt(kCase, reports, context,
                                           select_few_shots(*store, kCase.table, ShotConfig::of(5)));
  CHECK(occurrences(five, kExampleBlockMarker) == 5);
  const auto last_example = five.rfind(kExampleBlockMarker);
  const auto case_pos = five.find(testfx::kRailroadCase);
  const auto context_pos = five.find(context);
  const auto reports_pos = five.find("### TaskAnalysis");
  CHECK(context_pos < five.find(kExampleBlockMarker));
  CHECK(last_example < reports_pos);
  CHECK(reports_pos < case_pos);
  CHECK(case_pos < five.find(attribute_output_contract()));

  const auto zero = build_attribute_prompt(kCase, reports, context, {});
  CHECK(occurrences(zero, kExampleBlockMarker) == 0);
  CHECK(zero == build_attribute_prompt(kCase, reports, context, {}));
  CHECK(five == build_attribute_prompt(kCase, reports, context,
                                       select_few_shots(*store, kCase.table, ShotConfig::of(5))));

  const auto ablation = build_attribute_prompt(kCase, {}, context, {});
  CHECK(ablation.find("### TaskAnalysis") == std::string::npos);
  CHECK(ablation.find(testfx::kRailroadCase) != std::string::npos);
}

TEST_CASE("prompt length grows with k") {
  testgen::Gen g(41);
  for (int trial = 0; trial < 30; ++trial) {
    const EntryStore store(g.entries(static_cast<std::size_t>(g.uniform(0, 12)), true));
    const TableId t = store.empty() ? TableId::ScenarioFamiliarity : store.entries().front().table;
    std::size_t last = 0;
    for (int k : kLegalShotCounts) {
      const auto len = build_attribute_prompt({"some case", t}, {}, "ctx", select_few_shots(store, t, ShotConfig::of(k))).size();
      CHECK(len >= last);
      last = len;
    }
  }
}

TEST_CASE("extract_attributes reads ranked blocks") {
  const auto text = testfx::attribute_reply({"SF4", "SF3.3"}, {"D", "D|U"}, {"railroad start"}, {"new workshift"},
                                            {"None reported"});
  const auto c = extract_attributes(text);
  REQUIRE(c.pif.size() == 2);
  CHECK(c.pif[0].to_string() == "SF4");
  CHECK(c.pif[1].to_string() == "SF3.3");
  CHECK(c.cfm == std::vector<CfmSet>{{Cfm::D}, {Cfm::D, Cfm::U}});
  CHECK(c.task_and_error_measure == std::vector<std::string>{"railroad start"});
  CHECK(c.warnings.empty());
  for (Dimension d : kAllDimensions) CHECK(c.candidate_count(d) >= 1);
}

TEST_CASE("extract_attributes orders by rank and tolerates markup") {
  const std::string text =
      "Here is my answer.\n**PIF:**\n- RANK 2: SF0\n- RANK 1: SF4\nRANK 3: bogus\n"
      "## CFM:\nRANK 1. U\nTASK AND ERROR MEASURE:\nRANK 1) a task\nRANK 2: A task!\n"
      "PIF_MEASURE:\nRANK 1: m\nOTHER_PIFS_AND_UNCERTAINTY:\nRANK 1: o\n";
  const auto c = extract_attributes(text);
  REQUIRE(c.pif.size() == 2);
  CHECK(c.pif[0].to_string() == "SF4");
  CHECK(c.pif[1].to_string() == "SF0");
  CHECK(c.task_and_error_measure.size() == 1);
  CHECK(c.warnings.size() == 1);
}

TEST_CASE("extract_attributes errors") {
  const auto missing = "PIF:\nRANK 1: SF4\nCFM:\nRANK 1: D\nTASK_AND_ERROR_MEASURE:\nRANK 1: t\n"
                       "OTHER_PIFS_AND_UNCERTAINTY:\nRANK 1: o\n";
  try {
    extract_attributes(missing);
    FAIL("expected MissingDimension");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingDimension);
    CHECK(e.subject() == "pif_measure");
    CHECK(e.raw_text() == missing);
  }
  const auto invalid = testfx::attribute_reply({"4SF", "x"}, {"D"}, {"t"}, {"m"}, {"o"});
  try {
    extract_attributes(invalid);
    FAIL("expected NoValidCandidate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoValidCandidate);
    CHECK(e.subject() == "pif");
  }
}

TEST_CASE("lists beyond five are truncated with a warning") {
  const auto text = testfx::attribute_reply({"SF0", "SF1", "SF2", "SF3", "SF4", "SF3.1", "SF3.2"}, {"D"}, {"t"},
                                            {"m"}, {"o"});
  const auto c = extract_attributes(text);
  CHECK(c.pif.size() == 5);
  CHECK(c.pif.back().to_string() == "SF4");
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("pif") == 0);
}

TEST_CASE("extraction is idempotent on its canonical rendering") {
  testgen::Gen g(51);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> pif, cfm, task, pm, other;
    for (int i = g.uniform(1, 7); i > 0; --i) pif.push_back(g.chance(0.9) ? g.pif().to_string() : "9X");
    for (int i = g.uniform(1, 6); i > 0; --i) cfm.push_back(render_cfm_set(g.cfms(), g.chance(0.5) ? "|" : " / "));
    for (int i = g.uniform(1, 6); i > 0; --i) task.push_back(g.phrase(1, 5));
    for (int i = g.uniform(1, 3); i > 0; --i) pm.push_back(g.phrase(1, 5));
    for (int i = g.uniform(1, 3); i > 0; --i) other.push_back(g.phrase(1, 5));
    pif.push_back("SF1");
    CandidateAttributeSet first;
    try {
      first = extract_attributes(testfx::attribute_reply(pif, cfm, task, pm, other));
    } catch (const Error&) {
      continue;
    }
    const auto canonical = render_candidates(first);
    const auto second = extract_attributes(canonical);
    CHECK(second.same_candidates(first));
    CHECK(render_candidates(second) == canonical);
  }
}
