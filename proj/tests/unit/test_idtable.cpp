#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "krail/error.hpp"
#include "krail/idtable.hpp"
#include "../support/fixtures.hpp"
#include "../support/generators.hpp"

using namespace krail;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

EntryStore load_text(const std::string& s, std::optional<TableId> t = std::nullopt) {
  std::istringstream in(s);
  return load_idtable(in, t);
}

const std::string kHeader = std::string(kIdTableHeader) + "\n";

}  // namespace

TEST_CASE("parse_pif_code examples") {
  const auto a = parse_pif_code("SF3.3");
  CHECK(a.prefix == "SF");
  CHECK(a.major == 3);
  CHECK(a.minor == 3u);
  const auto b = parse_pif_code("SF0");
  CHECK(b.major == 0);
  CHECK_FALSE(b.minor.has_value());
  CHECK(code_of([] { parse_pif_code("3.3SF"); }) == ErrorCode::MalformedPifCode);
  CHECK(code_of([] { parse_pif_code(""); }) == ErrorCode::MalformedPifCode);
  CHECK_FALSE(try_parse_pif_code("SF3.").has_value());
  CHECK_FALSE(try_parse_pif_code("sf3").has_value());
  CHECK(parse_pif_code("INF12.7").to_string() == "INF12.7");
}

TEST_CASE("canonical PIF strings round-trip") {
  testgen::Gen g(21);
  for (int i = 0; i < 500; ++i) {
    const auto p = g.pif();
    const auto s = p.to_string();
    CHECK(parse_pif_code(s) == p);
    CHECK(parse_pif_code(s).to_string() == s);
  }
}

TEST_CASE("parse_error_rate examples") {
  CHECK(parse_error_rate("1.6E-3") == 0.0016);
  CHECK(parse_error_rate("0.5") == 0.5);
  CHECK(parse_error_rate("1") == 1.0);
  CHECK(parse_error_rate("2.5e-1") == 0.25);
  CHECK(code_of([] { parse_error_rate("1.2"); }) == ErrorCode::RateOutOfRange);
  CHECK(code_of([] { parse_error_rate("0"); }) == ErrorCode::RateOutOfRange);
  CHECK(code_of([] { parse_error_rate("-0.1"); }) == ErrorCode::RateOutOfRange);
  CHECK(code_of([] { parse_error_rate("abc"); }) == ErrorCode::MalformedRate);
  CHECK(code_of([] { parse_error_rate(""); }) == ErrorCode::MalformedRate);
}

TEST_CASE("parse_error_rate accepts exactly decimal and scientific spellings") {
  // Strings over a small alphabet, classified by a hand-written recogniser
  // for [+-] (digits [. digits] | . digits) [eE [+-] digits].
  auto grammar = [](const std::string& s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    auto digits = [&] {
      const std::size_t b = i;
      while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
      return i - b;
    };
    std::size_t intd = digits();
    std::size_t fracd = 0;
    if (i < s.size() && s[i] == '.') {
      ++i;
      fracd = digits();
    }
    if (intd + fracd == 0) return false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
      ++i;
      if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
      if (digits() == 0) return false;
    }
    return i == s.size();
  };
  testgen::Gen g(5);
  const std::string alphabet = "0123456789..eE-+x ";
  int accepted = 0;
  for (int n = 0; n < 20000; ++n) {
    std::string s;
    const int len = g.uniform(1, 7);
    for (int k = 0; k < len; ++k) s += alphabet[static_cast<std::size_t>(g.uniform(0, static_cast<int>(alphabet.size()) - 1))];
    if (s.front() == ' ' || s.back() == ' ') continue;
    bool parsed = true;
    try {
      const double v = parse_error_rate(s);
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
      ++accepted;
    } catch (const Error& e) {
      parsed = e.code() == ErrorCode::RateOutOfRange;
      if (!parsed) CHECK(e.code() == ErrorCode::MalformedRate);
    }
    INFO("text: '" << s << "'");
    CHECK(parsed == grammar(s));
  }
  CHECK(accepted > 0);
}

TEST_CASE("render_error_rate canonical forms") {
  CHECK(render_error_rate(0.0016) == "1.6E-3");
  CHECK(render_error_rate(3.5e-4) == "3.5E-4");
  CHECK(render_error_rate(0.25) == "0.25");
  CHECK(render_error_rate(0.5) == "0.5");
  CHECK(render_error_rate(1.0) == "1");
  testgen::Gen g(8);
  for (int i = 0; i < 1000; ++i) {
    const double r = g.rate();
    CHECK(parse_error_rate(render_error_rate(r)) == r);
  }
}

TEST_CASE("cfm sets parse several separators") {
  CHECK(parse_cfm_set("D|U") == CfmSet{Cfm::D, Cfm::U});
  CHECK(parse_cfm_set("D / U") == CfmSet{Cfm::D, Cfm::U});
  CHECK(parse_cfm_set("DM") == CfmSet{Cfm::DM});
  CHECK_FALSE(parse_cfm_set("").has_value());
  CHECK_FALSE(parse_cfm_set("D|X").has_value());
  CHECK(render_cfm_set({Cfm::U, Cfm::D}) == "D|U");
}

TEST_CASE("validate_entry reports one diagnostic per violation") {
  const auto store = testfx::sample_store();
  IdTableEntry e = *store->find("sf-002");
  CHECK(validate_entry(e).empty());
  e.cfms.clear();
  CHECK(validate_entry(e) == std::vector<std::string>{"cfms empty"});
  e.cfms = {Cfm::D};
  e.error_rate = 0.0;
  CHECK(validate_entry(e) == std::vector<std::string>{"rate out of range"});
  e.cfms.clear();
  CHECK(validate_entry(e).size() == 2);
}

TEST_CASE("sample table loads with the published rows") {
  const auto store = testfx::sample_store();
  REQUIRE(store->size() == 6);
  const auto* railroad = store->find("sf-002");
  REQUIRE(railroad);
  CHECK(railroad->task.find("Railroad") != std::string::npos);
  CHECK(railroad->error_rate == 0.2);
  CHECK(store->find("sf-003")->error_rate == 0.0016);
  CHECK(store->find("sf-006")->cfms == CfmSet{Cfm::D, Cfm::U});
  CHECK(store->find("sf-001")->pif.to_string() == "SF3.3");
  CHECK(store->tables() == std::vector<TableId>{TableId::ScenarioFamiliarity});
  std::vector<std::string> order;
  for (const auto& e : store->entries()) order.push_back(e.entry_id);
  CHECK(order == std::vector<std::string>{"sf-001", "sf-002", "sf-003", "sf-004", "sf-005", "sf-006"});
}

TEST_CASE("loader errors") {
  CHECK(load_text(kHeader).size() == 0);
  const std::string row = "a,SF,SF4,D,0.2,task,,pm,,,ref\n";
  CHECK(code_of([&] { load_text(kHeader + row + row); }) == ErrorCode::DuplicateEntryId);
  CHECK(code_of([&] { load_text("id,table\n" + row); }) == ErrorCode::FormatError);
  CHECK(code_of([&] { load_text(kHeader + "a,SF,SF4,D,0.2\n"); }) == ErrorCode::FormatError);
  CHECK(code_of([&] { load_text(kHeader + row, TableId::TaskComplexity); }) == ErrorCode::TableMismatch);
  CHECK(code_of([&] { load_text(""); }) == ErrorCode::FormatError);

  try {
    load_text(kHeader + row + "b,SF,4SF,D,0.2,task,,pm,,,ref\n");
    FAIL("expected FieldError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FieldError);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  try {
    load_text(kHeader + "b,SF,SF4,D,1.5,task,,pm,,,ref\n");
    FAIL("expected FieldError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FieldError);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("indexes agree with brute-force filters") {
  testgen::Gen g(99);
  for (int trial = 0; trial < 50; ++trial) {
    const EntryStore store(g.entries(static_cast<std::size_t>(g.uniform(0, 40))));
    const auto& all = store.entries();
    for (TableId t : kAllTables) {
      std::vector<std::size_t> want;
      for (std::size_t i = 0; i < all.size(); ++i) if (all[i].table == t) want.push_back(i);
      CHECK(store.by_table(t) == want);
    }
    for (Cfm c : kAllCfms) {
      std::vector<std::size_t> want;
      for (std::size_t i = 0; i < all.size(); ++i) if (all[i].cfms.count(c)) want.push_back(i);
      CHECK(store.by_cfm(c) == want);
    }
    for (const auto& e : all) {
      std::vector<std::size_t> want;
      for (std::size_t i = 0; i < all.size(); ++i) if (all[i].pif == e.pif) want.push_back(i);
      CHECK(store.by_pif(e.pif.to_string()) == want);
      CHECK(store.find(e.entry_id) == &e);
    }
    CHECK(store.by_pif("ZZ9").empty());
  }
}

TEST_CASE("generated files round-trip to a fixed point") {
  testgen::Gen g(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const auto entries = g.entries(static_cast<std::size_t>(g.uniform(0, 25)));
    const auto text = g.idtable_text(entries);
    const auto first = load_text(text);
    CHECK(first.entries() == entries);
    const auto once = serialize_idtable(first);
    const auto twice = serialize_idtable(load_text(once));
    CHECK(once == twice);
  }
}

TEST_CASE("sample file round-trips") {
  const auto store = testfx::sample_store();
  const auto text = serialize_idtable(*store);
  CHECK(load_text(text).entries() == store->entries());
  CHECK(text.find("1.6E-3") != std::string::npos);
  CHECK(text.find("D|U") != std::string::npos);
}
