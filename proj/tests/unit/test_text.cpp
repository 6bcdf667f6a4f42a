#include <doctest.h>

#include <sstream>

#include "krail/delimited.hpp"
#include "krail/error.hpp"
#include "krail/text.hpp"
#include "../support/generators.hpp"
#include "../support/oracles.hpp"

using namespace krail;

TEST_CASE("word tokens are lowercased alphanumeric runs") {
  CHECK(text::word_tokens("Railroad operators, start NEW work-shift!") ==
        std::vector<std::string>{"railroad", "operators", "start", "new", "work", "shift"});
  CHECK(text::word_tokens("  ...  ").empty());
  CHECK(text::token_set("b a b") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("jaccard of token sets") {
  CHECK(text::jaccard({}, {}) == 0.0);
  CHECK(text::jaccard({"a"}, {}) == 0.0);
  CHECK(text::jaccard({"a", "b"}, {"b", "c"}) == doctest::Approx(1.0 / 3.0));
  CHECK(text::jaccard({"a", "b"}, {"a", "b"}) == 1.0);
}

TEST_CASE("jaccard matches the set oracle on generated phrases") {
  testgen::Gen g(11);
  for (int i = 0; i < 500; ++i) {
    const auto a = g.phrase(0, 6);
    const auto b = g.phrase(0, 6);
    CHECK(text::jaccard(text::token_set(a), text::token_set(b)) == oracle::jaccard(oracle::tokens(a), oracle::tokens(b)));
  }
}

TEST_CASE("newline normalization") {
  CHECK(text::normalize_newlines("a \r\nb\t\r\n\r\n") == "a\nb");
  CHECK(text::normalize_newlines("a\rb") == "a\nb");
  CHECK(text::normalize_newlines("") == "");
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(text::hex64(text::fnv1a64("")) == "cbf29ce484222325");
  CHECK(text::hex64(text::fnv1a64("a")) == "af63dc4c8601ec8c");
  CHECK(text::hex64(text::fnv1a64("foobar")) == "85944171f73967e8");
}

TEST_CASE("delimited reader handles quoting") {
  std::istringstream in("\xEF\xBB\xBF" "a, b ,\"c,d\"\n\n\"multi\nline\",\"say \"\"hi\"\"\",\r\n");
  const auto rows = delimited::read_all(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fields == std::vector<std::string>{"a", "b", "c,d"});
  CHECK(rows[0].row == 1);
  CHECK(rows[1].fields == std::vector<std::string>{"multi\nline", "say \"hi\"", ""});
  CHECK(rows[1].row == 3);
}

TEST_CASE("delimited reader rejects broken quoting") {
  std::istringstream unterminated("a,\"b\n");
  CHECK_THROWS_AS(delimited::read_all(unterminated), Error);
  std::istringstream stray("a,\"b\"x\n");
  CHECK_THROWS_AS(delimited::read_all(stray), Error);
}

TEST_CASE("quote and write_row round-trip through the reader") {
  testgen::Gen g(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> fields;
    for (int k = 0; k < 4; ++k) fields.push_back(g.phrase(0, 4, true));
    std::vector<std::string> rendered;
    for (const auto& f : fields) rendered.push_back(delimited::quote(f));
    std::ostringstream out;
    delimited::write_row(out, rendered);
    std::istringstream in(out.str());
    const auto rows = delimited::read_all(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields == fields);
  }
}
