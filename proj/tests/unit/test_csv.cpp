#include <catch_amalgamated.hpp>

#include "tabtext/csv.hpp"
#include "tabtext/error.hpp"

using namespace tabtext;

TEST_CASE("csv reads plain and quoted fields", "[csv]") {
  const auto records = csv::read("a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\n");
  REQUIRE(records.size() == 2);
  CHECK(records[1].fields == std::vector<std::string>{"1", "x, y", "say \"hi\""});
}

TEST_CASE("csv handles CRLF, BOM, blank lines and embedded newlines", "[csv]") {
  const auto records = csv::read("\xEF\xBB\xBFid,note\r\n\r\n1,\"two\nlines\"\r\n2,\r\n");
  REQUIRE(records.size() == 3);
  CHECK(records[0].fields == std::vector<std::string>{"id", "note"});
  CHECK(records[1].fields[1] == "two\nlines");
  CHECK(records[2].fields == std::vector<std::string>{"2", ""});
  CHECK(records[0].line == 1);
  CHECK(records[1].line == 3);
  CHECK(records[2].line == 5);
}

TEST_CASE("csv keeps a trailing empty field and supports other delimiters", "[csv]") {
  CHECK(csv::read("a;b;\n", ';').front().fields == std::vector<std::string>{"a", "b", ""});
  CHECK(csv::read("x\ty", '\t').front().fields == std::vector<std::string>{"x", "y"});
}

TEST_CASE("unterminated quote is a parse error with its line", "[csv]") {
  try {
    csv::read("a,b\n1,\"open\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("format_record round-trips through read", "[csv]") {
  const std::vector<std::vector<std::string>> rows = {
      {"plain", "with,comma", "with \"quote\"", "multi\nline", ""}, {""}, {"", ""}};
  std::string text;
  for (const auto& r : rows) text += csv::format_record(r);
  const auto back = csv::read(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(back[i].fields == rows[i]);
}
