#include <doctest.h>

#include <sstream>

#include "hqc/csv.hpp"
#include "hqc/error.hpp"

using hqc::csv::read_all;

namespace {
std::vector<hqc::csv::Record> parse(const std::string& text) {
  std::istringstream in(text);
  return read_all(in);
}
}  // namespace

TEST_CASE("plain records with LF and CRLF") {
  for (const std::string eol : {"\n", "\r\n"}) {
    const auto recs = parse("a,b,c" + eol + "1,2,3" + eol);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].fields == std::vector<std::string>{"a", "b", "c"});
    CHECK(recs[1].fields == std::vector<std::string>{"1", "2", "3"});
    CHECK(recs[1].line == 2);
  }
}

TEST_CASE("missing trailing newline and empty fields") {
  const auto recs = parse("a,,c\n,,");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].fields == std::vector<std::string>{"a", "", "c"});
  CHECK(recs[1].fields == std::vector<std::string>{"", "", ""});
}

TEST_CASE("quoted fields with commas, quotes and newlines") {
  const auto recs = parse("name,v\n\"Earth, Wind & Fire\",1\n\"say \"\"hi\"\"\",2\n\"two\nlines\",3\nlast,4\n");
  REQUIRE(recs.size() == 5);
  CHECK(recs[1].fields[0] == "Earth, Wind & Fire");
  CHECK(recs[2].fields[0] == "say \"hi\"");
  CHECK(recs[3].fields[0] == "two\nlines");
  CHECK(recs[3].line == 4);
  CHECK(recs[4].line == 6);
}

TEST_CASE("unterminated quote reports its line") {
  try {
    parse("a,b\n1,2\n\"open,3\n");
    FAIL("expected ParseError");
  } catch (const hqc::ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("quote / join round trip") {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  CHECK_FALSE(hqc::csv::needs_quoting("plain"));
  CHECK(hqc::csv::needs_quoting("a,b"));
  const auto line = hqc::csv::join(fields);
  const auto back = parse(line + "\n");
  REQUIRE(back.size() == 1);
  CHECK(back[0].fields == fields);
}
