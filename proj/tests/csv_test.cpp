#include <doctest.h>

#include <string>
#include <vector>

#include "trendlex/csv.hpp"

using namespace trendlex;

TEST_CASE("escape_field leaves plain text untouched") {
    CHECK(csv::escape_field("alpha") == "alpha");
    CHECK(csv::escape_field("42") == "42");
    CHECK(csv::escape_field("") == "");
}

TEST_CASE("escape_field quotes separators, quotes, and newlines") {
    CHECK(csv::escape_field("a,b") == "\"a,b\"");
    CHECK(csv::escape_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv::escape_field("line1\nline2") == "\"line1\nline2\"");
}

TEST_CASE("join_row joins escaped fields with commas") {
    CHECK(csv::join_row({"a", "b,c", "d"}) == "a,\"b,c\",d");
    CHECK(csv::join_row({}) == "");
}

TEST_CASE("parse skips comments and blank lines") {
    std::string text = "# comment\n\na,b\n# another\nc,d\n";
    std::vector<std::vector<std::string>> rows = csv::parse(text);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b"});
    CHECK(rows[1] == std::vector<std::string>{"c", "d"});
}

TEST_CASE("parse handles quoted fields with embedded structure") {
    std::string text = "\"a,b\",\"say \"\"hi\"\"\",\"1\n2\"\n";
    std::vector<std::vector<std::string>> rows = csv::parse(text);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].size() == 3);
    CHECK(rows[0][0] == "a,b");
    CHECK(rows[0][1] == "say \"hi\"");
    CHECK(rows[0][2] == "1\n2");
}

TEST_CASE("escape/parse round trip") {
    std::vector<std::vector<std::string>> original = {
        {"plain", "with,comma", "with \"quote\""},
        {"", "multi\nline", "trailing space "},
    };
    std::string text;
    for (const auto& row : original) text += csv::join_row(row) + "\n";
    CHECK(csv::parse(text) == original);
}
