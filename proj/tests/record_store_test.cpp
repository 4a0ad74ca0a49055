#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "trendlex/errors.hpp"
#include "trendlex/record_store.hpp"

using namespace trendlex;
using testsup::rec;

namespace {

// Per-venue retained counts from the source study; the published total is 26,104.
const std::vector<std::tuple<std::string, int, std::size_t>> kVenueCounts = {
    {"cvpr", 2023, 2353},    {"cvpr", 2024, 2713},    {"cvpr", 2025, 2871},
    {"iclr", 2023, 4372},    {"iclr", 2024, 2260},    {"iclr", 2025, 3704},
    {"neurips", 2023, 3337}, {"neurips", 2024, 4494},
};

std::vector<PaperRecord> study_scale_records() {
    std::vector<PaperRecord> records;
    for (const auto& [venue, year, count] : kVenueCounts)
        for (std::size_t i = 0; i < count; ++i)
            records.push_back(rec(venue + ":" + std::to_string(year) + ":" + std::to_string(i),
                                  venue, year, "title " + std::to_string(i), "abstract text"));
    return records;
}

}  // namespace

TEST_CASE("one well-formed line maps directly to one record") {
    std::istringstream in(R"({"venue":"cvpr","year":2024,"title":"T","abstract":"A"})");
    ParseResult result = parse_records(in);
    CHECK(result.diagnostics.empty());
    REQUIRE(result.records.size() == 1);
    const PaperRecord& r = result.records[0];
    CHECK(r.venue == "cvpr");
    CHECK(r.year == 2024);
    CHECK(r.title == "T");
    CHECK(r.abstract == "A");
    CHECK_FALSE(r.trend_only);
    CHECK_FALSE(r.id.empty());  // derived when absent
}

TEST_CASE("empty stream yields zero records and zero diagnostics") {
    std::istringstream in("");
    ParseResult result = parse_records(in);
    CHECK(result.records.empty());
    CHECK(result.diagnostics.empty());
}

TEST_CASE("a malformed middle line yields a diagnostic naming line 2") {
    std::istringstream in(
        "{\"venue\":\"cvpr\",\"year\":2024,\"title\":\"a\",\"abstract\":\"x\"}\n"
        "not-structured\n"
        "{\"venue\":\"iclr\",\"year\":2023,\"title\":\"b\",\"abstract\":\"y\"}\n");
    ParseResult result = parse_records(in);
    CHECK(result.records.size() == 2);
    REQUIRE(result.diagnostics.size() == 1);
    CHECK(result.diagnostics[0].line == 2);
}

TEST_CASE("parser accepts numeric-string years and normalizes venues") {
    std::istringstream in(R"({"venue":"  CVPR ","year":"2024","title":"T","abstract":"A"})");
    ParseResult result = parse_records(in);
    CHECK(result.diagnostics.empty());
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].venue == "cvpr");
    CHECK(result.records[0].year == 2024);
}

TEST_CASE("unparsable or out-of-range years are rejected with diagnostics") {
    std::istringstream in(
        "{\"venue\":\"cvpr\",\"year\":\"twenty\",\"title\":\"a\",\"abstract\":\"x\"}\n"
        "{\"venue\":\"cvpr\",\"year\":1800,\"title\":\"b\",\"abstract\":\"y\"}\n");
    ParseResult result = parse_records(in);
    CHECK(result.records.empty());
    REQUIRE(result.diagnostics.size() == 2);
    CHECK(result.diagnostics[0].line == 1);
    CHECK(result.diagnostics[1].line == 2);
}

TEST_CASE("trend_only defaults from the content window and honors explicit flags") {
    std::istringstream in(
        "{\"venue\":\"iclr\",\"year\":2022,\"title\":\"a\",\"abstract\":\"x\"}\n"
        "{\"venue\":\"iclr\",\"year\":2024,\"title\":\"b\",\"abstract\":\"y\"}\n"
        "{\"venue\":\"iclr\",\"year\":2024,\"title\":\"c\",\"abstract\":\"z\",\"trend_only\":true}\n");
    ParseResult result = parse_records(in);
    REQUIRE(result.records.size() == 3);
    CHECK(result.records[0].trend_only);        // 2022 < content_start_year 2023
    CHECK_FALSE(result.records[1].trend_only);  // content year
    CHECK(result.records[2].trend_only);        // explicit flag wins
}

TEST_CASE("derived ids are deterministic") {
    auto parse_one = [] {
        std::istringstream in(R"({"venue":"cvpr","year":2024,"title":"Same","abstract":"A"})");
        return parse_records(in).records.at(0).id;
    };
    CHECK(parse_one() == parse_one());
}

TEST_CASE("missing abstract parses as empty and is dropped by the filter") {
    std::istringstream in(R"({"venue":"cvpr","year":2024,"title":"T"})");
    ParseResult result = parse_records(in);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].abstract.empty());
    FilterResult filtered = filter_and_dedup(result.records);
    CHECK(filtered.retained.empty());
    CHECK(filtered.stats.per_slice.at({"cvpr", 2024}).empty_dropped == 1);
}

TEST_CASE("two records identical except id dedup to one") {
    std::vector<PaperRecord> records = {
        rec("a", "cvpr", 2024, "Same Title", "first"),
        rec("b", "cvpr", 2024, "same  title", "second"),  // casefold+collapse collision
    };
    FilterResult result = filter_and_dedup(records);
    REQUIRE(result.retained.size() == 1);
    CHECK(result.retained[0].id == "a");  // first occurrence wins
    CHECK(result.retained[0].abstract == "first");
    CHECK(result.stats.per_slice.at({"cvpr", 2024}).duplicate_dropped == 1);
}

TEST_CASE("whitespace-only abstract counts as empty") {
    std::vector<PaperRecord> records = {rec("a", "cvpr", 2024, "T", "   ")};
    FilterResult result = filter_and_dedup(records);
    CHECK(result.retained.empty());
    const SliceStats& slice = result.stats.per_slice.at({"cvpr", 2024});
    CHECK(slice.raw_count == 1);
    CHECK(slice.empty_dropped == 1);
    CHECK(slice.retained == 0);
}

TEST_CASE("the source study venue counts sum to 26,104") {
    FilterResult result = filter_and_dedup(study_scale_records());
    CHECK(result.stats.total_retained == 26104);
    for (const auto& [venue, year, count] : kVenueCounts) {
        const SliceStats& slice = result.stats.per_slice.at({venue, year});
        CHECK(slice.retained == count);
        CHECK(slice.duplicate_dropped == 0);
        CHECK(slice.empty_dropped == 0);
    }
    CHECK(result.stats.per_slice.count({"neurips", 2025}) == 0);
}

TEST_CASE("conservation identity holds per slice and in total") {
    std::vector<PaperRecord> records = {
        rec("a", "cvpr", 2024, "One", "x"),   rec("b", "cvpr", 2024, "one", "dup"),
        rec("c", "cvpr", 2024, "Two", "  "),  rec("d", "iclr", 2023, "Three", "y"),
        rec("e", "iclr", 2023, "Four", ""),
    };
    FilterResult result = filter_and_dedup(records);
    std::size_t total = 0;
    for (const auto& [key, slice] : result.stats.per_slice) {
        CHECK(slice.raw_count ==
              slice.retained + slice.empty_dropped + slice.duplicate_dropped);
        total += slice.retained;
    }
    CHECK(total == result.stats.total_retained);
    CHECK(result.stats.total_retained == 2);
}

TEST_CASE("dedup is idempotent") {
    std::vector<PaperRecord> records = {
        rec("a", "cvpr", 2024, "One", "x"),
        rec("b", "cvpr", 2024, "one", "dup"),
        rec("c", "iclr", 2023, "Two", "y"),
    };
    FilterResult once = filter_and_dedup(records);
    FilterResult twice = filter_and_dedup(once.retained);
    CHECK(twice.retained == once.retained);
    for (const auto& [key, slice] : twice.stats.per_slice) {
        CHECK(slice.duplicate_dropped == 0);
        CHECK(slice.empty_dropped == 0);
    }
}

TEST_CASE("stats counts are permutation-invariant") {
    std::vector<PaperRecord> records = {
        rec("a", "cvpr", 2024, "One", "x"),  rec("b", "cvpr", 2024, "one", "dup"),
        rec("c", "cvpr", 2024, "Two", " "),  rec("d", "iclr", 2023, "Three", "y"),
        rec("e", "neurips", 2024, "Four", "z"),
    };
    FilterResult baseline = filter_and_dedup(records);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(records.begin(), records.end(), rng);
        FilterResult shuffled = filter_and_dedup(records);
        CHECK(shuffled.stats.total_retained == baseline.stats.total_retained);
        REQUIRE(shuffled.stats.per_slice.size() == baseline.stats.per_slice.size());
        for (const auto& [key, slice] : baseline.stats.per_slice) {
            const SliceStats& other = shuffled.stats.per_slice.at(key);
            CHECK(other.raw_count == slice.raw_count);
            CHECK(other.empty_dropped == slice.empty_dropped);
            CHECK(other.duplicate_dropped == slice.duplicate_dropped);
            CHECK(other.retained == slice.retained);
        }
    }
}

TEST_CASE("retained output order is canonical by id") {
    std::vector<PaperRecord> records = {
        rec("z9", "cvpr", 2024, "One", "x"),
        rec("a1", "iclr", 2023, "Two", "y"),
        rec("m5", "neurips", 2024, "Three", "z"),
    };
    FilterResult result = filter_and_dedup(records);
    REQUIRE(result.retained.size() == 3);
    CHECK(result.retained[0].id == "a1");
    CHECK(result.retained[1].id == "m5");
    CHECK(result.retained[2].id == "z9");
}

TEST_CASE("persist/load roundtrip is record-for-record identical") {
    testsup::TempDir tmp("store");
    std::vector<PaperRecord> records = {
        rec("a", "cvpr", 2024, "One", "x"),
        rec("b", "iclr", 2022, "Two", "y", /*trend_only=*/true),
        rec("c", "neurips", 2024, "Three", "z"),
    };
    Corpus corpus = testsup::make_corpus(records);
    persist_corpus(corpus, tmp.path() / "corpus");
    Corpus loaded = load_corpus(tmp.path() / "corpus");
    CHECK(loaded.records() == corpus.records());
    CHECK(loaded.stats().total_retained == corpus.stats().total_retained);
    REQUIRE(loaded.has_slice("iclr", 2022));
    CHECK(loaded.records()[1].trend_only);
}

TEST_CASE("load from a nonexistent path raises NotFound") {
    testsup::TempDir tmp("missing");
    CHECK_THROWS_AS(load_corpus(tmp.path() / "no-such-corpus"), NotFound);
}

TEST_CASE("format version mismatch names both versions") {
    testsup::TempDir tmp("version");
    Corpus corpus = testsup::make_corpus({rec("a", "cvpr", 2024, "One", "x")});
    persist_corpus(corpus, tmp.path() / "corpus");
    std::string meta = testsup::slurp(tmp.path() / "corpus" / "corpus_meta.json");
    std::string needle = "\"format_version\": \"1\"";
    auto pos = meta.find(needle);
    REQUIRE(pos != std::string::npos);
    meta.replace(pos, needle.size(), "\"format_version\": \"99\"");
    testsup::spit(tmp.path() / "corpus" / "corpus_meta.json", meta);
    try {
        load_corpus(tmp.path() / "corpus");
        FAIL("expected VersionMismatch");
    } catch (const VersionMismatch& e) {
        std::string what = e.what();
        CHECK(what.find("99") != std::string::npos);
        CHECK(what.find("1") != std::string::npos);
    }
}

TEST_CASE("absent slice is nullopt, filtered-out slice is present but empty") {
    std::vector<PaperRecord> records = {
        rec("a", "cvpr", 2024, "One", "x"),
        rec("b", "iclr", 2023, "Two", "   "),  // slice seen, record dropped
    };
    Corpus corpus = testsup::make_corpus(records);
    CHECK_FALSE(corpus.slice("neurips", 2025).has_value());
    CHECK_FALSE(corpus.has_slice("neurips", 2025));
    auto empty_slice = corpus.slice("iclr", 2023);
    REQUIRE(empty_slice.has_value());
    CHECK(empty_slice->empty());
    auto full_slice = corpus.slice("cvpr", 2024);
    REQUIRE(full_slice.has_value());
    REQUIRE(full_slice->size() == 1);
    CHECK((*full_slice)[0]->id == "a");
}

TEST_CASE("neurips 2025 is absent from the study-scale corpus") {
    Corpus corpus = testsup::make_corpus(study_scale_records());
    CHECK_FALSE(corpus.slice("neurips", 2025).has_value());
    REQUIRE(corpus.slice("neurips", 2024).has_value());
    CHECK(corpus.slice("neurips", 2024)->size() == 4494);
    std::vector<int> years = corpus.years();
    CHECK(std::find(years.begin(), years.end(), 2025) != years.end());
    std::vector<std::string> venues = corpus.venues();
    CHECK(std::find(venues.begin(), venues.end(), "neurips") != venues.end());
}

TEST_CASE("the shipped dirty corpus exercises every diagnostic path") {
    ParseResult parsed = parse_records_file(testsup::data_dir() / "dirty_corpus.jsonl", {});
    CHECK(parsed.records.size() == 5);
    REQUIRE(parsed.diagnostics.size() == 2);
    CHECK(parsed.diagnostics[0].line == 2);
    CHECK(parsed.diagnostics[1].line == 6);

    FilterResult filtered = filter_and_dedup(parsed.records);
    CHECK(filtered.stats.total_retained == 3);
    const SliceStats& cvpr = filtered.stats.per_slice.at({"cvpr", 2024});
    CHECK(cvpr.duplicate_dropped == 1);
    CHECK(cvpr.empty_dropped == 1);
    bool has_trend_only = false;
    for (const auto& r : filtered.retained) has_trend_only = has_trend_only || r.trend_only;
    CHECK(has_trend_only);  // the 2022 record
}
