#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace trendlex {

// One accepted paper. `trend_only` marks records that participate in
// trajectory statistics but are excluded from content analysis.
struct PaperRecord {
    std::string id;
    std::string venue;
    int year = 0;
    std::string title;
    std::string abstract;
    bool trend_only = false;

    bool operator==(const PaperRecord&) const = default;
};

struct Diagnostic {
    std::size_t line = 0;  // 1-based input line, 0 when not line-scoped
    std::string message;
};

struct ParseOptions {
    // Records with year < content_start_year are flagged trend_only unless the
    // input carries an explicit trend_only field.
    int content_start_year = 2023;
    int min_year = 1900;
    int max_year = 2100;
};

struct ParseResult {
    std::vector<PaperRecord> records;
    std::vector<Diagnostic> diagnostics;
};

// Input is line-delimited JSON with fields venue, year (integer or numeric
// string), title, abstract, optional id and trend_only. A malformed line
// yields a diagnostic and does not abort the stream.
ParseResult parse_records(std::istream& input, const ParseOptions& options = {});
ParseResult parse_records_file(const std::filesystem::path& path,
                               const ParseOptions& options = {});

using VenueYear = std::pair<std::string, int>;

struct SliceStats {
    std::size_t raw_count = 0;
    std::size_t empty_dropped = 0;
    std::size_t duplicate_dropped = 0;
    std::size_t retained = 0;
};

struct CorpusStats {
    std::map<VenueYear, SliceStats> per_slice;
    std::size_t total_retained = 0;
};

struct FilterResult {
    std::vector<PaperRecord> retained;
    CorpusStats stats;
};

// Drops records whose abstract is blank after Unicode-whitespace trim, then
// deduplicates on (venue, year, casefolded whitespace-collapsed title) with
// the first occurrence winning. Records repeating an already-retained id are
// counted as duplicates as well.
FilterResult filter_and_dedup(const std::vector<PaperRecord>& records);

// Read-only view over a filtered corpus; the single source of truth for
// slices by venue and year.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::vector<PaperRecord> records, CorpusStats stats);

    const std::vector<PaperRecord>& records() const { return records_; }
    const CorpusStats& stats() const { return stats_; }

    // nullopt when the (venue, year) pair never occurred in the harvest --
    // distinct from a pair whose records were all filtered out.
    std::optional<std::vector<const PaperRecord*>> slice(const std::string& venue,
                                                         int year) const;

    bool has_slice(const std::string& venue, int year) const;
    std::vector<std::string> venues() const;
    std::vector<int> years() const;

private:
    std::vector<PaperRecord> records_;
    CorpusStats stats_;
    std::map<VenueYear, std::vector<std::size_t>> slices_;
};

inline constexpr const char* kCorpusFormatVersion = "1";

// Store layout: <dir>/records.jsonl plus <dir>/corpus_meta.json carrying the
// format version and filter stats. load(persist(x)) is record-for-record
// identical to x.
void persist_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace trendlex
