#include "trendlex/record_store.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trendlex/errors.hpp"
#include "trendlex/normalizer.hpp"

namespace trendlex {
namespace {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Stable default id: independent of input order, unique once duplicates on
// (venue, year, title) are removed.
std::string derive_id(const std::string& venue, int year, const std::string& title) {
    return venue + ":" + std::to_string(year) + ":" + hex64(fnv1a64(casefold_collapse(title)));
}

std::optional<int> extract_year(const json& value) {
    if (value.is_number_integer()) return value.get<int>();
    if (value.is_string()) {
        const std::string& s = value.get_ref<const std::string&>();
        if (s.empty()) return std::nullopt;
        int y = 0;
        for (char c : s) {
            if (c < '0' || c > '9') return std::nullopt;
            y = y * 10 + (c - '0');
            if (y > 1000000) return std::nullopt;
        }
        return y;
    }
    return std::nullopt;
}

}  // namespace

ParseResult parse_records(std::istream& input, const ParseOptions& options) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (is_unicode_blank(line)) continue;

        json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded() || !obj.is_object()) {
            result.diagnostics.push_back({line_no, "line is not a JSON object"});
            continue;
        }

        PaperRecord rec;
        auto venue_it = obj.find("venue");
        if (venue_it == obj.end() || !venue_it->is_string()) {
            result.diagnostics.push_back({line_no, "missing or non-string 'venue'"});
            continue;
        }
        rec.venue = casefold_collapse(venue_it->get<std::string>());
        if (rec.venue.empty()) {
            result.diagnostics.push_back({line_no, "empty 'venue'"});
            continue;
        }

        auto year_it = obj.find("year");
        std::optional<int> year = year_it == obj.end() ? std::nullopt : extract_year(*year_it);
        if (!year) {
            result.diagnostics.push_back({line_no, "missing or unparsable 'year'"});
            continue;
        }
        if (*year < options.min_year || *year > options.max_year) {
            result.diagnostics.push_back(
                {line_no, "year " + std::to_string(*year) + " out of range"});
            continue;
        }
        rec.year = *year;

        auto title_it = obj.find("title");
        if (title_it == obj.end() || !title_it->is_string()) {
            result.diagnostics.push_back({line_no, "missing or non-string 'title'"});
            continue;
        }
        rec.title = title_it->get<std::string>();

        if (auto it = obj.find("abstract"); it != obj.end() && it->is_string()) {
            rec.abstract = it->get<std::string>();
        }
        if (auto it = obj.find("id"); it != obj.end() && it->is_string() &&
                                      !it->get_ref<const std::string&>().empty()) {
            rec.id = it->get<std::string>();
        } else {
            rec.id = derive_id(rec.venue, rec.year, rec.title);
        }
        if (auto it = obj.find("trend_only"); it != obj.end() && it->is_boolean()) {
            rec.trend_only = it->get<bool>();
        } else {
            rec.trend_only = rec.year < options.content_start_year;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

ParseResult parse_records_file(const std::filesystem::path& path,
                               const ParseOptions& options) {
    std::ifstream in(path);
    if (!in) throw NotFound(path.string());
    return parse_records(in, options);
}

FilterResult filter_and_dedup(const std::vector<PaperRecord>& records) {
    FilterResult result;
    std::set<std::tuple<std::string, int, std::string>> seen_titles;
    std::set<std::string> seen_ids;
    for (const auto& rec : records) {
        SliceStats& slice = result.stats.per_slice[{rec.venue, rec.year}];
        ++slice.raw_count;
        if (is_unicode_blank(rec.abstract)) {
            ++slice.empty_dropped;
            continue;
        }
        auto key = std::make_tuple(rec.venue, rec.year, casefold_collapse(rec.title));
        if (!seen_titles.insert(key).second || !seen_ids.insert(rec.id).second) {
            ++slice.duplicate_dropped;
            continue;
        }
        ++slice.retained;
        ++result.stats.total_retained;
        result.retained.push_back(rec);
    }
    // Canonical output order: sorted by id. Which duplicate survives is still
    // decided by first occurrence in input order (above); sorting afterwards
    // makes every downstream artifact independent of the ingest file order.
    std::sort(result.retained.begin(), result.retained.end(),
              [](const PaperRecord& a, const PaperRecord& b) { return a.id < b.id; });
    return result;
}

Corpus::Corpus(std::vector<PaperRecord> records, CorpusStats stats)
    : records_(std::move(records)), stats_(std::move(stats)) {
    for (const auto& [key, _] : stats_.per_slice) slices_[key];  // raw>0, maybe 0 retained
    for (std::size_t i = 0; i < records_.size(); ++i) {
        slices_[{records_[i].venue, records_[i].year}].push_back(i);
    }
}

std::optional<std::vector<const PaperRecord*>> Corpus::slice(const std::string& venue,
                                                             int year) const {
    auto it = slices_.find({venue, year});
    if (it == slices_.end()) return std::nullopt;
    std::vector<const PaperRecord*> out;
    out.reserve(it->second.size());
    for (std::size_t idx : it->second) out.push_back(&records_[idx]);
    return out;
}

bool Corpus::has_slice(const std::string& venue, int year) const {
    return slices_.count({venue, year}) > 0;
}

std::vector<std::string> Corpus::venues() const {
    std::vector<std::string> out;
    for (const auto& [key, _] : slices_) {
        if (out.empty() || out.back() != key.first) out.push_back(key.first);
    }
    return out;
}

std::vector<int> Corpus::years() const {
    std::set<int> years;
    for (const auto& [key, _] : slices_) years.insert(key.second);
    return {years.begin(), years.end()};
}

namespace {

json stats_to_json(const CorpusStats& stats) {
    json slices = json::array();
    for (const auto& [key, s] : stats.per_slice) {
        slices.push_back({{"venue", key.first},
                          {"year", key.second},
                          {"raw_count", s.raw_count},
                          {"empty_dropped", s.empty_dropped},
                          {"duplicate_dropped", s.duplicate_dropped},
                          {"retained", s.retained}});
    }
    return {{"slices", slices}, {"total_retained", stats.total_retained}};
}

CorpusStats stats_from_json(const json& j) {
    CorpusStats stats;
    for (const auto& s : j.at("slices")) {
        SliceStats slice;
        slice.raw_count = s.at("raw_count").get<std::size_t>();
        slice.empty_dropped = s.at("empty_dropped").get<std::size_t>();
        slice.duplicate_dropped = s.at("duplicate_dropped").get<std::size_t>();
        slice.retained = s.at("retained").get<std::size_t>();
        stats.per_slice[{s.at("venue").get<std::string>(), s.at("year").get<int>()}] = slice;
    }
    stats.total_retained = j.at("total_retained").get<std::size_t>();
    return stats;
}

}  // namespace

void persist_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "records.jsonl", std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / "records.jsonl").string());
        for (const auto& rec : corpus.records()) {
            json obj = {{"id", rec.id},
                        {"venue", rec.venue},
                        {"year", rec.year},
                        {"title", rec.title},
                        {"abstract", rec.abstract},
                        {"trend_only", rec.trend_only}};
            out << obj.dump() << '\n';
        }
    }
    {
        json meta = {{"format_version", kCorpusFormatVersion},
                     {"stats", stats_to_json(corpus.stats())}};
        std::ofstream out(dir / "corpus_meta.json", std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / "corpus_meta.json").string());
        out << meta.dump(2) << '\n';
    }
}

Corpus load_corpus(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "corpus_meta.json");
    if (!meta_in) throw NotFound((dir / "corpus_meta.json").string());
    json meta = json::parse(meta_in, nullptr, /*allow_exceptions=*/false);
    if (meta.is_discarded() || !meta.is_object()) {
        throw Error("corrupt corpus meta at " + (dir / "corpus_meta.json").string());
    }
    std::string version = meta.value("format_version", "");
    if (version != kCorpusFormatVersion) {
        throw VersionMismatch(version, kCorpusFormatVersion);
    }

    std::ifstream rec_in(dir / "records.jsonl");
    if (!rec_in) throw NotFound((dir / "records.jsonl").string());
    std::vector<PaperRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(rec_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded()) {
            throw Error("corrupt corpus record at line " + std::to_string(line_no));
        }
        PaperRecord rec;
        rec.id = obj.at("id").get<std::string>();
        rec.venue = obj.at("venue").get<std::string>();
        rec.year = obj.at("year").get<int>();
        rec.title = obj.at("title").get<std::string>();
        rec.abstract = obj.at("abstract").get<std::string>();
        rec.trend_only = obj.at("trend_only").get<bool>();
        records.push_back(std::move(rec));
    }
    return Corpus(std::move(records), stats_from_json(meta.at("stats")));
}

}  // namespace trendlex
