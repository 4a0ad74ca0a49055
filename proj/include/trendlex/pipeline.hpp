#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trendlex/harvester.hpp"

namespace trendlex {

struct YearRange {
    int first = 0;
    int last = 0;

    std::vector<int> years() const;
};

// Everything a run needs; file-configurable, flag-overridable.
struct RunConfig {
    std::vector<std::filesystem::path> corpus_paths;
    std::filesystem::path lexicon_path;
    std::filesystem::path reference_path;
    std::filesystem::path out_dir = "out";
    YearRange trend_years{2022, 2025};    // trajectory statistics
    YearRange content_years{2023, 2025};  // facet/content statistics
    std::optional<YearRange> year_override;
    std::vector<std::string> venues;  // empty = all venues
    int workers = 1;
    std::size_t top_k = 10;

    // harvest subcommand
    std::string harvest_venue;
    int harvest_year = 0;
    EndpointConfig endpoint;
    double harvest_rps = 1.0;
    std::filesystem::path harvest_checkpoint;
    std::filesystem::path harvest_out;
    std::filesystem::path harvest_fixture_dir;  // serve fixtures instead of HTTP

    YearRange active_trend_years() const { return year_override.value_or(trend_years); }
    YearRange active_content_years() const { return year_override.value_or(content_years); }
};

// JSON with "//" comments; relative paths resolve against the file's
// directory.
RunConfig load_run_config(const std::filesystem::path& path);

// token is "trend", "content", or "A..B"; sets the year override.
void apply_year_token(RunConfig& config, const std::string& token);

// Executes one subcommand (ingest|harvest|label|mine|stats|report|audit|all),
// writing artifacts under out_dir. Returns the process exit code: 0 success,
// 2 missing/invalid inputs (NotFound, ConfigError, VersionMismatch), 3
// undefined statistics (EmptySubset, MissingYear), 1 other failures.
int run(const std::string& command, const RunConfig& config);

}  // namespace trendlex
