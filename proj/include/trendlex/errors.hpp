#pragma once

#include <stdexcept>
#include <string>

namespace trendlex {

// Base for every typed error the toolkit raises. Callers that only want a
// message can catch this; the CLI maps the concrete types to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadArgument : Error {
    using Error::Error;
};

// Fewer series points than the statistic needs.
struct InsufficientData : Error {
    using Error::Error;
};

// A requested year has no documents under the active filter.
struct MissingYear : Error {
    int year;
    std::string filter;
    MissingYear(int year, const std::string& filter)
        : Error("no documents for year " + std::to_string(year) +
                (filter.empty() ? "" : " under filter '" + filter + "'")),
          year(year),
          filter(filter) {}
};

// A facet denominator subset is empty for a year; shares are undefined there.
struct EmptySubset : Error {
    int year;
    std::string category;
    EmptySubset(int year, const std::string& category)
        : Error("category '" + category + "' has no documents in year " +
                std::to_string(year) + "; facet shares are undefined"),
          year(year),
          category(category) {}
};

struct NotFound : Error {
    std::string path;
    explicit NotFound(const std::string& path)
        : Error("not found: " + path), path(path) {}
};

// Persisted corpus was written by an incompatible format version.
struct VersionMismatch : Error {
    std::string found;
    std::string expected;
    VersionMismatch(const std::string& found, const std::string& expected)
        : Error("corpus format version '" + found + "' does not match supported version '" +
                expected + "'"),
          found(found),
          expected(expected) {}
};

// Lexicon or run configuration failed to parse or validate.
struct ConfigError : Error {
    using Error::Error;
};

// Transport failure that survived the retry budget.
struct NetworkError : Error {
    std::string url;
    NetworkError(const std::string& url, const std::string& detail)
        : Error("network error fetching " + url + ": " + detail), url(url) {}
};

}  // namespace trendlex
