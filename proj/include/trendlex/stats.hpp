#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendlex/lexicon.hpp"
#include "trendlex/record_store.hpp"

namespace trendlex {

enum class SeriesUnit { fraction, pp, mass };

std::string to_string(SeriesUnit unit);

struct YearPoint {
    int year = 0;
    double value = 0.0;

    bool operator==(const YearPoint&) const = default;
};

struct YearlySeries {
    std::string label;
    std::vector<YearPoint> points;
    SeriesUnit unit = SeriesUnit::fraction;

    // Enforces strictly increasing years and fraction bounds.
    void validate() const;
};

struct TrendSummary {
    std::string label;
    YearlySeries series;
    double trend_pp = 0.0;
    double slope_pp_per_year = 0.0;
};

// value(year) = matched(year) / total(year) over retained records, optionally
// restricted to one venue. trend_only records count in both sides: prevalence
// covers every abstract of the year.
YearlySeries prevalence_series(const std::string& category,
                               const LabelMatrix& labels,
                               const Corpus& corpus,
                               const std::vector<int>& years,
                               const std::optional<std::string>& venue = {});

// 100 * (last value - first value) of a fraction series.
double trend_pp(const YearlySeries& series);

// Ordinary least-squares slope against calendar year. Fraction series are
// scaled to percentage points first (pp/yr); pp and mass series use raw
// values. For three equally spaced years this is exactly (y3 - y1) / 2.
double ls_slope(const YearlySeries& series);

TrendSummary summarize(const YearlySeries& series);

// Yearly aggregated TF-IDF mass for every category at once, normalized per
// year so category values sum to 1. With N retained docs and df(t) docs
// containing term t, idf(t) = ln(1 + N/df(t)) and
// raw(c, y) = sum over year-y docs of count(t in doc) * idf(t) over the
// document's category-matched terms.
struct TfidfMassTable {
    std::vector<std::string> categories;
    std::vector<int> years;
    std::vector<std::vector<double>> raw;         // [category][year index]
    std::vector<std::vector<double>> normalized;  // same shape, columns sum to 1
};

TfidfMassTable tfidf_mass_table(const LabelMatrix& labels,
                                const std::vector<NormalizedDoc>& docs,
                                const std::vector<int>& years);

// One category's normalized trajectory (unit = mass).
YearlySeries tfidf_mass_series(const std::string& category,
                               const LabelMatrix& labels,
                               const std::vector<NormalizedDoc>& docs,
                               const std::vector<int>& years);

// Descending slope, ties broken by label ascending; first k entries.
std::vector<TrendSummary> top_rising(const std::vector<TrendSummary>& summaries,
                                     std::size_t k);

struct VenueCell {
    std::size_t matched = 0;
    std::size_t total = 0;
    double fraction = 0.0;
};

// One cell per (venue, year) present in the corpus; pairs the corpus never
// saw are absent from `cells` (ABSENT, not zero).
struct CrossVenueMatrix {
    std::string category;
    std::vector<std::string> venues;
    std::vector<int> years;
    std::map<VenueYear, VenueCell> cells;

    std::string to_csv() const;  // columns venue, year, matched, total, fraction; ABSENT rows marked
};

CrossVenueMatrix cross_venue_matrix(const std::string& category,
                                    const LabelMatrix& labels,
                                    const Corpus& corpus);

// CSV form shared by series artifacts: label, year, value, unit.
std::string series_to_csv(const std::vector<YearlySeries>& series);

}  // namespace trendlex
