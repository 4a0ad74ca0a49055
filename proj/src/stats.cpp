#include "trendlex/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "trendlex/csv.hpp"
#include "trendlex/errors.hpp"

namespace trendlex {

namespace {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

int require_category(const LabelMatrix& labels, const std::string& category) {
    int col = labels.category_index(category);
    if (col < 0) throw BadArgument("unknown category '" + category + "'");
    return col;
}

}  // namespace

std::string to_string(SeriesUnit unit) {
    switch (unit) {
        case SeriesUnit::fraction: return "fraction";
        case SeriesUnit::pp: return "pp";
        case SeriesUnit::mass: return "mass";
    }
    return "?";
}

void YearlySeries::validate() const {
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].year <= points[i - 1].year)
            throw BadArgument("series '" + label + "': years must be strictly increasing");
    if (unit == SeriesUnit::fraction)
        for (const auto& p : points)
            if (p.value < 0.0 || p.value > 1.0)
                throw BadArgument("series '" + label + "': fraction value out of [0,1] at year " +
                                  std::to_string(p.year));
}

YearlySeries prevalence_series(const std::string& category,
                               const LabelMatrix& labels,
                               const Corpus& corpus,
                               const std::vector<int>& years,
                               const std::optional<std::string>& venue) {
    int col = require_category(labels, category);
    if (years.empty()) throw BadArgument("prevalence_series: no years requested");

    std::map<int, std::size_t> total, matched;
    for (const auto& row : labels.rows) {
        if (venue && row.venue != *venue) continue;
        ++total[row.year];
        if (row.cells[static_cast<std::size_t>(col)]) ++matched[row.year];
    }
    (void)corpus;

    YearlySeries series;
    series.label = category;
    series.unit = SeriesUnit::fraction;
    std::string filter = venue ? *venue : std::string();
    for (int year : years) {
        auto it = total.find(year);
        if (it == total.end() || it->second == 0) throw MissingYear(year, filter);
        double value = static_cast<double>(matched[year]) / static_cast<double>(it->second);
        series.points.push_back({year, value});
    }
    series.validate();
    return series;
}

double trend_pp(const YearlySeries& series) {
    if (series.unit != SeriesUnit::fraction)
        throw BadArgument("trend_pp expects a fraction series");
    if (series.points.size() < 2)
        throw InsufficientData("trend_pp needs at least 2 points, got " +
                               std::to_string(series.points.size()));
    return 100.0 * (series.points.back().value - series.points.front().value);
}

double ls_slope(const YearlySeries& series) {
    if (series.points.size() < 2)
        throw InsufficientData("ls_slope needs at least 2 points, got " +
                               std::to_string(series.points.size()));
    series.validate();
    double scale = series.unit == SeriesUnit::fraction ? 100.0 : 1.0;
    double n = static_cast<double>(series.points.size());
    double x_mean = 0.0, y_mean = 0.0;
    for (const auto& p : series.points) {
        x_mean += p.year;
        y_mean += p.value * scale;
    }
    x_mean /= n;
    y_mean /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : series.points) {
        double dx = p.year - x_mean;
        sxy += dx * (p.value * scale - y_mean);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

TrendSummary summarize(const YearlySeries& series) {
    TrendSummary summary;
    summary.label = series.label;
    summary.series = series;
    summary.trend_pp = trend_pp(series);
    summary.slope_pp_per_year = ls_slope(series);
    return summary;
}

TfidfMassTable tfidf_mass_table(const LabelMatrix& labels,
                                const std::vector<NormalizedDoc>& docs,
                                const std::vector<int>& years) {
    if (years.empty()) throw BadArgument("tfidf_mass_table: no years requested");

    // Corpus-wide document frequencies over every retained document.
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& doc : docs)
        for (const auto& [term, count] : doc.term_counts) {
            (void)count;
            ++df[term];
        }
    double n_docs = static_cast<double>(docs.size());

    std::map<int, std::size_t> year_index;
    for (std::size_t i = 0; i < years.size(); ++i) year_index[years[i]] = i;

    TfidfMassTable table;
    table.categories = labels.categories;
    table.years = years;
    table.raw.assign(labels.categories.size(), std::vector<double>(years.size(), 0.0));

    // Rows are in canonical id order and matched terms are term-sorted, so
    // this accumulation order is reproducible bit-for-bit.
    for (const auto& row : labels.rows) {
        auto yit = year_index.find(row.year);
        if (yit == year_index.end()) continue;
        std::size_t y = yit->second;
        for (std::size_t c = 0; c < row.matched_terms.size(); ++c) {
            double sum = 0.0;
            for (const auto& mt : row.matched_terms[c]) {
                double idf = std::log(1.0 + n_docs / static_cast<double>(df.at(mt.term)));
                sum += static_cast<double>(mt.count) * idf;
            }
            table.raw[c][y] += sum;
        }
    }

    table.normalized.assign(labels.categories.size(), std::vector<double>(years.size(), 0.0));
    for (std::size_t y = 0; y < years.size(); ++y) {
        double total = 0.0;
        for (std::size_t c = 0; c < table.raw.size(); ++c) total += table.raw[c][y];
        if (total == 0.0) throw MissingYear(years[y], "tfidf mass");
        for (std::size_t c = 0; c < table.raw.size(); ++c)
            table.normalized[c][y] = table.raw[c][y] / total;
    }
    return table;
}

YearlySeries tfidf_mass_series(const std::string& category,
                               const LabelMatrix& labels,
                               const std::vector<NormalizedDoc>& docs,
                               const std::vector<int>& years) {
    int col = require_category(labels, category);
    TfidfMassTable table = tfidf_mass_table(labels, docs, years);
    YearlySeries series;
    series.label = category;
    series.unit = SeriesUnit::mass;
    for (std::size_t y = 0; y < years.size(); ++y)
        series.points.push_back({years[y], table.normalized[static_cast<std::size_t>(col)][y]});
    series.validate();
    return series;
}

std::vector<TrendSummary> top_rising(const std::vector<TrendSummary>& summaries,
                                     std::size_t k) {
    if (summaries.empty()) throw BadArgument("top_rising: empty summary list");
    if (k > summaries.size())
        throw BadArgument("top_rising: k=" + std::to_string(k) + " exceeds list size " +
                          std::to_string(summaries.size()));
    std::vector<TrendSummary> sorted = summaries;
    std::sort(sorted.begin(), sorted.end(), [](const TrendSummary& a, const TrendSummary& b) {
        if (a.slope_pp_per_year != b.slope_pp_per_year)
            return a.slope_pp_per_year > b.slope_pp_per_year;
        return a.label < b.label;
    });
    sorted.resize(k);
    return sorted;
}

std::string CrossVenueMatrix::to_csv() const {
    std::string out = "# cross-venue prevalence: " + category + "\n";
    out += csv::join_row({"venue", "year", "matched", "total", "fraction"});
    out += '\n';
    for (const auto& venue : venues) {
        for (int year : years) {
            auto it = cells.find({venue, year});
            std::vector<std::string> fields{venue, std::to_string(year)};
            if (it == cells.end()) {
                fields.insert(fields.end(), {"", "", "ABSENT"});
            } else {
                fields.push_back(std::to_string(it->second.matched));
                fields.push_back(std::to_string(it->second.total));
                fields.push_back(format_value(it->second.fraction));
            }
            out += csv::join_row(fields);
            out += '\n';
        }
    }
    return out;
}

CrossVenueMatrix cross_venue_matrix(const std::string& category,
                                    const LabelMatrix& labels,
                                    const Corpus& corpus) {
    int col = require_category(labels, category);

    CrossVenueMatrix matrix;
    matrix.category = category;
    matrix.venues = corpus.venues();
    matrix.years = corpus.years();

    std::map<VenueYear, VenueCell> counts;
    for (const auto& row : labels.rows) {
        VenueCell& cell = counts[{row.venue, row.year}];
        ++cell.total;
        if (row.cells[static_cast<std::size_t>(col)]) ++cell.matched;
    }
    for (auto& [key, cell] : counts) {
        cell.fraction = static_cast<double>(cell.matched) / static_cast<double>(cell.total);
        matrix.cells.emplace(key, cell);
    }
    return matrix;
}

std::string series_to_csv(const std::vector<YearlySeries>& all) {
    std::string out = csv::join_row({"label", "year", "value", "unit"});
    out += '\n';
    for (const auto& series : all) {
        std::string unit = to_string(series.unit);
        for (const auto& p : series.points) {
            out += csv::join_row(
                {series.label, std::to_string(p.year), format_value(p.value), unit});
            out += '\n';
        }
    }
    return out;
}

}  // namespace trendlex
