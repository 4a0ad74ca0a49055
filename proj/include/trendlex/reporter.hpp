#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trendlex/facets.hpp"
#include "trendlex/stats.hpp"

namespace trendlex {

struct TableModel {
    std::string title;
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;  // each row matches header arity
    std::vector<std::string> footnotes;
};

enum class TableFormat { markdown, csv };

// One-decimal percent, round half away from zero: 0.395 -> "39.5%".
std::string format_share(double fraction);

// Percentage points with an explicit sign, one decimal: "+1.3%", "-0.8%".
// The sign reflects the unrounded value, so -0.04 renders "-0.0%".
std::string format_trend_cell(double pp);

// Two decimals, no plus sign: "1.30", "-1.50"; zero is unsigned "0.00".
std::string format_slope(double slope);

// Markdown renders a pipe table (leading minus displayed as U+2212); CSV is
// RFC-quoted with the title carried as a leading "# " comment line.
std::string render_table(const TableModel& model, TableFormat format);

// Inverse of render_table(csv); footnotes do not round-trip.
TableModel parse_table_csv(const std::string& text);

TableModel facet_table_model(const FacetShareTable& table, const std::string& title);

enum class FigureKind { small_multiples, multi_line, bar };

struct FigureSeries {
    std::string label;
    std::vector<int> x;       // integer years; bar series leave this empty
    std::vector<double> y;    // bar series carry exactly one value
};

struct FigureModel {
    FigureKind kind = FigureKind::multi_line;
    std::string title;
    std::vector<FigureSeries> series;
    int panel_width = 640;   // small_multiples panel size
    int panel_height = 160;
    int columns = 4;
    int width = 640;         // multi_line / bar canvas
    int height = 320;
};

// Hand-emitted deterministic SVG. small_multiples: one <g class="panel"> per
// series with an independent y-scale; all kinds label x ticks with integer
// years (class="xtick"); bar renders rows in input order.
std::string render_figure(const FigureModel& model);

// One transcribed row of a published facet table: yearly shares in percent
// plus the Trend/Slope cells as printed.
struct ReferenceRow {
    std::string facet;
    std::string item;
    std::vector<int> years;
    std::vector<double> shares_percent;
    double printed_trend_pp = 0.0;
    double printed_slope = 0.0;

    std::string label() const { return facet + "/" + item; }
};

// CSV with header facet,item,share_<year>...,printed_trend,printed_slope.
std::vector<ReferenceRow> parse_reference_rows(const std::string& text);
std::vector<ReferenceRow> load_reference_rows(const std::filesystem::path& path);

// Fraction series recomputed from the transcribed shares, with trend/slope.
std::vector<TrendSummary> reference_summaries(const std::vector<ReferenceRow>& rows);

// Lists every Trend/Slope cell where |computed - printed| > 0.15, with both
// values, and records the systematic slope-column disagreement.
std::string discrepancy_report(const std::vector<TrendSummary>& computed,
                               const std::vector<ReferenceRow>& printed);

// Lowercased ASCII with non-alphanumerics collapsed to single dashes; used to
// derive artifact file names from titles.
std::string kebab_case(const std::string& title);

}  // namespace trendlex
