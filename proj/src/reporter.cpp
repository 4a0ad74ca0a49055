#include "trendlex/reporter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "trendlex/csv.hpp"
#include "trendlex/errors.hpp"
#include "trendlex/normalizer.hpp"

namespace trendlex {

namespace {

std::string one_decimal(long long tenths) {
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string coord(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

}  // namespace

std::string format_share(double fraction) {
    if (!(fraction >= -1e-12 && fraction <= 1.0 + 1e-12))
        throw BadArgument("format_share: value " + std::to_string(fraction) +
                          " outside [0,1]");
    long long tenths = std::llround(fraction * 1000.0);
    if (tenths < 0) tenths = 0;
    return one_decimal(tenths) + "%";
}

std::string format_trend_cell(double pp) {
    long long tenths = std::llround(std::fabs(pp) * 10.0);
    std::string sign = pp < 0 ? "-" : "+";
    return sign + one_decimal(tenths) + "%";
}

std::string format_slope(double slope) {
    long long hundredths = std::llround(std::fabs(slope) * 100.0);
    std::string digits = std::to_string(hundredths / 100);
    digits += '.';
    digits += static_cast<char>('0' + (hundredths / 10) % 10);
    digits += static_cast<char>('0' + hundredths % 10);
    if (hundredths == 0) return digits;
    return (slope < 0 ? "-" : "") + digits;
}

namespace {

bool looks_negative_numeric(const std::string& cell) {
    return cell.size() >= 2 && cell[0] == '-' && cell[1] >= '0' && cell[1] <= '9';
}

std::string markdown_cell(const std::string& cell) {
    std::string shown = cell;
    if (looks_negative_numeric(shown)) shown = "−" + shown.substr(1);
    std::string out;
    for (char c : shown) {
        if (c == '|') out += "\\|";
        else out += c;
    }
    return out;
}

void check_model(const TableModel& model) {
    for (const auto& row : model.rows)
        if (row.size() != model.headers.size())
            throw BadArgument("table '" + model.title + "': row arity " +
                              std::to_string(row.size()) + " != header arity " +
                              std::to_string(model.headers.size()));
}

}  // namespace

std::string render_table(const TableModel& model, TableFormat format) {
    check_model(model);
    std::string out;
    if (format == TableFormat::markdown) {
        if (!model.title.empty()) out += "### " + model.title + "\n\n";
        out += "|";
        for (const auto& h : model.headers) out += " " + markdown_cell(h) + " |";
        out += "\n|";
        for (std::size_t i = 0; i < model.headers.size(); ++i) out += " --- |";
        out += "\n";
        for (const auto& row : model.rows) {
            out += "|";
            for (const auto& cell : row) out += " " + markdown_cell(cell) + " |";
            out += "\n";
        }
        for (const auto& note : model.footnotes) out += "\n*" + note + "*\n";
        return out;
    }
    if (!model.title.empty()) out += "# " + model.title + "\n";
    out += csv::join_row(model.headers);
    out += '\n';
    for (const auto& row : model.rows) {
        out += csv::join_row(row);
        out += '\n';
    }
    return out;
}

TableModel parse_table_csv(const std::string& text) {
    TableModel model;
    // The title travels as the first comment line; csv::parse drops comments,
    // so recover it before parsing.
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) model.title = line.substr(2);
        break;
    }
    auto rows = csv::parse(text);
    if (rows.empty()) throw BadArgument("parse_table_csv: no header row");
    model.headers = rows.front();
    model.rows.assign(rows.begin() + 1, rows.end());
    return model;
}

TableModel facet_table_model(const FacetShareTable& table, const std::string& title) {
    TableModel model;
    model.title = title;
    model.headers.push_back("Item");
    for (int year : table.years) model.headers.push_back(std::to_string(year));
    model.headers.push_back("Trend");
    model.headers.push_back("Slope (pp/yr)");
    for (const auto& item : table.items) {
        std::vector<std::string> row;
        row.push_back(item.item);
        for (const auto& cell : item.cells) row.push_back(format_share(cell.share));
        row.push_back(item.trend_pp ? format_trend_cell(*item.trend_pp) : "");
        row.push_back(item.slope_pp_per_year ? format_slope(*item.slope_pp_per_year) : "");
        model.rows.push_back(std::move(row));
    }
    std::string denominators;
    for (std::size_t y = 0; y < table.years.size(); ++y) {
        if (y) denominators += ", ";
        denominators +=
            std::to_string(table.years[y]) + ": " + std::to_string(table.denominators[y]);
    }
    model.footnotes.push_back("Denominators (" + table.within_category + " documents) - " +
                              denominators);
    return model;
}

namespace {

struct Scale {
    double lo = 0.0, hi = 1.0;
    double pixel_lo = 0.0, pixel_hi = 1.0;

    double map(double v) const { return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo); }
};

Scale y_scale(const std::vector<double>& values, double top_px, double bottom_px) {
    double lo = 0.0, hi = 0.0;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
    // SVG y grows downward.
    return Scale{lo, hi, bottom_px, top_px};
}

void append_xticks(std::string& svg, const std::vector<int>& years, const Scale& x,
                   double baseline_y) {
    for (int year : years) {
        double px = x.map(static_cast<double>(year));
        svg += "<line x1=\"" + coord(px) + "\" y1=\"" + coord(baseline_y) + "\" x2=\"" +
               coord(px) + "\" y2=\"" + coord(baseline_y + 4) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<text class=\"xtick\" x=\"" + coord(px) + "\" y=\"" + coord(baseline_y + 14) +
               "\" text-anchor=\"middle\">" + std::to_string(year) + "</text>\n";
    }
}

void append_polyline(std::string& svg, const FigureSeries& series, const Scale& x,
                     const Scale& y, const std::string& color) {
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series.x.size(); ++i) {
        if (i) svg += ' ';
        svg += coord(x.map(static_cast<double>(series.x[i]))) + "," + coord(y.map(series.y[i]));
    }
    svg += "\"/>\n";
}

void validate_figure(const FigureModel& model) {
    if (model.series.empty()) throw BadArgument("render_figure: no series");
    for (const auto& s : model.series) {
        if (model.kind == FigureKind::bar) {
            if (s.y.size() != 1)
                throw BadArgument("bar figure: series '" + s.label +
                                  "' must carry exactly one value");
            continue;
        }
        if (s.x.size() != s.y.size() || s.x.empty())
            throw BadArgument("figure series '" + s.label + "': x/y size mismatch or empty");
        for (std::size_t i = 1; i < s.x.size(); ++i)
            if (s.x[i] <= s.x[i - 1])
                throw BadArgument("figure series '" + s.label + "': years must increase");
    }
}

std::string svg_open(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) +
           "\" font-family=\"sans-serif\" font-size=\"10\">\n";
}

std::string render_small_multiples(const FigureModel& model) {
    int n = static_cast<int>(model.series.size());
    int columns = std::min(model.columns, n);
    if (columns < 1) columns = 1;
    int rows = (n + columns - 1) / columns;
    int header = model.title.empty() ? 0 : 24;
    int width = columns * model.panel_width;
    int height = header + rows * model.panel_height;

    std::string svg = svg_open(width, height);
    if (!model.title.empty())
        svg += "<text class=\"title\" x=\"8\" y=\"16\" font-size=\"12\">" +
               xml_escape(model.title) + "</text>\n";

    const double left = 48, right = 8, top = 22, bottom = 22;
    for (int i = 0; i < n; ++i) {
        const FigureSeries& s = model.series[static_cast<std::size_t>(i)];
        double ox = static_cast<double>((i % columns) * model.panel_width);
        double oy = static_cast<double>(header + (i / columns) * model.panel_height);
        svg += "<g class=\"panel\" transform=\"translate(" + coord(ox) + "," + coord(oy) +
               ")\">\n";
        svg += "<text x=\"8\" y=\"14\">" + xml_escape(s.label) + "</text>\n";

        double plot_right = model.panel_width - right;
        double plot_bottom = model.panel_height - bottom;
        Scale x{static_cast<double>(s.x.front()),
                static_cast<double>(s.x.back() == s.x.front() ? s.x.front() + 1 : s.x.back()),
                left, plot_right};
        Scale y = y_scale(s.y, top, plot_bottom);

        svg += "<line x1=\"" + coord(left) + "\" y1=\"" + coord(plot_bottom) + "\" x2=\"" +
               coord(plot_right) + "\" y2=\"" + coord(plot_bottom) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<line x1=\"" + coord(left) + "\" y1=\"" + coord(top) + "\" x2=\"" + coord(left) +
               "\" y2=\"" + coord(plot_bottom) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + coord(left - 4) + "\" y=\"" + coord(top + 4) +
               "\" text-anchor=\"end\">" + tick_value(y.hi) + "</text>\n";
        svg += "<text x=\"" + coord(left - 4) + "\" y=\"" + coord(plot_bottom) +
               "\" text-anchor=\"end\">" + tick_value(y.lo) + "</text>\n";
        append_xticks(svg, s.x, x, plot_bottom);
        append_polyline(svg, s, x, y, kPalette[0]);
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_multi_line(const FigureModel& model) {
    const double left = 48, right = 130, top = 28, bottom = 28;
    std::string svg = svg_open(model.width, model.height);
    if (!model.title.empty())
        svg += "<text class=\"title\" x=\"8\" y=\"16\" font-size=\"12\">" +
               xml_escape(model.title) + "</text>\n";

    std::vector<int> years;
    std::vector<double> all_values;
    for (const auto& s : model.series) {
        years.insert(years.end(), s.x.begin(), s.x.end());
        all_values.insert(all_values.end(), s.y.begin(), s.y.end());
    }
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());

    double plot_right = model.width - right;
    double plot_bottom = model.height - bottom;
    Scale x{static_cast<double>(years.front()),
            static_cast<double>(years.back() == years.front() ? years.front() + 1 : years.back()),
            left, plot_right};
    Scale y = y_scale(all_values, top, plot_bottom);

    svg += "<line x1=\"" + coord(left) + "\" y1=\"" + coord(plot_bottom) + "\" x2=\"" +
           coord(plot_right) + "\" y2=\"" + coord(plot_bottom) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + coord(left) + "\" y1=\"" + coord(top) + "\" x2=\"" + coord(left) +
           "\" y2=\"" + coord(plot_bottom) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + coord(left - 4) + "\" y=\"" + coord(top + 4) +
           "\" text-anchor=\"end\">" + tick_value(y.hi) + "</text>\n";
    svg += "<text x=\"" + coord(left - 4) + "\" y=\"" + coord(plot_bottom) +
           "\" text-anchor=\"end\">" + tick_value(y.lo) + "</text>\n";
    append_xticks(svg, years, x, plot_bottom);

    for (std::size_t i = 0; i < model.series.size(); ++i) {
        const std::string color = kPalette[i % kPaletteSize];
        append_polyline(svg, model.series[i], x, y, color);
        double ly = top + static_cast<double>(i) * 14.0;
        svg += "<line x1=\"" + coord(plot_right + 8) + "\" y1=\"" + coord(ly - 3) + "\" x2=\"" +
               coord(plot_right + 24) + "\" y2=\"" + coord(ly - 3) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<text class=\"legend\" x=\"" + coord(plot_right + 28) + "\" y=\"" + coord(ly) +
               "\">" + xml_escape(model.series[i].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_bar(const FigureModel& model) {
    const double left = 190, right = 60, top = 28, bar_height = 16, row_height = 24;
    int n = static_cast<int>(model.series.size());
    int height = static_cast<int>(top) + n * static_cast<int>(row_height) + 12;
    std::string svg = svg_open(model.width, height);
    if (!model.title.empty())
        svg += "<text class=\"title\" x=\"8\" y=\"16\" font-size=\"12\">" +
               xml_escape(model.title) + "</text>\n";

    double lo = 0.0, hi = 0.0;
    for (const auto& s : model.series) {
        lo = std::min(lo, s.y[0]);
        hi = std::max(hi, s.y[0]);
    }
    if (hi == lo) hi = lo + 1.0;
    Scale x{lo, hi, left, static_cast<double>(model.width) - right};
    double zero = x.map(0.0);

    svg += "<line x1=\"" + coord(zero) + "\" y1=\"" + coord(top - 6) + "\" x2=\"" + coord(zero) +
           "\" y2=\"" + coord(top + n * row_height) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (int i = 0; i < n; ++i) {
        const FigureSeries& s = model.series[static_cast<std::size_t>(i)];
        double v = s.y[0];
        double vx = x.map(v);
        double bx = std::min(zero, vx);
        double bw = std::fabs(vx - zero);
        double by = top + i * row_height + (row_height - bar_height) / 2.0;
        const std::string color = kPalette[static_cast<std::size_t>(i) % kPaletteSize];
        svg += "<rect class=\"bar\" x=\"" + coord(bx) + "\" y=\"" + coord(by) + "\" width=\"" +
               coord(bw) + "\" height=\"" + coord(bar_height) + "\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + coord(left - 8) + "\" y=\"" + coord(by + bar_height - 4) +
               "\" text-anchor=\"end\">" + xml_escape(s.label) + "</text>\n";
        double tx = v >= 0 ? vx + 4 : vx - 4;
        std::string anchor = v >= 0 ? "start" : "end";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        svg += "<text x=\"" + coord(tx) + "\" y=\"" + coord(by + bar_height - 4) +
               "\" text-anchor=\"" + anchor + "\">" + buf + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace

std::string render_figure(const FigureModel& model) {
    validate_figure(model);
    switch (model.kind) {
        case FigureKind::small_multiples: return render_small_multiples(model);
        case FigureKind::multi_line: return render_multi_line(model);
        case FigureKind::bar: return render_bar(model);
    }
    throw BadArgument("render_figure: unknown kind");
}

std::vector<ReferenceRow> parse_reference_rows(const std::string& text) {
    auto rows = csv::parse(text);
    if (rows.empty()) throw ConfigError("reference table: empty file");
    const auto& header = rows.front();
    if (header.size() < 4 || header[0] != "facet" || header[1] != "item")
        throw ConfigError("reference table: header must start with facet,item");
    std::vector<int> years;
    std::size_t share_begin = 2;
    std::size_t share_end = share_begin;
    while (share_end < header.size() && header[share_end].rfind("share_", 0) == 0) {
        years.push_back(std::stoi(header[share_end].substr(6)));
        ++share_end;
    }
    if (years.empty()) throw ConfigError("reference table: no share_<year> columns");
    if (share_end + 2 != header.size() || header[share_end] != "printed_trend" ||
        header[share_end + 1] != "printed_slope")
        throw ConfigError("reference table: expected printed_trend,printed_slope after shares");

    std::vector<ReferenceRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& fields = rows[r];
        if (fields.size() != header.size())
            throw ConfigError("reference table row " + std::to_string(r + 1) +
                              ": wrong field count");
        ReferenceRow row;
        row.facet = fields[0];
        row.item = fields[1];
        row.years = years;
        try {
            for (std::size_t i = share_begin; i < share_end; ++i)
                row.shares_percent.push_back(std::stod(fields[i]));
            row.printed_trend_pp = std::stod(fields[share_end]);
            row.printed_slope = std::stod(fields[share_end + 1]);
        } catch (const std::exception&) {
            throw ConfigError("reference table row " + std::to_string(r + 1) +
                              ": non-numeric cell");
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<ReferenceRow> load_reference_rows(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound(path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_reference_rows(buf.str());
}

std::vector<TrendSummary> reference_summaries(const std::vector<ReferenceRow>& rows) {
    std::vector<TrendSummary> out;
    for (const auto& row : rows) {
        YearlySeries series;
        series.label = row.label();
        series.unit = SeriesUnit::fraction;
        for (std::size_t i = 0; i < row.years.size(); ++i)
            series.points.push_back({row.years[i], row.shares_percent[i] / 100.0});
        out.push_back(summarize(series));
    }
    return out;
}

std::string discrepancy_report(const std::vector<TrendSummary>& computed,
                               const std::vector<ReferenceRow>& printed) {
    constexpr double kTolerance = 0.15;
    std::map<std::string, const TrendSummary*> by_label;
    for (const auto& s : computed) by_label[s.label] = &s;

    char buf[128];
    std::size_t trend_checked = 0, trend_ok = 0;
    std::string trend_lines, slope_lines;
    std::size_t slope_checked = 0, slope_ok = 0;
    std::string missing_lines;
    for (const auto& row : printed) {
        auto it = by_label.find(row.label());
        if (it == by_label.end()) {
            missing_lines += "- " + row.label() + ": no computed summary supplied\n";
            continue;
        }
        const TrendSummary& s = *it->second;
        ++trend_checked;
        if (std::fabs(s.trend_pp - row.printed_trend_pp) <= kTolerance) {
            ++trend_ok;
        } else {
            std::snprintf(buf, sizeof(buf), "- %s: computed %+0.2f pp, printed %+0.2f pp\n",
                          row.label().c_str(), s.trend_pp, row.printed_trend_pp);
            trend_lines += buf;
        }
        ++slope_checked;
        if (std::fabs(s.slope_pp_per_year - row.printed_slope) <= kTolerance) {
            ++slope_ok;
        } else {
            std::snprintf(buf, sizeof(buf),
                          "- %s: computed %+0.2f pp/yr, printed %+0.2f pp/yr\n",
                          row.label().c_str(), s.slope_pp_per_year, row.printed_slope);
            slope_lines += buf;
        }
    }

    if (trend_lines.empty() && slope_lines.empty() && missing_lines.empty()) return "";

    std::string out = "# Printed-table audit\n\n";
    out += std::to_string(printed.size()) + " reference rows; tolerance 0.15.\n\n";
    out += "## Trend column vs last-minus-first of the printed shares\n\n";
    out += std::to_string(trend_ok) + "/" + std::to_string(trend_checked) + " cells agree.\n";
    if (trend_lines.empty()) {
        out += "No mismatches.\n";
    } else {
        out += "Mismatch list (likely transcription slips in the printed table):\n" + trend_lines;
    }
    out += "\n## Slope column vs least-squares slope on the printed shares\n\n";
    out += std::to_string(slope_ok) + "/" + std::to_string(slope_checked) + " cells agree.\n";
    if (slope_lines.empty()) {
        out += "No mismatches.\n";
    } else {
        out += "Mismatch list:\n" + slope_lines;
        out +=
            "\nNote: the printed Slope column is broadly inconsistent with an ordinary "
            "least-squares fit of the printed share series against the year (for example, a "
            "share series 13.0 -> 16.4 -> 14.3 has OLS slope 0.65 pp/yr, not the printed 3.43). "
            "The printed slopes were most likely computed on a different underlying series, "
            "such as the aggregated TF-IDF mass. This report flags the cells rather than "
            "reverse-engineering the printed values.\n";
    }
    if (!missing_lines.empty()) out += "\n## Rows without computed summaries\n\n" + missing_lines;
    return out;
}

std::string kebab_case(const std::string& title) {
    std::string folded = fold_text(title);
    std::string out;
    bool pending_dash = false;
    for (char c : folded) {
        bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
        if (alnum) {
            if (pending_dash && !out.empty()) out += '-';
            pending_dash = false;
            out += c;
        } else {
            pending_dash = true;
        }
    }
    return out;
}

}  // namespace trendlex
