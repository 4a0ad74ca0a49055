#include "trendlex/facets.hpp"

#include <cstdio>
#include <map>

#include "trendlex/csv.hpp"
#include "trendlex/errors.hpp"
#include "trendlex/parallel.hpp"
#include "trendlex/stats.hpp"

namespace trendlex {

const std::vector<FacetSpec>& facet_registry(const Lexicon& lex) {
    return lex.facets;
}

std::string FacetShareTable::to_csv() const {
    std::string out = "# facet: " + facet + " (within " + within_category + ")\n";
    out += csv::join_row({"item", "year", "numerator", "denominator", "share"});
    out += '\n';
    char buf[64];
    for (const auto& row : items) {
        for (const auto& cell : row.cells) {
            std::snprintf(buf, sizeof(buf), "%.6f", cell.share);
            out += csv::join_row({row.item, std::to_string(cell.year),
                                  std::to_string(cell.numerator),
                                  std::to_string(cell.denominator), buf});
            out += '\n';
        }
    }
    return out;
}

FacetShareTable mine_facet(const FacetSpec& facet,
                           const LabelMatrix& labels,
                           const Corpus& corpus,
                           const std::vector<NormalizedDoc>& docs,
                           const std::vector<int>& years,
                           const CompiledLexicon& lex,
                           int workers,
                           const std::optional<std::string>& venue) {
    if (years.empty()) throw BadArgument("mine_facet: no years requested");
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] <= years[i - 1])
            throw BadArgument("mine_facet: years must be strictly increasing");
    int col = labels.category_index(facet.within_category);
    if (col < 0)
        throw BadArgument("facet '" + facet.name + "': category '" + facet.within_category +
                          "' not in label matrix");
    if (docs.size() != corpus.records().size())
        throw BadArgument("mine_facet: docs/records size mismatch");

    std::size_t facet_index = lex.spec().facets.size();
    for (std::size_t i = 0; i < lex.spec().facets.size(); ++i)
        if (lex.spec().facets[i].name == facet.name) facet_index = i;
    if (facet_index == lex.spec().facets.size())
        throw BadArgument("facet '" + facet.name + "' not present in the lexicon");

    std::map<int, std::size_t> year_slot;
    for (std::size_t i = 0; i < years.size(); ++i) year_slot[years[i]] = i;

    // Subset rows: labeled with the category, content years only.
    std::vector<const LabelRow*> subset;
    for (const auto& row : labels.rows) {
        if (!row.cells[static_cast<std::size_t>(col)]) continue;
        if (row.trend_only) continue;
        if (venue && row.venue != *venue) continue;
        if (!year_slot.count(row.year)) continue;
        subset.push_back(&row);
    }

    FacetShareTable table;
    table.facet = facet.name;
    table.within_category = facet.within_category;
    table.years = years;
    table.denominators.assign(years.size(), 0);
    for (const LabelRow* row : subset) ++table.denominators[year_slot[row->year]];
    for (std::size_t y = 0; y < years.size(); ++y)
        if (table.denominators[y] == 0) throw EmptySubset(years[y], facet.within_category);

    std::size_t n_items = facet.items.size();
    // hits[i] holds one flag per item for subset doc i; filled in parallel,
    // aggregated serially so counts are integer-exact and order-free.
    std::vector<std::vector<std::uint8_t>> hits(subset.size(),
                                                std::vector<std::uint8_t>(n_items, 0));
    parallel_for(subset.size(), workers, [&](std::size_t i) {
        const NormalizedDoc& doc = docs[subset[i]->record_index];
        std::string joined = join_tokens(doc.tokens);
        for (std::size_t k = 0; k < n_items; ++k)
            if (lex.facet_item_matcher(facet_index, k).matches(joined)) hits[i][k] = 1;
    });

    table.items.resize(n_items);
    for (std::size_t k = 0; k < n_items; ++k) {
        FacetItemRow& row = table.items[k];
        row.item = facet.items[k].name;
        std::vector<std::size_t> numerators(years.size(), 0);
        for (std::size_t i = 0; i < subset.size(); ++i)
            if (hits[i][k]) ++numerators[year_slot[subset[i]->year]];
        for (std::size_t y = 0; y < years.size(); ++y) {
            FacetCell cell;
            cell.year = years[y];
            cell.numerator = numerators[y];
            cell.denominator = table.denominators[y];
            cell.share = static_cast<double>(cell.numerator) /
                         static_cast<double>(cell.denominator);
            row.cells.push_back(cell);
        }
        if (years.size() >= 2) {
            YearlySeries series;
            series.label = row.item;
            series.unit = SeriesUnit::fraction;
            for (const auto& cell : row.cells) series.points.push_back({cell.year, cell.share});
            row.trend_pp = trend_pp(series);
            row.slope_pp_per_year = ls_slope(series);
        }
    }
    return table;
}

}  // namespace trendlex
