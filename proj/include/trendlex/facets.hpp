#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trendlex/lexicon.hpp"
#include "trendlex/record_store.hpp"

namespace trendlex {

struct FacetCell {
    int year = 0;
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    double share = 0.0;  // numerator / denominator, in [0,1]
};

struct FacetItemRow {
    std::string item;
    std::vector<FacetCell> cells;  // one per requested year, in order
    // Filled from the share series when it has >= 2 points.
    std::optional<double> trend_pp;
    std::optional<double> slope_pp_per_year;
};

// Yearly shares of one facet's items within the subset of documents labeled
// with the facet's category. All items of a facet share the denominators.
struct FacetShareTable {
    std::string facet;
    std::string within_category;
    std::vector<int> years;
    std::vector<std::size_t> denominators;  // per year, aligned with `years`
    std::vector<FacetItemRow> items;

    std::string to_csv() const;  // columns item, year, numerator, denominator, share
};

const std::vector<FacetSpec>& facet_registry(const Lexicon& lex);

// share(item, year) = subset docs matching any item pattern / subset docs that
// year, where the subset is docs labeled within_category, trend_only records
// excluded, optionally restricted to one venue. A year with an empty subset
// raises EmptySubset: 0/0 is undefined, not zero.
FacetShareTable mine_facet(const FacetSpec& facet,
                           const LabelMatrix& labels,
                           const Corpus& corpus,
                           const std::vector<NormalizedDoc>& docs,
                           const std::vector<int>& years,
                           const CompiledLexicon& lex,
                           int workers = 1,
                           const std::optional<std::string>& venue = {});

}  // namespace trendlex
