#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "trendlex/normalizer.hpp"
#include "trendlex/record_store.hpp"

namespace trendlex {

struct PatternSpec {
    std::string pattern;
    // Patterns are anchored to token boundaries by default; substring opts out.
    bool substring = false;
};

struct CategoryRule {
    std::string name;
    std::vector<PatternSpec> patterns;
    std::string description;
};

struct FacetItem {
    std::string name;
    std::vector<PatternSpec> patterns;
};

// A fine-grained item inventory mined within one category's subset.
struct FacetSpec {
    std::string name;
    std::string within_category;
    std::vector<FacetItem> items;
};

// Versioned bundle pinning an entire analysis: category rules, protected
// phrases, stopword lists, and facet registries.
struct Lexicon {
    std::string version;
    std::vector<CategoryRule> categories;
    std::vector<std::string> phrases;
    PhraseTable phrase_table;
    StopwordSet stopwords;
    std::vector<FacetSpec> facets;

    std::string summary() const;
};

// Parses the JSON lexicon document ("//" comments allowed), validates names,
// phrase arity, stopword/phrase disjointness, and compiles every pattern.
// Errors name the offending category/facet and pattern index.
Lexicon load_lexicon(const std::string& source);
Lexicon load_lexicon_file(const std::filesystem::path& path);

struct MatchedTerm {
    std::string term;
    int count = 0;  // occurrences of the term in the document

    bool operator==(const MatchedTerm&) const = default;
};

struct LabelRow {
    std::string record_id;
    std::size_t record_index = 0;  // into Corpus::records() / the doc vector
    std::string venue;
    int year = 0;
    bool trend_only = false;
    std::vector<std::uint8_t> cells;                      // one per category
    std::vector<std::vector<MatchedTerm>> matched_terms;  // per category, term-sorted
};

struct LabelMatrix {
    std::vector<std::string> categories;
    std::vector<LabelRow> rows;  // sorted by record_id

    int category_index(const std::string& name) const;  // -1 when absent
    std::size_t column_sum(std::size_t category) const;
    // Audit form: record_id plus one 0/1 column per category.
    std::string to_csv() const;
};

// A set of patterns compiled into one scanner over the space-joined token
// stream. Case-insensitive; token-boundary anchored unless substring.
class PatternMatcher {
public:
    PatternMatcher(const std::vector<PatternSpec>& patterns, const std::string& context);
    ~PatternMatcher();
    PatternMatcher(PatternMatcher&&) noexcept;
    PatternMatcher& operator=(PatternMatcher&&) noexcept;

    bool matches(const std::string& joined) const;
    // Token indices touched by any match; token_starts[i] is the byte offset
    // of token i in `joined`.
    void collect_matched_tokens(const std::string& joined,
                                const std::vector<std::size_t>& token_starts,
                                const std::vector<std::size_t>& token_ends,
                                std::vector<std::size_t>& out) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Immutable compiled form of a lexicon; shareable across worker threads.
class CompiledLexicon {
public:
    explicit CompiledLexicon(Lexicon lexicon);

    const Lexicon& spec() const { return lexicon_; }
    const std::vector<PatternMatcher>& category_matchers() const { return category_matchers_; }
    const PatternMatcher& facet_item_matcher(std::size_t facet, std::size_t item) const {
        return facet_matchers_[facet][item];
    }

private:
    Lexicon lexicon_;
    std::vector<PatternMatcher> category_matchers_;
    std::vector<std::vector<PatternMatcher>> facet_matchers_;
};

std::string join_tokens(const std::vector<std::string>& tokens);

// Labels one document: category c is true iff any of its patterns matches the
// joined token stream; matched terms are recorded with their in-doc counts.
LabelRow label_document(const NormalizedDoc& doc, const CompiledLexicon& lex);

// Normalizes every retained record with the lexicon's phrase table/stopwords.
// Output is aligned with corpus.records(). workers <= 1 runs serially.
std::vector<NormalizedDoc> normalize_corpus(const Corpus& corpus,
                                            const CompiledLexicon& lex,
                                            int workers = 1);

// One row per retained record (trend_only included), rows in canonical id
// order; deterministic for any worker count.
LabelMatrix label_corpus(const Corpus& corpus,
                         const std::vector<NormalizedDoc>& docs,
                         const CompiledLexicon& lex,
                         int workers = 1);
LabelMatrix label_corpus(const Corpus& corpus, const CompiledLexicon& lex, int workers = 1);

}  // namespace trendlex
