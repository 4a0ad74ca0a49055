#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "trendlex/record_store.hpp"

namespace trendlex {

// Multi-word phrases that must survive tokenization as single tokens.
// Stored lowercase; the joined form uses '_' between the words.
class PhraseTable {
public:
    PhraseTable() = default;
    explicit PhraseTable(const std::vector<std::string>& phrases);

    void add(const std::string& phrase);  // throws ConfigError on single-word phrase
    std::size_t size() const { return size_; }

    // Longest phrase (in words) starting at `pos`, or 0 when none matches.
    std::size_t longest_match(const std::vector<std::string>& words, std::size_t pos) const;

    static std::string join(const std::vector<std::string>& words,
                            std::size_t pos, std::size_t count);

private:
    struct Node {
        std::map<std::string, Node> children;
        bool terminal = false;
    };
    Node root_;
    std::size_t size_ = 0;
};

struct StopwordSet {
    std::set<std::string> general;
    std::set<std::string> domain_generic;

    bool contains(const std::string& token) const {
        return general.count(token) > 0 || domain_generic.count(token) > 0;
    }
};

struct NormalizedDoc {
    std::string record_id;
    std::vector<std::string> tokens;
    std::map<std::string, int> term_counts;
};

// Character-level canonicalization: UTF-8 decode, compatibility-style fold of
// accented Latin letters and ligatures to ASCII, lowercase, and every
// punctuation or unfoldable character mapped to a space. '_' is reserved for
// protected tokens and passes through.
std::string fold_text(const std::string& utf8);

// True when the string contains only Unicode whitespace (or nothing).
bool is_unicode_blank(const std::string& utf8);

// Lowercases, collapses internal whitespace runs to single spaces, trims.
// Dedup key helper; uses the same character fold as normalization.
std::string casefold_collapse(const std::string& utf8);

std::vector<std::string> split_words(const std::string& folded);

// Greedy left-to-right longest-match replacement of phrase occurrences by
// their joined tokens. Non-participating words pass through unchanged.
std::vector<std::string> protect_phrases(const std::vector<std::string>& words,
                                         const PhraseTable& table);

bool is_pure_number(const std::string& token);

// Full pipeline over raw text: fold -> split -> protect -> drop stopwords and
// pure-number tokens.
std::vector<std::string> normalize_text(const std::string& raw,
                                        const PhraseTable& table,
                                        const StopwordSet& stops);

// Title and abstract are concatenated with a space before processing.
NormalizedDoc normalize_document(const PaperRecord& record,
                                 const PhraseTable& table,
                                 const StopwordSet& stops);

}  // namespace trendlex
