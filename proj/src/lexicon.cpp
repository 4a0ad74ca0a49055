#include "trendlex/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <boost/regex.hpp>
#include <json.hpp>

#include "trendlex/csv.hpp"
#include "trendlex/errors.hpp"
#include "trendlex/parallel.hpp"

using nlohmann::json;

namespace trendlex {

namespace {

std::string wrap_pattern(const PatternSpec& spec) {
    if (spec.substring) return "(?:" + spec.pattern + ")";
    return "\\b(?:" + spec.pattern + ")\\b";
}

constexpr auto kRegexFlags =
    boost::regex_constants::perl | boost::regex_constants::icase | boost::regex_constants::optimize;

}  // namespace

struct PatternMatcher::Impl {
    boost::regex combined;
};

PatternMatcher::PatternMatcher(const std::vector<PatternSpec>& patterns, const std::string& context)
    : impl_(std::make_unique<Impl>()) {
    if (patterns.empty()) throw ConfigError(context + ": no patterns");
    std::string alternation;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        if (patterns[i].pattern.empty())
            throw ConfigError(context + " pattern #" + std::to_string(i + 1) + ": empty pattern");
        std::string wrapped = wrap_pattern(patterns[i]);
        try {
            boost::regex probe(wrapped, kRegexFlags);
        } catch (const boost::regex_error& e) {
            throw ConfigError(context + " pattern #" + std::to_string(i + 1) + " ('" +
                              patterns[i].pattern + "'): " + e.what());
        }
        if (!alternation.empty()) alternation += '|';
        alternation += wrapped;
    }
    try {
        impl_->combined.assign(alternation, kRegexFlags);
    } catch (const boost::regex_error& e) {
        throw ConfigError(context + ": combined pattern failed to compile: " + e.what());
    }
}

PatternMatcher::~PatternMatcher() = default;
PatternMatcher::PatternMatcher(PatternMatcher&&) noexcept = default;
PatternMatcher& PatternMatcher::operator=(PatternMatcher&&) noexcept = default;

bool PatternMatcher::matches(const std::string& joined) const {
    return boost::regex_search(joined, impl_->combined);
}

void PatternMatcher::collect_matched_tokens(const std::string& joined,
                                            const std::vector<std::size_t>& token_starts,
                                            const std::vector<std::size_t>& token_ends,
                                            std::vector<std::size_t>& out) const {
    auto it = boost::cregex_iterator(joined.data(), joined.data() + joined.size(), impl_->combined);
    auto end = boost::cregex_iterator();
    for (; it != end; ++it) {
        std::size_t b = static_cast<std::size_t>(it->position());
        std::size_t e = b + static_cast<std::size_t>(it->length());
        if (b == e) continue;
        // First token whose end lies past the match start, then every token
        // starting before the match end overlaps it.
        auto first = std::upper_bound(token_ends.begin(), token_ends.end(), b);
        for (std::size_t k = static_cast<std::size_t>(first - token_ends.begin());
             k < token_starts.size() && token_starts[k] < e; ++k) {
            out.push_back(k);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) joined += ' ';
        joined += tokens[i];
    }
    return joined;
}

std::string Lexicon::summary() const {
    std::size_t pattern_count = 0;
    for (const auto& c : categories) pattern_count += c.patterns.size();
    std::size_t item_count = 0;
    for (const auto& f : facets) item_count += f.items.size();
    std::ostringstream out;
    out << "lexicon " << version << ": " << categories.size() << " categories ("
        << pattern_count << " patterns), " << phrases.size() << " protected phrases, "
        << stopwords.general.size() << "+" << stopwords.domain_generic.size()
        << " stopwords, " << facets.size() << " facets (" << item_count << " items)";
    return out.str();
}

namespace {

std::vector<PatternSpec> parse_patterns(const json& arr, const std::string& context) {
    if (!arr.is_array() || arr.empty())
        throw ConfigError(context + ": 'patterns' must be a non-empty array");
    std::vector<PatternSpec> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& p = arr[i];
        PatternSpec spec;
        if (p.is_string()) {
            spec.pattern = p.get<std::string>();
        } else if (p.is_object() && p.contains("pattern") && p["pattern"].is_string()) {
            spec.pattern = p["pattern"].get<std::string>();
            if (p.contains("substring")) {
                if (!p["substring"].is_boolean())
                    throw ConfigError(context + " pattern #" + std::to_string(i + 1) +
                                      ": 'substring' must be a boolean");
                spec.substring = p["substring"].get<bool>();
            }
        } else {
            throw ConfigError(context + " pattern #" + std::to_string(i + 1) +
                              ": expected a string or {\"pattern\": ...} object");
        }
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<std::string> parse_string_array(const json& arr, const std::string& context) {
    if (!arr.is_array()) throw ConfigError(context + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw ConfigError(context + ": expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

Lexicon load_lexicon(const std::string& source) {
    json root = json::parse(source, nullptr, false, /*ignore_comments=*/true);
    if (root.is_discarded() || !root.is_object())
        throw ConfigError("lexicon: not a valid JSON object");

    Lexicon lex;
    if (!root.contains("version") || !root["version"].is_string() ||
        root["version"].get<std::string>().empty())
        throw ConfigError("lexicon: missing or empty 'version'");
    lex.version = root["version"].get<std::string>();

    if (root.contains("phrases")) {
        lex.phrases = parse_string_array(root["phrases"], "lexicon 'phrases'");
        for (const auto& phrase : lex.phrases) {
            if (split_words(fold_text(phrase)).size() > 6)
                throw ConfigError("protected phrase '" + phrase + "' exceeds six words");
            lex.phrase_table.add(phrase);
        }
    }

    if (root.contains("stopwords")) {
        const json& sw = root["stopwords"];
        if (!sw.is_object()) throw ConfigError("lexicon 'stopwords': expected an object");
        if (sw.contains("general"))
            for (auto& w : parse_string_array(sw["general"], "stopwords 'general'"))
                lex.stopwords.general.insert(std::move(w));
        if (sw.contains("domain_generic"))
            for (auto& w : parse_string_array(sw["domain_generic"], "stopwords 'domain_generic'"))
                lex.stopwords.domain_generic.insert(std::move(w));
    }

    // A protected phrase whose joined token is also a stopword would be
    // erased right after protection; reject that contradiction up front.
    for (const auto& phrase : lex.phrases) {
        std::vector<std::string> words = split_words(fold_text(phrase));
        std::string joined = PhraseTable::join(words, 0, words.size());
        if (lex.stopwords.contains(joined))
            throw ConfigError("lexicon: protected phrase '" + phrase +
                              "' collides with stopword '" + joined + "'");
    }

    if (!root.contains("categories") || !root["categories"].is_array() ||
        root["categories"].empty())
        throw ConfigError("lexicon: 'categories' must be a non-empty array");
    std::unordered_set<std::string> category_names;
    for (std::size_t i = 0; i < root["categories"].size(); ++i) {
        const json& c = root["categories"][i];
        std::string where = "category #" + std::to_string(i + 1);
        if (!c.is_object() || !c.contains("name") || !c["name"].is_string() ||
            c["name"].get<std::string>().empty())
            throw ConfigError(where + ": missing or empty 'name'");
        CategoryRule rule;
        rule.name = c["name"].get<std::string>();
        if (!category_names.insert(rule.name).second)
            throw ConfigError("duplicate category name '" + rule.name + "'");
        if (!c.contains("patterns"))
            throw ConfigError("category '" + rule.name + "': missing 'patterns'");
        rule.patterns = parse_patterns(c["patterns"], "category '" + rule.name + "'");
        if (c.contains("description") && c["description"].is_string())
            rule.description = c["description"].get<std::string>();
        PatternMatcher probe(rule.patterns, "category '" + rule.name + "'");
        lex.categories.push_back(std::move(rule));
    }

    if (root.contains("facets")) {
        if (!root["facets"].is_array()) throw ConfigError("lexicon 'facets': expected an array");
        std::unordered_set<std::string> facet_names;
        for (std::size_t i = 0; i < root["facets"].size(); ++i) {
            const json& f = root["facets"][i];
            std::string where = "facet #" + std::to_string(i + 1);
            if (!f.is_object() || !f.contains("name") || !f["name"].is_string() ||
                f["name"].get<std::string>().empty())
                throw ConfigError(where + ": missing or empty 'name'");
            FacetSpec spec;
            spec.name = f["name"].get<std::string>();
            if (!facet_names.insert(spec.name).second)
                throw ConfigError("duplicate facet name '" + spec.name + "'");
            if (!f.contains("within_category") || !f["within_category"].is_string())
                throw ConfigError("facet '" + spec.name + "': missing 'within_category'");
            spec.within_category = f["within_category"].get<std::string>();
            if (!category_names.count(spec.within_category))
                throw ConfigError("facet '" + spec.name + "': within_category '" +
                                  spec.within_category + "' is not a known category");
            if (!f.contains("items") || !f["items"].is_array() || f["items"].empty())
                throw ConfigError("facet '" + spec.name + "': 'items' must be a non-empty array");
            std::unordered_set<std::string> item_names;
            for (std::size_t k = 0; k < f["items"].size(); ++k) {
                const json& it = f["items"][k];
                std::string item_where =
                    "facet '" + spec.name + "' item #" + std::to_string(k + 1);
                if (!it.is_object() || !it.contains("name") || !it["name"].is_string() ||
                    it["name"].get<std::string>().empty())
                    throw ConfigError(item_where + ": missing or empty 'name'");
                FacetItem item;
                item.name = it["name"].get<std::string>();
                if (!item_names.insert(item.name).second)
                    throw ConfigError("facet '" + spec.name + "': duplicate item '" +
                                      item.name + "'");
                if (!it.contains("patterns"))
                    throw ConfigError("facet '" + spec.name + "' item '" + item.name +
                                      "': missing 'patterns'");
                item.patterns = parse_patterns(
                    it["patterns"], "facet '" + spec.name + "' item '" + item.name + "'");
                PatternMatcher probe(item.patterns,
                                     "facet '" + spec.name + "' item '" + item.name + "'");
                spec.items.push_back(std::move(item));
            }
            lex.facets.push_back(std::move(spec));
        }
    }

    return lex;
}

Lexicon load_lexicon_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound(path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_lexicon(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

CompiledLexicon::CompiledLexicon(Lexicon lexicon) : lexicon_(std::move(lexicon)) {
    category_matchers_.reserve(lexicon_.categories.size());
    for (const auto& c : lexicon_.categories)
        category_matchers_.emplace_back(c.patterns, "category '" + c.name + "'");
    facet_matchers_.reserve(lexicon_.facets.size());
    for (const auto& f : lexicon_.facets) {
        std::vector<PatternMatcher> items;
        items.reserve(f.items.size());
        for (const auto& item : f.items)
            items.emplace_back(item.patterns, "facet '" + f.name + "' item '" + item.name + "'");
        facet_matchers_.push_back(std::move(items));
    }
}

int LabelMatrix::category_index(const std::string& name) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
        if (categories[i] == name) return static_cast<int>(i);
    return -1;
}

std::size_t LabelMatrix::column_sum(std::size_t category) const {
    std::size_t sum = 0;
    for (const auto& row : rows) sum += row.cells[category];
    return sum;
}

std::string LabelMatrix::to_csv() const {
    std::string out;
    std::vector<std::string> header;
    header.push_back("record_id");
    header.insert(header.end(), categories.begin(), categories.end());
    out += csv::join_row(header);
    out += '\n';
    for (const auto& row : rows) {
        std::vector<std::string> fields;
        fields.reserve(1 + row.cells.size());
        fields.push_back(row.record_id);
        for (std::uint8_t cell : row.cells) fields.push_back(cell ? "1" : "0");
        out += csv::join_row(fields);
        out += '\n';
    }
    return out;
}

LabelRow label_document(const NormalizedDoc& doc, const CompiledLexicon& lex) {
    LabelRow row;
    row.record_id = doc.record_id;
    std::size_t n_categories = lex.spec().categories.size();
    row.cells.assign(n_categories, 0);
    row.matched_terms.resize(n_categories);

    std::string joined = join_tokens(doc.tokens);
    std::vector<std::size_t> starts(doc.tokens.size()), ends(doc.tokens.size());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        starts[i] = offset;
        ends[i] = offset + doc.tokens[i].size();
        offset = ends[i] + 1;
    }

    std::vector<std::size_t> hit_tokens;
    for (std::size_t c = 0; c < n_categories; ++c) {
        const PatternMatcher& matcher = lex.category_matchers()[c];
        if (!matcher.matches(joined)) continue;
        row.cells[c] = 1;
        hit_tokens.clear();
        matcher.collect_matched_tokens(joined, starts, ends, hit_tokens);
        std::set<std::string> terms;
        for (std::size_t k : hit_tokens) terms.insert(doc.tokens[k]);
        for (const auto& term : terms) {
            auto it = doc.term_counts.find(term);
            int count = it == doc.term_counts.end() ? 0 : it->second;
            row.matched_terms[c].push_back({term, count});
        }
    }
    return row;
}

std::vector<NormalizedDoc> normalize_corpus(const Corpus& corpus,
                                            const CompiledLexicon& lex,
                                            int workers) {
    const auto& records = corpus.records();
    std::vector<NormalizedDoc> docs(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) {
        docs[i] = normalize_document(records[i], lex.spec().phrase_table, lex.spec().stopwords);
    });
    return docs;
}

LabelMatrix label_corpus(const Corpus& corpus,
                         const std::vector<NormalizedDoc>& docs,
                         const CompiledLexicon& lex,
                         int workers) {
    const auto& records = corpus.records();
    if (docs.size() != records.size())
        throw BadArgument("label_corpus: docs/records size mismatch");

    LabelMatrix matrix;
    for (const auto& c : lex.spec().categories) matrix.categories.push_back(c.name);
    matrix.rows.resize(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) {
        LabelRow row = label_document(docs[i], lex);
        row.record_index = i;
        row.venue = records[i].venue;
        row.year = records[i].year;
        row.trend_only = records[i].trend_only;
        matrix.rows[i] = std::move(row);
    });
    std::sort(matrix.rows.begin(), matrix.rows.end(),
              [](const LabelRow& a, const LabelRow& b) { return a.record_id < b.record_id; });
    return matrix;
}

LabelMatrix label_corpus(const Corpus& corpus, const CompiledLexicon& lex, int workers) {
    return label_corpus(corpus, normalize_corpus(corpus, lex, workers), lex, workers);
}

}  // namespace trendlex
