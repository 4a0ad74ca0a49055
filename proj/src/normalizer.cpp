#include "trendlex/normalizer.hpp"

#include <unordered_map>

#include "trendlex/errors.hpp"

namespace trendlex {
namespace {

// Decodes one UTF-8 codepoint starting at s[i]; advances i past it.
// Malformed bytes decode to U+FFFD and advance by one byte.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        unsigned char b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

bool is_space_cp(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        case 0xFEFF:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200B;
    }
}

// ASCII folds for Latin-1 Supplement and Latin Extended-A letters and for a
// few common ligatures. Anything not in the table and not ASCII is treated
// as punctuation (mapped to a space), which is what abstracts need: Greek
// symbols and CJK are noise for an English lexicon.
const std::unordered_map<char32_t, const char*>& fold_table() {
    static const std::unordered_map<char32_t, const char*> table = [] {
        std::unordered_map<char32_t, const char*> t;
        auto put = [&t](const char32_t* cps, const char* repl) {
            for (const char32_t* p = cps; *p; ++p) t[*p] = repl;
        };
        // Latin-1 Supplement.
        put(U"ÀÁÂÃÄÅàáâãäå", "a");
        put(U"Ææ", "ae");
        put(U"Çç", "c");
        put(U"ÈÉÊËèéêë", "e");
        put(U"ÌÍÎÏìíîï", "i");
        put(U"Ðð", "d");
        put(U"Ññ", "n");
        put(U"ÒÓÔÕÖØòóôõöø", "o");
        put(U"ÙÚÛÜùúûü", "u");
        put(U"ÝŸýÿ", "y");
        put(U"Þþ", "th");
        put(U"ß", "ss");
        // Latin Extended-A.
        put(U"ĀĂĄāăą", "a");
        put(U"ĆĈĊČćĉċč", "c");
        put(U"ĎĐďđ", "d");
        put(U"ĒĔĖĘĚēĕėęě", "e");
        put(U"ĜĞĠĢĝğġģ", "g");
        put(U"ĤĦĥħ", "h");
        put(U"ĨĪĬĮİĩīĭįı", "i");
        put(U"Ĳĳ", "ij");
        put(U"Ĵĵ", "j");
        put(U"Ķķ", "k");
        put(U"ĹĻĽĿŁĺļľŀł", "l");
        put(U"ŃŅŇńņňŉ", "n");
        put(U"ŌŎŐōŏő", "o");
        put(U"Œœ", "oe");
        put(U"ŔŖŘŕŗř", "r");
        put(U"ŚŜŞŠśŝşš", "s");
        put(U"ŢŤŦţťŧ", "t");
        put(U"ŨŪŬŮŰŲũūŭůűų", "u");
        put(U"Ŵŵ", "w");
        put(U"Ŷŷ", "y");
        put(U"ŹŻŽźżž", "z");
        // Ligatures.
        t[0xFB00] = "ff";
        t[0xFB01] = "fi";
        t[0xFB02] = "fl";
        t[0xFB03] = "ffi";
        t[0xFB04] = "ffl";
        t[0xFB05] = "st";
        t[0xFB06] = "st";
        return t;
    }();
    return table;
}

}  // namespace

std::string fold_text(const std::string& utf8) {
    std::string out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) {
        char32_t cp = decode_utf8(utf8, i);
        if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (c >= 'A' && c <= 'Z') {
                out.push_back(static_cast<char>(c - 'A' + 'a'));
            } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_') {
                out.push_back(c);
            } else {
                out.push_back(' ');
            }
            continue;
        }
        auto it = fold_table().find(cp);
        if (it != fold_table().end()) {
            out += it->second;
        } else {
            out.push_back(' ');
        }
    }
    return out;
}

bool is_unicode_blank(const std::string& utf8) {
    std::size_t i = 0;
    while (i < utf8.size()) {
        char32_t cp = decode_utf8(utf8, i);
        if (!is_space_cp(cp)) return false;
    }
    return true;
}

std::string casefold_collapse(const std::string& utf8) {
    std::string folded = fold_text(utf8);
    std::string out;
    out.reserve(folded.size());
    bool pending_space = false;
    for (char c : folded) {
        if (c == ' ') {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split_words(const std::string& folded) {
    std::vector<std::string> words;
    std::size_t start = std::string::npos;
    for (std::size_t i = 0; i <= folded.size(); ++i) {
        bool sep = i == folded.size() || folded[i] == ' ';
        if (sep) {
            if (start != std::string::npos) {
                words.emplace_back(folded, start, i - start);
                start = std::string::npos;
            }
        } else if (start == std::string::npos) {
            start = i;
        }
    }
    return words;
}

PhraseTable::PhraseTable(const std::vector<std::string>& phrases) {
    for (const auto& p : phrases) add(p);
}

void PhraseTable::add(const std::string& phrase) {
    std::vector<std::string> words = split_words(casefold_collapse(phrase));
    if (words.size() < 2) {
        throw ConfigError("protected phrase must have at least two words: '" + phrase + "'");
    }
    Node* node = &root_;
    for (const auto& w : words) node = &node->children[w];
    if (!node->terminal) {
        node->terminal = true;
        ++size_;
    }
}

std::size_t PhraseTable::longest_match(const std::vector<std::string>& words,
                                       std::size_t pos) const {
    const Node* node = &root_;
    std::size_t best = 0;
    for (std::size_t i = pos; i < words.size(); ++i) {
        auto it = node->children.find(words[i]);
        if (it == node->children.end()) break;
        node = &it->second;
        if (node->terminal) best = i - pos + 1;
    }
    return best;
}

std::string PhraseTable::join(const std::vector<std::string>& words,
                              std::size_t pos, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i) out.push_back('_');
        out += words[pos + i];
    }
    return out;
}

std::vector<std::string> protect_phrases(const std::vector<std::string>& words,
                                         const PhraseTable& table) {
    std::vector<std::string> out;
    out.reserve(words.size());
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t len = table.longest_match(words, i);
        if (len >= 2) {
            out.push_back(PhraseTable::join(words, i, len));
            i += len;
        } else {
            out.push_back(words[i]);
            ++i;
        }
    }
    return out;
}

bool is_pure_number(const std::string& token) {
    if (token.empty()) return false;
    for (char c : token) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

namespace {

std::vector<std::string> drop_noise(std::vector<std::string> tokens, const StopwordSet& stops) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (auto& t : tokens) {
        if (stops.contains(t)) continue;
        if (is_pure_number(t)) continue;
        kept.push_back(std::move(t));
    }
    return kept;
}

}  // namespace

std::vector<std::string> normalize_text(const std::string& raw,
                                        const PhraseTable& table,
                                        const StopwordSet& stops) {
    std::vector<std::string> words = split_words(fold_text(raw));
    std::vector<std::string> tokens = drop_noise(protect_phrases(words, table), stops);
    // Removing a stopword or number can make two phrase words adjacent;
    // re-protect until stable so the output alphabet is closed under
    // normalization (idempotence).
    while (true) {
        std::vector<std::string> merged = protect_phrases(tokens, table);
        if (merged == tokens) break;
        tokens = drop_noise(std::move(merged), stops);
    }
    return tokens;
}

NormalizedDoc normalize_document(const PaperRecord& record,
                                 const PhraseTable& table,
                                 const StopwordSet& stops) {
    NormalizedDoc doc;
    doc.record_id = record.id;
    doc.tokens = normalize_text(record.title + " " + record.abstract, table, stops);
    for (const auto& t : doc.tokens) ++doc.term_counts[t];
    return doc;
}

}  // namespace trendlex
