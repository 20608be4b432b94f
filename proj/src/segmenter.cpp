#include "citerank/segmenter.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "citerank/digest.hpp"
#include "citerank/error.hpp"
#include "utf8.hpp"

namespace citerank {

SegmentedContext::SegmentedContext(std::vector<SentenceUnit> sentences, std::string source_digest)
    : sentences_(std::move(sentences)), source_digest_(std::move(source_digest)) {
    if (sentences_.empty()) throw InvalidArgument("segmented context must contain at least one sentence");
    for (std::size_t k = 0; k < sentences_.size(); ++k) {
        if (sentences_[k].id != k)
            throw InvalidArgument("sentence at position " + std::to_string(k) + " has id " +
                                  std::to_string(sentences_[k].id));
    }
}

SegmentedContext SegmentedContext::from_texts(std::span<const std::string> texts) {
    std::vector<SentenceUnit> units;
    units.reserve(texts.size());
    std::string joined;
    for (std::size_t k = 0; k < texts.size(); ++k) {
        if (k > 0) joined.push_back(' ');
        SentenceUnit u;
        u.id = static_cast<SentenceId>(k);
        u.text = texts[k];
        u.start = joined.size();
        joined += texts[k];
        u.end = joined.size();
        units.push_back(std::move(u));
    }
    return SegmentedContext(std::move(units), sha256_hex(joined));
}

IdSet SegmentedContext::all_ids() const {
    IdSet ids(sentences_.size());
    for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = static_cast<SentenceId>(k);
    return ids;
}

LanguageHint parse_language_hint(std::string_view name) {
    if (name == "latin") return LanguageHint::latin;
    if (name == "cjk") return LanguageHint::cjk;
    if (name == "auto") return LanguageHint::automatic;
    throw InvalidArgument("unknown language hint '" + std::string(name) + "'");
}

namespace {

constexpr std::array<std::string_view, 40> kAbbreviations = {
    "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",   "st",   "mt",  "vs",
    "etc",  "e.g",  "i.e",  "cf",   "al",   "inc",  "ltd",  "co",   "corp", "no",
    "fig",  "figs", "eq",   "vol",  "pp",   "ed",   "eds",  "approx", "dept", "est",
    "gen",  "gov",  "sen",  "rep",  "jan",  "feb",  "aug",  "sept", "u.s",  "u.k",
};

bool is_latin_terminal(char32_t cp) { return cp == '.' || cp == '!' || cp == '?'; }

bool is_cjk_terminal(char32_t cp) {
    return cp == 0x3002 /* 。 */ || cp == 0xFF01 /* ！ */ || cp == 0xFF1F /* ？ */ || cp == 0xFF1B /* ； */ ||
           cp == 0xFF0E /* ． */;
}

bool is_closer(char32_t cp) {
    switch (cp) {
        case '"': case '\'': case ')': case ']': case '}':
        case 0x2019: case 0x201D: case 0x00BB: case 0xFF09:
        case 0x300B: case 0x300D: case 0x300F: case 0x3011:
            return true;
        default:
            return false;
    }
}

bool is_opener(char32_t cp) {
    return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == '{' || cp == 0x2018 || cp == 0x201C;
}

// Word that the period at `dot` closes, lower-cased, without leading openers.
std::string word_before(std::string_view doc, std::size_t sentence_start, std::size_t dot) {
    std::size_t b = dot;
    while (b > sentence_start && !utf8::is_ascii_space(static_cast<unsigned char>(doc[b - 1]))) --b;
    std::string word;
    for (std::size_t i = b; i < dot; ++i) word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(doc[i]))));
    std::size_t lead = 0;
    while (lead < word.size() && is_opener(static_cast<unsigned char>(word[lead]))) ++lead;
    return word.substr(lead);
}

bool is_abbreviation(std::string_view word) {
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

struct Splitter {
    std::string_view doc;
    bool latin;
    bool cjk;

    std::size_t skip_space(std::size_t i) const {
        while (i < doc.size()) {
            const auto d = utf8::decode(doc, i);
            if (!utf8::is_space(d.cp)) break;
            i += d.len;
        }
        return i;
    }

    // Consumes further terminals and closing punctuation starting at i.
    std::size_t absorb_tail(std::size_t i) const {
        while (i < doc.size()) {
            const auto d = utf8::decode(doc, i);
            const bool terminal = (latin && is_latin_terminal(d.cp)) || (cjk && is_cjk_terminal(d.cp));
            if (!terminal && !is_closer(d.cp)) break;
            i += d.len;
        }
        return i;
    }

    // Returns the end offset of the sentence that starts at `start`.
    std::size_t find_end(std::size_t start) const {
        std::size_t i = start;
        while (i < doc.size()) {
            const auto d = utf8::decode(doc, i);
            const std::size_t next = i + d.len;
            if (cjk && is_cjk_terminal(d.cp)) return absorb_tail(next);
            if (latin && is_latin_terminal(d.cp)) {
                const std::size_t tail = absorb_tail(next);
                const bool at_break = tail >= doc.size() || utf8::is_space(utf8::decode(doc, tail).cp);
                const bool lone_period = d.cp == '.' && tail == next;
                if (at_break && !(lone_period && is_abbreviation(word_before(doc, start, i)))) return tail;
                i = tail;
                continue;
            }
            i = next;
        }
        return doc.size();
    }
};

std::size_t trim_right(std::string_view doc, std::size_t start, std::size_t end) {
    // Walk forward so multi-byte spaces are recognised; remember the last non-space end.
    std::size_t last = start;
    std::size_t i = start;
    while (i < end) {
        const auto d = utf8::decode(doc, i);
        i += d.len;
        if (!utf8::is_space(d.cp)) last = i;
    }
    return last;
}

}  // namespace

std::span<const std::string_view> abbreviations() { return kAbbreviations; }

SegmentedContext segment(std::string_view document, const SegmentOptions& options) {
    const bool latin = options.language != LanguageHint::cjk;
    const bool cjk = options.language != LanguageHint::latin;
    const Splitter splitter{document, latin, cjk};

    std::vector<SentenceUnit> units;
    std::size_t pos = splitter.skip_space(0);
    while (pos < document.size()) {
        const std::size_t raw_end = splitter.find_end(pos);
        const std::size_t end = trim_right(document, pos, raw_end);
        SentenceUnit u;
        u.id = static_cast<SentenceId>(units.size());
        u.start = pos;
        u.end = end;
        u.text = std::string(document.substr(pos, end - pos));
        units.push_back(std::move(u));
        pos = splitter.skip_space(raw_end);
    }
    if (units.empty()) throw EmptyDocument();
    return SegmentedContext(std::move(units), sha256_hex(document));
}

std::size_t count_oversized(const SegmentedContext& ctx, std::size_t max_sentence_chars) {
    return static_cast<std::size_t>(std::count_if(ctx.sentences().begin(), ctx.sentences().end(),
                                                  [&](const SentenceUnit& u) { return u.text.size() > max_sentence_chars; }));
}

std::string sentence_tag(SentenceId id) { return "<C" + std::to_string(id) + "> "; }

std::string render_prompt_context(const SegmentedContext& ctx) {
    std::string out;
    for (const auto& u : ctx.sentences()) {
        if (!out.empty()) out.push_back('\n');
        out += sentence_tag(u.id);
        out += u.text;
    }
    return out;
}

std::string render_prompt_context(const SegmentedContext& ctx, std::span<const SentenceId> retained) {
    std::string out;
    for (const SentenceId id : retained) {
        if (id >= ctx.size()) throw InvalidArgument("retained id " + std::to_string(id) + " out of range");
        if (!out.empty()) out.push_back('\n');
        out += sentence_tag(id);
        out += ctx[id].text;
    }
    return out;
}

std::string join_sentences(const SegmentedContext& ctx) {
    std::string out;
    for (const auto& u : ctx.sentences()) {
        if (!out.empty()) out.push_back(' ');
        out += u.text;
    }
    return out;
}

}  // namespace citerank
