#include "citerank/citation_format.hpp"

#include <algorithm>
#include <limits>

#include "citerank/error.hpp"

namespace citerank {
namespace {

constexpr std::string_view kOpenStatement = "<statement>";
constexpr std::string_view kCloseStatement = "</statement>";
constexpr std::string_view kOpenCite = "<cite>";
constexpr std::string_view kCloseCite = "</cite>";
constexpr std::string_view kTags[] = {kOpenStatement, kCloseStatement, kOpenCite, kCloseCite};

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool all_whitespace(std::string_view s) { return std::all_of(s.begin(), s.end(), is_ws); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(ParseError::Kind kind, std::string what, std::size_t offset) {
    throw ParseError(kind, std::move(what), offset);
}

// First occurrence of any tag at or after `from`; npos when none.
std::pair<std::size_t, std::string_view> next_tag(std::string_view raw, std::size_t from) {
    std::size_t best = std::string_view::npos;
    std::string_view which;
    for (const auto tag : kTags) {
        const std::size_t at = raw.find(tag, from);
        if (at < best) {
            best = at;
            which = tag;
        }
    }
    return {best, which};
}

SentenceId parse_id(std::string_view body, std::size_t& i, std::size_t base) {
    const std::size_t begin = i;
    std::uint64_t value = 0;
    while (i < body.size() && body[i] >= '0' && body[i] <= '9') {
        value = value * 10 + static_cast<std::uint64_t>(body[i] - '0');
        if (value > std::numeric_limits<SentenceId>::max())
            fail(ParseError::Kind::MalformedSpan, "sentence id out of range", base + begin);
        ++i;
    }
    if (i == begin) fail(ParseError::Kind::MalformedSpan, "expected a sentence id", base + begin);
    return static_cast<SentenceId>(value);
}

CitationSequence parse_citation_at(std::string_view body, std::size_t base) {
    CitationSequence seq;
    std::size_t i = 0;
    while (true) {
        while (i < body.size() && is_ws(body[i])) ++i;
        if (i == body.size()) break;
        if (body[i] != '[') fail(ParseError::Kind::MalformedSpan, "expected '['", base + i);
        const std::size_t span_at = i;
        ++i;
        const SentenceId a = parse_id(body, i, base);
        if (i >= body.size() || body[i] != '-') fail(ParseError::Kind::MalformedSpan, "expected '-'", base + i);
        ++i;
        const SentenceId b = parse_id(body, i, base);
        if (i >= body.size() || body[i] != ']') fail(ParseError::Kind::MalformedSpan, "expected ']'", base + i);
        ++i;
        if (a > b) fail(ParseError::Kind::MalformedSpan, "span start exceeds end", base + span_at);
        seq.spans.push_back({a, b});
    }
    return seq;
}

void add_stray(std::string_view raw, std::size_t from, std::size_t to, const ParseOptions& options,
               StructuredResponse& out) {
    const std::string_view stray = raw.substr(from, to - from);
    if (all_whitespace(stray)) return;
    if (options.strict) fail(ParseError::Kind::StrayText, "text outside a statement block", from);
    out.statements.push_back({std::string(trim(stray)), {}});
}

}  // namespace

CitationSequence parse_citation(std::string_view body) {
    std::string_view inner = trim(body);
    std::size_t base = static_cast<std::size_t>(inner.data() - body.data());
    if (inner.starts_with(kOpenCite)) {
        inner.remove_prefix(kOpenCite.size());
        base += kOpenCite.size();
        if (!inner.ends_with(kCloseCite)) fail(ParseError::Kind::MalformedTag, "unterminated <cite>", base);
        inner.remove_suffix(kCloseCite.size());
    }
    return parse_citation_at(inner, base);
}

StructuredResponse parse_response(std::string_view raw, const ParseOptions& options) {
    StructuredResponse out;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        const auto [at, tag] = next_tag(raw, pos);
        if (at == std::string_view::npos) {
            add_stray(raw, pos, raw.size(), options, out);
            break;
        }
        if (tag != kOpenStatement) fail(ParseError::Kind::MalformedTag, "unexpected " + std::string(tag), at);
        add_stray(raw, pos, at, options, out);

        const std::size_t text_begin = at + kOpenStatement.size();
        const auto [inner_at, inner_tag] = next_tag(raw, text_begin);
        if (inner_at == std::string_view::npos) fail(ParseError::Kind::MalformedTag, "unterminated <statement>", at);

        Statement st;
        st.text = std::string(raw.substr(text_begin, inner_at - text_begin));
        if (st.text.empty()) fail(ParseError::Kind::MalformedTag, "empty statement text", text_begin);

        if (inner_tag == kCloseStatement) {
            if (options.strict) fail(ParseError::Kind::MalformedTag, "statement without <cite>", inner_at);
            pos = inner_at + kCloseStatement.size();
        } else if (inner_tag == kOpenCite) {
            const std::size_t body_begin = inner_at + kOpenCite.size();
            const auto [close_at, close_tag] = next_tag(raw, body_begin);
            if (close_tag != kCloseCite) fail(ParseError::Kind::MalformedTag, "unterminated <cite>", inner_at);
            st.citation = parse_citation_at(raw.substr(body_begin, close_at - body_begin), body_begin);
            std::size_t after = close_at + kCloseCite.size();
            while (after < raw.size() && is_ws(raw[after])) ++after;
            if (raw.substr(after, kCloseStatement.size()) != kCloseStatement)
                fail(ParseError::Kind::MalformedTag, "expected </statement> after </cite>", after);
            pos = after + kCloseStatement.size();
        } else {
            fail(ParseError::Kind::MalformedTag, "unexpected " + std::string(inner_tag) + " inside statement", inner_at);
        }
        out.statements.push_back(std::move(st));
    }
    return out;
}

std::string serialize_citation(const CitationSequence& seq) {
    std::string out;
    for (const auto& s : seq.spans) {
        out.push_back('[');
        out += std::to_string(s.start_id);
        out.push_back('-');
        out += std::to_string(s.end_id);
        out.push_back(']');
    }
    return out;
}

std::string serialize_statement(const Statement& statement) {
    std::string out;
    out.reserve(statement.text.size() + 40);
    out += kOpenStatement;
    out += statement.text;
    out += kOpenCite;
    out += serialize_citation(statement.citation);
    out += kCloseCite;
    out += kCloseStatement;
    return out;
}

std::string serialize_response(const StructuredResponse& response) {
    std::string out;
    for (const auto& st : response.statements) out += serialize_statement(st);
    return out;
}

ResolvedCitation resolve_cited_sentences(const CitationSequence& seq, std::size_t num_sentences) {
    ResolvedCitation out;
    std::vector<std::pair<SentenceId, SentenceId>> clipped;
    for (const auto& s : seq.spans) {
        if (s.end_id >= num_sentences) out.warnings.push_back({s, num_sentences});
        if (s.start_id >= num_sentences) continue;
        const auto last = static_cast<SentenceId>(std::min<std::size_t>(s.end_id, num_sentences - 1));
        clipped.emplace_back(s.start_id, last);
    }
    std::sort(clipped.begin(), clipped.end());
    std::int64_t next = 0;  // first id not yet emitted
    for (const auto& [a, b] : clipped) {
        for (std::int64_t id = std::max<std::int64_t>(a, next); id <= b; ++id) out.ids.push_back(static_cast<SentenceId>(id));
        next = std::max<std::int64_t>(next, static_cast<std::int64_t>(b) + 1);
    }
    return out;
}

std::size_t coverage(const CitationSequence& seq, std::size_t num_sentences) {
    return resolve_cited_sentences(seq, num_sentences).ids.size();
}

}  // namespace citerank
