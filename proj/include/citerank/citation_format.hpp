#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "citerank/segmenter.hpp"

namespace citerank {

/// Inclusive interval of cited sentence ids, written `[start-end]`.
struct CitationSpan {
    SentenceId start_id = 0;
    SentenceId end_id = 0;

    bool operator==(const CitationSpan&) const = default;
};

/// Spans exactly as written; duplicates and overlaps are kept.
struct CitationSequence {
    std::vector<CitationSpan> spans;

    bool empty() const noexcept { return spans.empty(); }
    bool operator==(const CitationSequence&) const = default;
};

struct Statement {
    std::string text;
    CitationSequence citation;

    bool operator==(const Statement&) const = default;
};

struct StructuredResponse {
    std::vector<Statement> statements;

    bool operator==(const StructuredResponse&) const = default;
};

struct ParseOptions {
    // Strict mode rejects non-whitespace text outside statement blocks and a
    // statement block without a <cite> element.
    bool strict = false;
};

/// Parses `<statement>text<cite>[a-b][c-d]</cite></statement>` blocks.
///
/// In lenient mode, non-whitespace text between blocks becomes a statement
/// with an empty citation, and `<statement>text</statement>` is read as an
/// uncited statement. Throws ParseError.
StructuredResponse parse_response(std::string_view raw, const ParseOptions& options = {});

/// Parses the body of a `<cite>` element, e.g. `[1-2][5-5]`. Surrounding
/// `<cite>`/`</cite>` tags are stripped if present.
CitationSequence parse_citation(std::string_view body);

std::string serialize_citation(const CitationSequence& seq);
std::string serialize_statement(const Statement& statement);
std::string serialize_response(const StructuredResponse& response);

/// A span portion that fell outside the context and was dropped.
struct ClampWarning {
    CitationSpan span;
    std::size_t context_size = 0;
};

struct ResolvedCitation {
    IdSet ids;
    std::vector<ClampWarning> warnings;
};

/// Union of the spans clipped to [0, num_sentences).
ResolvedCitation resolve_cited_sentences(const CitationSequence& seq, std::size_t num_sentences);

inline ResolvedCitation resolve_cited_sentences(const CitationSequence& seq, const SegmentedContext& ctx) {
    return resolve_cited_sentences(seq, ctx.size());
}

/// Number of distinct in-range sentences cited.
std::size_t coverage(const CitationSequence& seq, std::size_t num_sentences);

inline std::size_t coverage(const CitationSequence& seq, const SegmentedContext& ctx) {
    return coverage(seq, ctx.size());
}

}  // namespace citerank
