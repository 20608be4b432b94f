#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace citerank {

using SentenceId = std::uint32_t;

/// Sorted, duplicate-free list of sentence ids.
using IdSet = std::vector<SentenceId>;

struct SentenceUnit {
    SentenceId id = 0;
    std::string text;
    std::size_t start = 0;  // byte offset of text in the source document
    std::size_t end = 0;    // one past the last byte

    bool operator==(const SentenceUnit&) const = default;
};

/// Ordered sentences of one document. Sentence at position k has id k.
class SegmentedContext {
public:
    SegmentedContext() = default;

    /// Takes ownership of pre-split sentences; throws InvalidArgument when the
    /// list is empty or ids are not 0..n-1 in order.
    SegmentedContext(std::vector<SentenceUnit> sentences, std::string source_digest);

    /// Builds a context from bare sentence texts (offsets assume single-space joins).
    static SegmentedContext from_texts(std::span<const std::string> texts);

    std::size_t size() const noexcept { return sentences_.size(); }
    bool empty() const noexcept { return sentences_.empty(); }
    const SentenceUnit& operator[](std::size_t i) const { return sentences_[i]; }
    const std::vector<SentenceUnit>& sentences() const noexcept { return sentences_; }
    const std::string& source_digest() const noexcept { return source_digest_; }

    /// All ids 0..size()-1.
    IdSet all_ids() const;

private:
    std::vector<SentenceUnit> sentences_;
    std::string source_digest_;
};

enum class LanguageHint { latin, cjk, automatic };

LanguageHint parse_language_hint(std::string_view name);

struct SegmentOptions {
    LanguageHint language = LanguageHint::automatic;
    // Sentences longer than this are reported by count_oversized() but never split.
    std::size_t max_sentence_chars = 2048;
};

/// Rule-based sentence splitter.
///
/// Latin terminals are `.`, `!` and `?`. A latin terminal ends a sentence only
/// when it is followed by whitespace or the end of input, after absorbing any
/// run of further terminals and closing quotes/brackets. A `.` does not end a
/// sentence when the word it closes is on the abbreviation list (see
/// abbreviations()). CJK terminals are the full-width `。！？；．`; they end
/// a sentence immediately (plus trailing closing punctuation) regardless of
/// what follows.
///
/// Sentence text is trimmed of surrounding whitespace; bytes between
/// consecutive sentences are whitespace only.
SegmentedContext segment(std::string_view document, const SegmentOptions& options = {});

inline SegmentedContext segment(std::string_view document, LanguageHint hint) {
    SegmentOptions options;
    options.language = hint;
    return segment(document, options);
}

/// Lower-cased words (without the trailing period) that never end a sentence.
std::span<const std::string_view> abbreviations();

std::size_t count_oversized(const SegmentedContext& ctx, std::size_t max_sentence_chars);

/// Tag written before every sentence: `<C{id}>` followed by one space.
std::string sentence_tag(SentenceId id);

/// Renders every sentence as `<C{id}> text`, one sentence per line.
std::string render_prompt_context(const SegmentedContext& ctx);

/// Renders only the retained sentences, in document order, keeping their
/// original id tags. `retained` must be sorted and in range.
std::string render_prompt_context(const SegmentedContext& ctx, std::span<const SentenceId> retained);

/// Joins sentence texts with single spaces.
std::string join_sentences(const SegmentedContext& ctx);

}  // namespace citerank
