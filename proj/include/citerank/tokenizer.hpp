#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>

#include "citerank/segmenter.hpp"

namespace citerank {

/// Token counter used for citation length caps and truncation budgets.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::size_t count(std::string_view text) const = 0;
};

/// Counts whitespace-separated words, with every CJK character (ideograph,
/// kana, hangul or full-width punctuation) counted as a token of its own.
class WhitespaceCjkTokenizer final : public Tokenizer {
public:
    std::size_t count(std::string_view text) const override;
};

/// Process-wide default tokenizer instance.
const Tokenizer& default_tokenizer();

inline std::size_t count_tokens(std::string_view text, const Tokenizer& tok = default_tokenizer()) {
    return tok.count(text);
}

/// Sum of per-sentence token counts over `ids`.
std::size_t count_tokens(std::span<const SentenceId> ids, const SegmentedContext& ctx,
                         const Tokenizer& tok = default_tokenizer());

}  // namespace citerank
