#include "citerank/tokenizer.hpp"

#include "citerank/error.hpp"
#include "utf8.hpp"

namespace citerank {

std::size_t WhitespaceCjkTokenizer::count(std::string_view text) const {
    std::size_t tokens = 0;
    bool in_word = false;
    for (std::size_t i = 0; i < text.size();) {
        const auto d = utf8::decode(text, i);
        i += d.len;
        if (utf8::is_space(d.cp)) {
            in_word = false;
        } else if (utf8::is_cjk(d.cp)) {
            ++tokens;
            in_word = false;
        } else if (!in_word) {
            ++tokens;
            in_word = true;
        }
    }
    return tokens;
}

const Tokenizer& default_tokenizer() {
    static const WhitespaceCjkTokenizer instance;
    return instance;
}

std::size_t count_tokens(std::span<const SentenceId> ids, const SegmentedContext& ctx, const Tokenizer& tok) {
    std::size_t total = 0;
    for (const SentenceId id : ids) {
        if (id >= ctx.size()) throw InvalidArgument("sentence id " + std::to_string(id) + " out of range");
        total += tok.count(ctx[id].text);
    }
    return total;
}

}  // namespace citerank
