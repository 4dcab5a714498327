#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace laysum {

/// A one-shot prompt template stored verbatim under resources/prompts and
/// embedded at build time. `slots` lists the placeholder markers in the
/// order they are filled.
struct PromptTemplate {
    std::string_view name;
    std::string_view version;
    std::string_view text;
    std::vector<std::string_view> slots;

    /// Literal text between (and around) the slots, in order.
    std::vector<std::string_view> literal_segments() const;
    /// FNV-1a 64 of the template text.
    std::uint64_t hash() const;
};

/// Rephrasing prompt applied to a first generation.
const PromptTemplate& paraphrase_template();
/// Direct summarization prompt with keyphrase and article slots.
const PromptTemplate& summarize_template();

std::uint64_t fnv1a64(std::string_view bytes);

/// Fills `{first generation}`. Throws EmptyInput for blank input.
std::string build_paraphrase_prompt(std::string_view first_generation);

/// Fills `Keyphrases:{}` with the keyphrases joined by ", " and `Article:{}`
/// with the article. Throws EmptyArticle for a blank article.
std::string build_summarize_prompt(std::string_view article, std::span<const std::string> keyphrases);

}  // namespace laysum
