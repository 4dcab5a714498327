#include "laysum/prompts.hpp"

#include "laysum/error.hpp"
#include "prompt_resources.hpp"

namespace laysum {

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string fill(const PromptTemplate& tpl, std::span<const std::string_view> values) {
    std::string out;
    std::string_view rest = tpl.text;
    for (std::size_t i = 0; i < tpl.slots.size(); ++i) {
        const auto at = rest.find(tpl.slots[i]);
        out.append(rest.substr(0, at));
        out.append(values[i]);
        rest.remove_prefix(at + tpl.slots[i].size());
    }
    out.append(rest);
    return out;
}

}  // namespace

std::vector<std::string_view> PromptTemplate::literal_segments() const {
    std::vector<std::string_view> out;
    std::string_view rest = text;
    for (auto slot : slots) {
        const auto at = rest.find(slot);
        out.push_back(rest.substr(0, at));
        rest.remove_prefix(at + slot.size());
    }
    out.push_back(rest);
    return out;
}

std::uint64_t PromptTemplate::hash() const { return fnv1a64(text); }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

const PromptTemplate& paraphrase_template() {
    static const PromptTemplate tpl{"paraphrase", "v1", resources::kParaphraseV1, {"{first generation}"}};
    return tpl;
}

const PromptTemplate& summarize_template() {
    static const PromptTemplate tpl{"summarize_with_keyphrases", "v1", resources::kSummarizeV1, {"{}", "{}"}};
    return tpl;
}

std::string build_paraphrase_prompt(std::string_view first_generation) {
    if (blank(first_generation)) {
        throw Error(ErrorCode::EmptyInput, "first generation");
    }
    const std::string_view values[] = {first_generation};
    return fill(paraphrase_template(), values);
}

std::string build_summarize_prompt(std::string_view article, std::span<const std::string> keyphrases) {
    if (blank(article)) {
        throw Error(ErrorCode::EmptyArticle, "");
    }
    std::string joined;
    for (const auto& k : keyphrases) {
        if (!joined.empty()) joined += ", ";
        joined += k;
    }
    const std::string_view values[] = {joined, article};
    return fill(summarize_template(), values);
}

}  // namespace laysum
