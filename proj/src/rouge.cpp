#include "laysum/rouge.hpp"

#include <algorithm>

#include "laysum/error.hpp"
#include "laysum/textstats.hpp"

namespace laysum {

PrfScore make_prf(double precision, double recall) {
    PrfScore s{precision, recall, 0.0};
    if (precision + recall > 0.0) {
        s.f1 = 2.0 * precision * recall / (precision + recall);
    }
    return s;
}

NgramCounts ngram_counts(std::span<const std::string> tokens, std::size_t n) {
    if (n == 0) {
        throw Error(ErrorCode::ZeroN, "", "n-gram order must be >= 1");
    }
    NgramCounts counts;
    if (tokens.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)];
    }
    return counts;
}

PrfScore rouge_n(std::span<const std::string> hyp, std::span<const std::string> ref, std::size_t n) {
    if (ref.empty()) {
        throw Error(ErrorCode::EmptyReference, "");
    }
    const auto hyp_counts = ngram_counts(hyp, n);
    const auto ref_counts = ngram_counts(ref, n);

    std::size_t overlap = 0;
    for (const auto& [gram, count] : hyp_counts) {
        if (auto it = ref_counts.find(gram); it != ref_counts.end()) {
            overlap += std::min(count, it->second);
        }
    }
    const std::size_t hyp_total = hyp.size() >= n ? hyp.size() - n + 1 : 0;
    const std::size_t ref_total = ref.size() >= n ? ref.size() - n + 1 : 0;
    const double p = hyp_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(hyp_total);
    const double r = ref_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(ref_total);
    return make_prf(p, r);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (const auto& x : a) {
        std::size_t diag = 0;  // row[j-1] from the previous row
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t above = row[j];
            row[j] = (x == b[j - 1]) ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = above;
        }
    }
    return row[b.size()];
}

PrfScore rouge_l(std::span<const std::string> hyp, std::span<const std::string> ref) {
    if (ref.empty()) {
        throw Error(ErrorCode::EmptyReference, "");
    }
    if (hyp.empty()) {
        return {};
    }
    const auto lcs = static_cast<double>(lcs_length(hyp, ref));
    return make_prf(lcs / static_cast<double>(hyp.size()), lcs / static_cast<double>(ref.size()));
}

RougeTriple rouge_all(std::string_view hypothesis, std::string_view reference) {
    const auto hyp = tokenize_words(hypothesis);
    const auto ref = tokenize_words(reference);
    return {rouge_n(hyp, ref, 1), rouge_n(hyp, ref, 2), rouge_l(hyp, ref)};
}

std::string_view rouge_config_description() {
    return "tokens=lowercase alphanumeric+apostrophe runs; stemming=none; stopwords=kept; "
           "references=single";
}

}  // namespace laysum
