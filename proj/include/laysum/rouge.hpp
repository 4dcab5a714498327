#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace laysum {

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Harmonic mean of precision and recall, 0 when both are 0.
PrfScore make_prf(double precision, double recall);

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

/// All contiguous n-grams with multiplicity. Throws ZeroN for n == 0.
NgramCounts ngram_counts(std::span<const std::string> tokens, std::size_t n);

/// Clipped n-gram overlap. Throws EmptyReference when `ref` is empty.
PrfScore rouge_n(std::span<const std::string> hyp, std::span<const std::string> ref, std::size_t n);

/// Length of the longest common subsequence, O(|a|*|b|) time, O(|b|) space.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS-based ROUGE-L. Throws EmptyReference when `ref` is empty.
PrfScore rouge_l(std::span<const std::string> hyp, std::span<const std::string> ref);

struct RougeTriple {
    PrfScore rouge1;
    PrfScore rouge2;
    PrfScore rougeL;
};

/// Tokenizes both texts with tokenize_words() and scores ROUGE-1/2/L.
RougeTriple rouge_all(std::string_view hypothesis, std::string_view reference);

/// Human-readable description of the tokenizer/stemming configuration.
std::string_view rouge_config_description();

}  // namespace laysum
