#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace laysum {

struct Segmentation {
    std::vector<std::string> sentences;  // trimmed source substrings
    std::vector<std::string> words;      // lowercased
};

/// Splits on `.`, `!` or `?` runs followed by whitespace or end of text.
/// A lone period does not end a sentence after a guarded abbreviation
/// (see abbreviation_guards()) or a single-letter initial. Words are maximal
/// runs of letters, digits and apostrophes, lowercased, with edge apostrophes
/// trimmed. Throws EmptyText when no word is found.
Segmentation segment(std::string_view text);

/// Word tokens only, same rules as segment(); empty input yields an empty list.
std::vector<std::string> tokenize_words(std::string_view text);

const std::vector<std::string>& abbreviation_guards();

/// Vowel-group heuristic: contiguous runs of [aeiouy], minus one for a
/// silent terminal "e" (kept for consonant + "le"), floored at 1.
std::size_t count_syllables(std::string_view word);

/// Number of letters in a token: ASCII letters plus non-ASCII code points.
std::size_t count_letters(std::string_view word);

/// The Dale-Chall familiar-word list.
class FamiliarWords {
public:
    FamiliarWords() = default;
    explicit FamiliarWords(std::span<const std::string> words);

    /// One lowercase word per line; `#` starts a comment line.
    static FamiliarWords load(const std::filesystem::path& path);

    bool contains(std::string_view word) const;
    /// True when the word or one of its simple inflection stems (plural,
    /// possessive, -ed, -ing) is on the list.
    bool is_familiar(std::string_view word) const;
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

struct TextStats {
    std::size_t sentence_count = 0;
    std::size_t word_count = 0;
    std::size_t syllable_count = 0;
    std::size_t letter_count = 0;
    std::size_t difficult_word_count = 0;

    bool operator==(const TextStats&) const = default;
};

TextStats compute_stats(std::string_view text, const FamiliarWords& familiar);

// Standard published constants. All require word_count >= 1 and
// sentence_count >= 1.
double flesch_reading_ease(const TextStats& s);
double flesch_kincaid_grade(const TextStats& s);
/// Adds the 3.6365 adjustment only when difficult words exceed 5% strictly.
double dale_chall(const TextStats& s);
double coleman_liau(const TextStats& s);

struct ReadabilityReport {
    double fre = 0.0;
    double fkgl = 0.0;
    double dcrs = 0.0;
    double cli = 0.0;
};

ReadabilityReport readability_report(const TextStats& stats);
ReadabilityReport readability_report(std::string_view text, const FamiliarWords& familiar);

}  // namespace laysum
