#include "laysum/textstats.hpp"

#include <algorithm>
#include <fstream>

#include "laysum/error.hpp"

namespace laysum {

namespace {

struct CodePoint {
    char32_t value;
    std::size_t length;
};

// Lenient UTF-8 decode; an invalid lead or truncated sequence is consumed as
// one byte and reported as U+FFFD.
CodePoint decode(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1};
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return {0xFFFD, 1};
    }
    if (pos + len > s.size()) return {0xFFFD, 1};
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
        cp = (cp << 6) | (b & 0x3F);
    }
    return {cp, len};
}

enum class CharClass { Letter, Digit, Apostrophe, Space, Other };

CharClass classify(char32_t cp) {
    if (cp < 0x80) {
        const char c = static_cast<char>(cp);
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return CharClass::Letter;
        if (c >= '0' && c <= '9') return CharClass::Digit;
        if (c == '\'') return CharClass::Apostrophe;
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            return CharClass::Space;
        }
        return CharClass::Other;
    }
    if (cp == 0x2019) return CharClass::Apostrophe;
    if (cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x3000) return CharClass::Space;
    // General punctuation block, guillemets, middle dot, BOM.
    if ((cp >= 0x2010 && cp <= 0x206F) || cp == 0x00AB || cp == 0x00BB || cp == 0x00B7 ||
        cp == 0xFEFF) {
        return CharClass::Other;
    }
    return CharClass::Letter;
}

bool is_word_class(CharClass c) {
    return c == CharClass::Letter || c == CharClass::Digit || c == CharClass::Apostrophe;
}

bool is_space_at(std::string_view s, std::size_t pos) {
    return pos < s.size() && classify(decode(s, pos).value) == CharClass::Space;
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of a closing quote/bracket at pos, or 0.
std::size_t closer_length(std::string_view s, std::size_t pos) {
    if (pos >= s.size()) return 0;
    const char c = s[pos];
    if (c == ')' || c == ']' || c == '"' || c == '\'') return 1;
    const auto cp = decode(s, pos);
    if (cp.value == 0x201D || cp.value == 0x2019) return cp.length;
    return 0;
}

// Whitespace-delimited token ending just before `end`, with leading
// opening punctuation removed.
std::string_view token_before(std::string_view s, std::size_t end, std::size_t* token_start) {
    std::size_t start = end;
    while (start > 0 && !is_space_at(s, start - 1)) --start;
    *token_start = start;
    std::string_view tok = s.substr(start, end - start);
    while (!tok.empty() && (tok.front() == '(' || tok.front() == '"' || tok.front() == '\'' ||
                            tok.front() == '[')) {
        tok.remove_prefix(1);
    }
    return tok;
}

bool is_guarded(std::string_view text, std::size_t period_pos) {
    std::size_t start = 0;
    const std::string tok = lower(token_before(text, period_pos + 1, &start));
    if (tok.size() == 2 && tok[0] >= 'a' && tok[0] <= 'z') {
        return true;  // single-letter initial
    }
    std::string previous;
    if (start > 0) {
        std::size_t prev_end = start;
        while (prev_end > 0 && is_space_at(text, prev_end - 1)) --prev_end;
        std::size_t prev_start = 0;
        previous = lower(token_before(text, prev_end, &prev_start));
    }
    for (const auto& guard : abbreviation_guards()) {
        if (guard.find(' ') == std::string::npos) {
            if (tok == guard) return true;
        } else if (!previous.empty() && previous + " " + tok == guard) {
            return true;
        }
    }
    return false;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(first, last - first + 1);
}

}  // namespace

const std::vector<std::string>& abbreviation_guards() {
    static const std::vector<std::string> guards = {"dr.", "mr.", "e.g.", "i.e.",
                                                    "et al.", "fig.", "eq."};
    return guards;
}

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        const auto first = current.find_first_not_of('\'');
        if (first != std::string::npos) {
            const auto last = current.find_last_not_of('\'');
            words.push_back(current.substr(first, last - first + 1));
        }
        current.clear();
    };
    for (std::size_t pos = 0; pos < text.size();) {
        const auto cp = decode(text, pos);
        const auto cls = classify(cp.value);
        if (is_word_class(cls)) {
            if (cls == CharClass::Apostrophe) {
                current.push_back('\'');
            } else if (cp.length == 1) {
                current.push_back(ascii_lower(text[pos]));
            } else {
                current.append(text.substr(pos, cp.length));
            }
        } else {
            flush();
        }
        pos += cp.length;
    }
    flush();
    return words;
}

Segmentation segment(std::string_view text) {
    Segmentation seg;
    seg.words = tokenize_words(text);
    if (seg.words.empty()) {
        throw Error(ErrorCode::EmptyText, "", "text contains no words");
    }

    auto emit = [&](std::size_t begin, std::size_t end) {
        const auto sentence = trim(text.substr(begin, end - begin));
        if (!sentence.empty() && !tokenize_words(sentence).empty()) {
            seg.sentences.emplace_back(sentence);
        }
    };

    std::size_t sentence_start = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (!is_terminator(text[pos])) {
            ++pos;
            continue;
        }
        std::size_t run_end = pos;
        while (run_end < text.size() && is_terminator(text[run_end])) ++run_end;
        const bool lone_period = run_end == pos + 1 && text[pos] == '.';

        std::size_t end = run_end;
        while (const auto n = closer_length(text, end)) end += n;

        const bool at_end = end == text.size();
        bool boundary = at_end || is_space_at(text, end);
        if (boundary && !at_end && lone_period && is_guarded(text, pos)) {
            boundary = false;
        }
        if (boundary) {
            emit(sentence_start, end);
            sentence_start = end;
        }
        pos = end;
    }
    emit(sentence_start, text.size());
    return seg;
}

std::size_t count_syllables(std::string_view word) {
    auto is_vowel = [](char c) {
        c = ascii_lower(c);
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    std::size_t groups = 0;
    bool in_group = false;
    for (char c : word) {
        const bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    const std::size_t n = word.size();
    if (n >= 2 && ascii_lower(word[n - 1]) == 'e' && !is_vowel(word[n - 2])) {
        const bool consonant_le = n >= 3 && ascii_lower(word[n - 2]) == 'l' &&
                                  !is_vowel(word[n - 3]) && word[n - 3] != '\'';
        if (!consonant_le && groups > 0) --groups;
    }
    return std::max<std::size_t>(groups, 1);
}

std::size_t count_letters(std::string_view word) {
    std::size_t letters = 0;
    for (std::size_t pos = 0; pos < word.size();) {
        const auto cp = decode(word, pos);
        if (classify(cp.value) == CharClass::Letter) ++letters;
        pos += cp.length;
    }
    return letters;
}

FamiliarWords::FamiliarWords(std::span<const std::string> words) {
    for (const auto& w : words) {
        words_.insert(lower(w));
    }
}

FamiliarWords FamiliarWords::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, path.string(), "cannot open familiar-word list");
    }
    FamiliarWords out;
    std::string line;
    while (std::getline(in, line)) {
        const auto word = trim(line);
        if (word.empty() || word.front() == '#') continue;
        out.words_.insert(lower(word));
    }
    return out;
}

bool FamiliarWords::contains(std::string_view word) const {
    return words_.contains(std::string(word));
}

bool FamiliarWords::is_familiar(std::string_view word) const {
    if (contains(word)) return true;
    auto ends_with = [&](std::string_view suffix) {
        return word.size() > suffix.size() && word.ends_with(suffix);
    };
    auto stem = [&](std::size_t drop, std::string_view add = {}) {
        std::string s(word.substr(0, word.size() - drop));
        s.append(add);
        return contains(s);
    };
    if (ends_with("'s") && stem(2)) return true;
    if (ends_with("ies") && stem(3, "y")) return true;
    if (ends_with("es") && stem(2)) return true;
    if (ends_with("s") && stem(1)) return true;
    if (ends_with("ed") && (stem(2) || stem(1))) return true;
    if (ends_with("ing") && (stem(3) || stem(3, "e"))) return true;
    return false;
}

TextStats compute_stats(std::string_view text, const FamiliarWords& familiar) {
    const auto seg = segment(text);
    TextStats s;
    s.sentence_count = seg.sentences.size();
    s.word_count = seg.words.size();
    for (const auto& w : seg.words) {
        s.syllable_count += count_syllables(w);
        s.letter_count += count_letters(w);
        if (!familiar.is_familiar(w)) ++s.difficult_word_count;
    }
    return s;
}

double flesch_reading_ease(const TextStats& s) {
    const double words = static_cast<double>(s.word_count);
    return 206.835 - 1.015 * (words / static_cast<double>(s.sentence_count)) -
           84.6 * (static_cast<double>(s.syllable_count) / words);
}

double flesch_kincaid_grade(const TextStats& s) {
    const double words = static_cast<double>(s.word_count);
    return 0.39 * (words / static_cast<double>(s.sentence_count)) +
           11.8 * (static_cast<double>(s.syllable_count) / words) - 15.59;
}

double dale_chall(const TextStats& s) {
    const double words = static_cast<double>(s.word_count);
    const double pct_difficult = 100.0 * static_cast<double>(s.difficult_word_count) / words;
    double score = 0.1579 * pct_difficult + 0.0496 * (words / static_cast<double>(s.sentence_count));
    // Integer comparison keeps the 5% boundary exact.
    if (20 * s.difficult_word_count > s.word_count) {
        score += 3.6365;
    }
    return score;
}

double coleman_liau(const TextStats& s) {
    const double words = static_cast<double>(s.word_count);
    const double letters_per_100 = 100.0 * static_cast<double>(s.letter_count) / words;
    const double sentences_per_100 = 100.0 * static_cast<double>(s.sentence_count) / words;
    return 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;
}

ReadabilityReport readability_report(const TextStats& stats) {
    return {flesch_reading_ease(stats), flesch_kincaid_grade(stats), dale_chall(stats),
            coleman_liau(stats)};
}

ReadabilityReport readability_report(std::string_view text, const FamiliarWords& familiar) {
    return readability_report(compute_stats(text, familiar));
}

}  // namespace laysum
