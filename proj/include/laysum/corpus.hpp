#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace laysum {

enum class Split { Train, Validation, Test };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

/// One article record: body text, its reference lay summary and keyphrases.
struct Document {
    std::string id;
    std::string article;
    std::string summary;
    std::vector<std::string> keyphrases;
    Split split = Split::Train;

    bool operator==(const Document&) const = default;
};

/// A grounding-knowledge paragraph from an external collection.
struct Passage {
    std::string id;
    std::string text;
    std::string source;

    bool operator==(const Passage&) const = default;
};

struct Corpus {
    std::vector<Document> documents;
    std::array<std::size_t, 3> split_counts{};

    std::size_t count(Split split) const { return split_counts[static_cast<std::size_t>(split)]; }
    std::size_t size() const { return documents.size(); }
};

// Record schema: {"id","article","summary","keyphrases","split"}.
// Unknown fields are ignored; `keyphrases` defaults to empty; `summary` may
// be absent or empty only for test-split records.
Document parse_record(std::string_view line);
std::string serialize(const Document& doc);

// Passage schema: {"id","text","source"?}.
Passage parse_passage(std::string_view line);
std::string serialize(const Passage& passage);

/// Loads a JSONL corpus in file order. Parse failures are rethrown with the
/// 1-based line number appended to the message; blank lines are skipped.
Corpus load_corpus(const std::filesystem::path& path);
std::vector<Passage> load_passages(const std::filesystem::path& path);

/// Mean word count (tokenize_words) of training-split reference summaries,
/// or nullopt when there are none.
std::optional<double> mean_train_summary_length(const Corpus& corpus);

}  // namespace laysum
