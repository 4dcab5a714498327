#include "laysum/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "laysum/error.hpp"
#include "laysum/textstats.hpp"

namespace laysum {

using nlohmann::json;

std::string_view to_string(Split split) {
    switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    }
    return "train";
}

std::optional<Split> parse_split(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "validation") return Split::Validation;
    if (name == "test") return Split::Test;
    return std::nullopt;
}

namespace {

json parse_object(std::string_view line) {
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw Error(ErrorCode::MalformedJson, "", "expected one JSON object per line");
    }
    return obj;
}

const json& require(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) {
        throw Error(ErrorCode::MissingField, field);
    }
    return *it;
}

std::string string_field(const json& value, const char* field) {
    if (!value.is_string()) {
        throw Error(ErrorCode::InvalidField, field, "expected a string");
    }
    return value.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    return string_field(*it, field);
}

template <typename Record, typename Parse>
std::vector<Record> load_lines(const std::filesystem::path& path, Parse parse) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, path.string(), "cannot open for reading");
    }
    std::vector<Record> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(parse(line));
        } catch (const Error& e) {
            throw Error(e.code(), e.detail(),
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (in.bad()) {
        throw Error(ErrorCode::Io, path.string(), "read failed");
    }
    return out;
}

}  // namespace

Document parse_record(std::string_view line) {
    const json obj = parse_object(line);

    Document doc;
    doc.id = string_field(require(obj, "id"), "id");
    if (doc.id.empty()) {
        throw Error(ErrorCode::InvalidField, "id", "must be nonempty");
    }
    doc.article = string_field(require(obj, "article"), "article");
    if (doc.article.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyArticle, doc.id);
    }

    const std::string split_name = string_field(require(obj, "split"), "split");
    auto split = parse_split(split_name);
    if (!split) {
        throw Error(ErrorCode::InvalidField, "split", "unknown split '" + split_name + "'");
    }
    doc.split = *split;

    doc.summary = optional_string(obj, "summary").value_or("");
    if (doc.summary.empty() && doc.split != Split::Test) {
        throw Error(ErrorCode::MissingField, "summary", "required outside the test split");
    }

    if (auto it = obj.find("keyphrases"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw Error(ErrorCode::InvalidField, "keyphrases", "expected an array of strings");
        }
        for (const auto& k : *it) {
            doc.keyphrases.push_back(string_field(k, "keyphrases"));
        }
    }
    return doc;
}

std::string serialize(const Document& doc) {
    json obj = {
        {"id", doc.id},
        {"article", doc.article},
        {"summary", doc.summary},
        {"keyphrases", doc.keyphrases},
        {"split", std::string(to_string(doc.split))},
    };
    return obj.dump();
}

Passage parse_passage(std::string_view line) {
    const json obj = parse_object(line);
    Passage p;
    p.id = string_field(require(obj, "id"), "id");
    if (p.id.empty()) {
        throw Error(ErrorCode::InvalidField, "id", "must be nonempty");
    }
    p.text = string_field(require(obj, "text"), "text");
    if (p.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyText, p.id);
    }
    p.source = optional_string(obj, "source").value_or("");
    return p;
}

std::string serialize(const Passage& passage) {
    json obj = {{"id", passage.id}, {"text", passage.text}, {"source", passage.source}};
    return obj.dump();
}

Corpus load_corpus(const std::filesystem::path& path) {
    Corpus corpus;
    corpus.documents = load_lines<Document>(path, [](std::string_view l) { return parse_record(l); });
    std::unordered_set<std::string> seen;
    for (const auto& doc : corpus.documents) {
        if (!seen.insert(doc.id).second) {
            throw Error(ErrorCode::DuplicateId, doc.id, path.string());
        }
        ++corpus.split_counts[static_cast<std::size_t>(doc.split)];
    }
    return corpus;
}

std::vector<Passage> load_passages(const std::filesystem::path& path) {
    auto passages = load_lines<Passage>(path, [](std::string_view l) { return parse_passage(l); });
    std::unordered_set<std::string> seen;
    for (const auto& p : passages) {
        if (!seen.insert(p.id).second) {
            throw Error(ErrorCode::DuplicateId, p.id, path.string());
        }
    }
    return passages;
}

std::optional<double> mean_train_summary_length(const Corpus& corpus) {
    std::size_t total = 0;
    std::size_t n = 0;
    for (const auto& doc : corpus.documents) {
        if (doc.split == Split::Train && !doc.summary.empty()) {
            total += tokenize_words(doc.summary).size();
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return static_cast<double>(total) / static_cast<double>(n);
}

}  // namespace laysum
