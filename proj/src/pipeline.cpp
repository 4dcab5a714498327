#include "laysum/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "laysum/prompts.hpp"
#include "laysum/rouge.hpp"
#include "parallel.hpp"

namespace laysum {

using ordered_json = nlohmann::ordered_json;

std::string MockGenerator::generate(const std::string& prompt) const {
    std::istringstream in(prompt);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(std::move(w));
    const std::size_t start = words.size() > 50 ? words.size() - 50 : 0;
    std::string out;
    for (std::size_t i = start; i < words.size(); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += words[i];
    }
    return out;
}

std::string_view to_string(QuerySource source) {
    return source == QuerySource::GeneratedSummary ? "generated_summary" : "reference_summary";
}

std::optional<QuerySource> parse_query_source(std::string_view name) {
    if (name == "generated_summary") return QuerySource::GeneratedSummary;
    if (name == "reference_summary") return QuerySource::ReferenceSummary;
    return std::nullopt;
}

std::string_view to_string(PromptMode mode) {
    switch (mode) {
    case PromptMode::None: return "none";
    case PromptMode::Paraphrase: return "paraphrase";
    case PromptMode::SummarizeWithKeyphrases: return "summarize_with_keyphrases";
    }
    return "none";
}

std::optional<PromptMode> parse_prompt_mode(std::string_view name) {
    if (name == "none") return PromptMode::None;
    if (name == "paraphrase") return PromptMode::Paraphrase;
    if (name == "summarize_with_keyphrases") return PromptMode::SummarizeWithKeyphrases;
    return std::nullopt;
}

void PipelineConfig::validate() const {
    if (retrieve_k == 0) throw Error(ErrorCode::InvalidConfig, "retrieve_k", "must be >= 1");
    if (rerank_m == 0) throw Error(ErrorCode::InvalidConfig, "rerank_m", "must be >= 1");
    if (rerank_m > retrieve_k) {
        throw Error(ErrorCode::InvalidConfig, "rerank_m",
                    "rerank_m (" + std::to_string(rerank_m) + ") exceeds retrieve_k (" +
                        std::to_string(retrieve_k) + ")");
    }
    if (lead_k == 0) throw Error(ErrorCode::InvalidConfig, "lead_k", "must be >= 1");
    if (max_query_tokens == 0) throw Error(ErrorCode::InvalidConfig, "max_query_tokens", "must be >= 1");
    reward.validate();
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), cause.detail(), "stage '" + stage + "': " + cause.what()),
      stage_(std::move(stage)) {}

std::string lead_sentences(std::string_view article, std::size_t k) {
    const auto seg = segment(article);
    std::string out;
    for (std::size_t i = 0; i < std::min(k, seg.sentences.size()); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += seg.sentences[i];
    }
    return out;
}

namespace {

std::string checked_generate(const GeneratorClient& gen, const std::string& prompt) {
    auto out = gen.generate(prompt);
    if (out.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyInput, gen.name(), "generator returned empty text");
    }
    return out;
}

template <typename Fn>
auto in_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e);
    }
}

}  // namespace

std::string first_pass(const Document& doc, const GeneratorClient* generator, std::size_t lead_k) {
    if (generator != nullptr) {
        return checked_generate(*generator, build_summarize_prompt(doc.article, doc.keyphrases));
    }
    return lead_sentences(doc.article, lead_k);
}

std::string augment(const Document& doc, std::span<const Passage> passages) {
    if (passages.empty()) {
        return doc.article;
    }
    std::string out = doc.article;
    out += "\n\n[KNOWLEDGE]\n";
    for (std::size_t i = 0; i < passages.size(); ++i) {
        out += "[" + std::to_string(i + 1) + "] " + passages[i].id + ": " + passages[i].text + "\n";
    }
    out += "[/KNOWLEDGE]";
    return out;
}

PipelineResult run(const Document& doc, const Index& index, const Services& services,
                   const PipelineConfig& cfg) {
    in_stage("config", [&] {
        cfg.validate();
        if (services.familiar == nullptr) {
            throw Error(ErrorCode::InvalidConfig, "familiar", "a familiar-word list is required");
        }
        if (cfg.prompt_mode != PromptMode::None && services.generator == nullptr) {
            throw Error(ErrorCode::GeneratorUnavailable, std::string(to_string(cfg.prompt_mode)),
                        "prompt mode needs a generator");
        }
        return 0;
    });

    PipelineResult r;
    r.doc_id = doc.id;

    const LexicalOverlapScorer lexical;
    const RerankScorer& scorer = services.scorer != nullptr ? *services.scorer : lexical;
    const GeneratorClient* gen = services.generator;

    r.first_pass = in_stage("first_pass", [&] {
        if (gen != nullptr) {
            const auto prompt = build_summarize_prompt(doc.article, doc.keyphrases);
            r.prompts.push_back({"first_pass", prompt});
            return checked_generate(*gen, prompt);
        }
        return lead_sentences(doc.article, cfg.lead_k);
    });

    r.query = in_stage("query", [&] {
        const std::string& source =
            cfg.query_source == QuerySource::GeneratedSummary ? r.first_pass : doc.summary;
        if (tokenize_words(source).empty()) {
            throw Error(ErrorCode::QuerySourceUnavailable, std::string(to_string(cfg.query_source)),
                        "document '" + doc.id + "' has no text for this query source");
        }
        return truncate_query(source, cfg.max_query_tokens);
    });

    r.retrieved = in_stage("retrieve", [&] { return search(index, r.query, cfg.retrieve_k); });
    r.reranked = in_stage("rerank", [&] {
        return rerank(index, r.retrieved, r.query, scorer, std::min(cfg.rerank_m, r.retrieved.size()));
    });

    r.augmented_input = in_stage("augment", [&] {
        std::vector<Passage> knowledge;
        for (const auto& hit : r.reranked) {
            const auto ordinal = index.ordinal_of(hit.passage_id);
            knowledge.push_back({hit.passage_id, index.text(*ordinal), ""});
        }
        return augment(doc, knowledge);
    });

    r.draft = in_stage("generate", [&] {
        return gen != nullptr ? checked_generate(*gen, r.augmented_input) : r.first_pass;
    });

    r.final_summary = in_stage("rewrite", [&] {
        switch (cfg.prompt_mode) {
        case PromptMode::Paraphrase: {
            auto prompt = build_paraphrase_prompt(r.draft);
            r.prompts.push_back({"paraphrase", prompt});
            return checked_generate(*gen, prompt);
        }
        case PromptMode::SummarizeWithKeyphrases: {
            auto prompt = build_summarize_prompt(r.augmented_input, doc.keyphrases);
            r.prompts.push_back({"summarize_with_keyphrases", prompt});
            return checked_generate(*gen, prompt);
        }
        case PromptMode::None: break;
        }
        return r.draft;
    });

    in_stage("reward", [&] {
        const auto stats = compute_stats(r.final_summary, *services.familiar);
        r.readability = readability_report(stats);
        const double readability =
            cfg.reward.metric == ReadabilityMetric::Fre ? r.readability.fre : r.readability.fkgl;

        std::optional<double> relevance;
        if (services.metrics != nullptr && !doc.summary.empty()) {
            relevance = services.metrics->score("bertscore", r.final_summary, doc.summary);
            if (relevance) r.relevance_source = "bertscore";
        }
        if (!relevance && !doc.summary.empty()) {
            relevance = rouge_all(r.final_summary, doc.summary).rougeL.f1;
            r.relevance_source = "rougeL_f1";
        }
        if (!relevance) {
            relevance = keyphrase_coverage(r.final_summary, doc.keyphrases);
            r.relevance_source = "keyphrase_coverage";
        }
        r.reward = composite_reward(readability, *relevance, stats.word_count, cfg.reward);
        return 0;
    });
    return r;
}

std::vector<PipelineResult> run_batch(std::span<const Document> docs, const Index& index,
                                      const Services& services, const PipelineConfig& cfg,
                                      std::size_t jobs) {
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return docs[a].id < docs[b].id; });

    std::vector<PipelineResult> results(docs.size());
    detail::parallel_for(order.size(), jobs,
                         [&](std::size_t i) { results[i] = run(docs[order[i]], index, services, cfg); });
    return results;
}

namespace {

ordered_json hits_json(std::span<const RankedHit> hits) {
    ordered_json arr = ordered_json::array();
    for (const auto& h : hits) {
        arr.push_back({{"rank", h.rank}, {"passage_id", h.passage_id}, {"score", h.score}});
    }
    return arr;
}

}  // namespace

std::string to_json(const PipelineResult& r) {
    ordered_json prompts = ordered_json::array();
    for (const auto& p : r.prompts) prompts.push_back({{"stage", p.stage}, {"prompt", p.prompt}});
    ordered_json obj = {
        {"doc_id", r.doc_id},
        {"first_pass", r.first_pass},
        {"query", r.query},
        {"retrieved", hits_json(r.retrieved)},
        {"reranked", hits_json(r.reranked)},
        {"augmented_input", r.augmented_input},
        {"prompts", prompts},
        {"draft", r.draft},
        {"final_summary", r.final_summary},
        {"readability",
         {{"fre", r.readability.fre}, {"fkgl", r.readability.fkgl}, {"dcrs", r.readability.dcrs}, {"cli", r.readability.cli}}},
        {"reward",
         {{"readability", r.reward.readability_component},
          {"relevance", r.reward.relevance_component},
          {"relevance_source", r.relevance_source},
          {"length", r.reward.length_component},
          {"total", r.reward.total}}},
    };
    return obj.dump();
}

std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, path.string(), "cannot open for reading");
    }
    std::vector<EvalPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        const auto obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) throw Error(ErrorCode::MalformedJson, "", where);
        for (const char* field : {"prediction", "reference"}) {
            if (!obj.contains(field)) throw Error(ErrorCode::MissingField, field, where);
            if (!obj[field].is_string()) throw Error(ErrorCode::InvalidField, field, where);
        }
        EvalPair p;
        p.id = obj.contains("id") && obj["id"].is_string() ? obj["id"].get<std::string>()
                                                            : std::to_string(pairs.size());
        p.prediction = obj["prediction"].get<std::string>();
        p.reference = obj["reference"].get<std::string>();
        pairs.push_back(std::move(p));
    }
    return pairs;
}

const MetricValue* EvalReport::find(std::string_view metric) const {
    for (const auto& g : groups) {
        for (const auto& m : g.metrics) {
            if (m.name == metric) return &m;
        }
    }
    return nullptr;
}

std::string EvalReport::to_json() const {
    ordered_json obj;
    obj["pairs"] = pair_count;
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    obj["config"] = cfg;
    for (const auto& g : groups) {
        ordered_json group = ordered_json::object();
        for (const auto& m : g.metrics) {
            ordered_json entry = {{"available", m.value.has_value()},
                                  {"value", m.value ? ordered_json(*m.value) : ordered_json(nullptr)},
                                  {"higher_is_better", m.higher_is_better}};
            if (!m.note.empty()) entry["note"] = m.note;
            group[m.name] = entry;
        }
        std::string key = g.name;
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        obj[key] = group;
    }
    return obj.dump(2);
}

namespace {

// Overlap and learned metrics print as percentages, grade levels as-is.
bool shown_as_percent(std::string_view metric) {
    return metric != "fkgl" && metric != "dcrs" && metric != "cli";
}

std::string display_name(std::string_view metric) {
    if (metric == "rouge1") return "Rouge1";
    if (metric == "rouge2") return "Rouge2";
    if (metric == "rougeL") return "RougeL";
    if (metric == "bertscore") return "BERTScore";
    if (metric == "fkgl") return "FKGL";
    if (metric == "dcrs") return "DCRS";
    if (metric == "cli") return "CLI";
    if (metric == "lens") return "LENS";
    if (metric == "alignscore") return "AlignScore";
    if (metric == "summac") return "SummaC";
    return std::string(metric);
}

}  // namespace

std::string EvalReport::to_markdown(std::string_view method) const {
    std::string out;
    for (const auto& [k, v] : config) out += "<!-- " + k + ": " + v + " -->\n";
    out += "\n|        |";
    std::string rule = "|---|";
    std::string header = "| Method |";
    for (const auto& g : groups) {
        out += " " + g.name + " |";
        for (std::size_t i = 1; i < g.metrics.size(); ++i) out += " |";
        for (const auto& m : g.metrics) {
            header += " " + display_name(m.name) + (m.higher_is_better ? " ↑" : " ↓") + " |";
            rule += "---:|";
        }
    }
    out += "\n" + header + "\n" + rule + "\n| " + std::string(method) + " |";
    char cell[64];
    for (const auto& g : groups) {
        for (const auto& m : g.metrics) {
            if (!m.value) {
                out += " n/a |";
                continue;
            }
            const double v = shown_as_percent(m.name) ? *m.value * 100.0 : *m.value;
            std::snprintf(cell, sizeof cell, " %.2f |", v);
            out += cell;
        }
    }
    out += "\n\n_n/a: metric needs the model bridge and was not computed. Pairs: " +
           std::to_string(pair_count) + "._\n";
    return out;
}

namespace {

constexpr std::string_view kLearnedMetrics[] = {"bertscore", "lens", "alignscore", "summac"};

struct PairScores {
    RougeTriple rouge;
    ReadabilityReport readability;
    std::array<std::optional<double>, 4> learned;
};

}  // namespace

EvalReport evaluate(std::span<const EvalPair> pairs, const FamiliarWords& familiar,
                    const MetricService* metrics, std::size_t jobs) {
    if (pairs.empty()) {
        throw Error(ErrorCode::EmptyPairs, "");
    }
    std::vector<PairScores> scores(pairs.size());
    detail::parallel_for(pairs.size(), jobs, [&](std::size_t i) {
        const auto& p = pairs[i];
        if (tokenize_words(p.reference).empty()) {
            throw Error(ErrorCode::EmptyReference, p.id);
        }
        scores[i].rouge = rouge_all(p.prediction, p.reference);
        scores[i].readability = readability_report(p.prediction, familiar);
        if (metrics != nullptr) {
            for (std::size_t m = 0; m < std::size(kLearnedMetrics); ++m) {
                scores[i].learned[m] = metrics->score(kLearnedMetrics[m], p.prediction, p.reference);
            }
        }
    });

    const double n = static_cast<double>(pairs.size());
    auto mean = [&](auto&& get) {
        double total = 0.0;
        for (const auto& s : scores) total += get(s);
        return total / n;
    };
    auto learned = [&](std::size_t m) -> MetricValue {
        MetricValue v{std::string(kLearnedMetrics[m]), true, std::nullopt, ""};
        if (metrics == nullptr) {
            v.note = "model bridge not configured";
            return v;
        }
        double total = 0.0;
        for (const auto& s : scores) {
            if (!s.learned[m]) {
                v.note = "model bridge could not provide this metric";
                return v;
            }
            total += *s.learned[m];
        }
        v.value = total / n;
        return v;
    };

    EvalReport report;
    report.pair_count = pairs.size();
    report.groups = {
        {"Relevance",
         {{"rouge1", true, mean([](const PairScores& s) { return s.rouge.rouge1.f1; }), ""},
          {"rouge2", true, mean([](const PairScores& s) { return s.rouge.rouge2.f1; }), ""},
          {"rougeL", true, mean([](const PairScores& s) { return s.rouge.rougeL.f1; }), ""},
          learned(0)}},
        {"Readability",
         {{"fkgl", false, mean([](const PairScores& s) { return s.readability.fkgl; }), ""},
          {"dcrs", false, mean([](const PairScores& s) { return s.readability.dcrs; }), ""},
          {"cli", false, mean([](const PairScores& s) { return s.readability.cli; }), ""},
          learned(1)}},
        {"Factuality", {learned(2), learned(3)}},
    };
    report.config = {
        {"rouge", std::string(rouge_config_description())},
        {"familiar_words", std::to_string(familiar.size())},
        {"model_bridge", metrics != nullptr ? "enabled" : "disabled"},
    };
    return report;
}

}  // namespace laysum
