#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "laysum/corpus.hpp"
#include "laysum/error.hpp"
#include "laysum/retrieval.hpp"
#include "laysum/reward.hpp"
#include "laysum/textstats.hpp"

namespace laysum {

/// Text generation service (fine-tuned summarizer or LLM). Implementations
/// must be safe to call concurrently.
class GeneratorClient {
public:
    virtual ~GeneratorClient() = default;
    virtual std::string name() const = 0;
    virtual std::string generate(const std::string& prompt) const = 0;
};

/// Offline stand-in: echoes the last 50 whitespace-separated words of the
/// prompt, joined by single spaces.
class MockGenerator final : public GeneratorClient {
public:
    std::string name() const override { return "mock"; }
    std::string generate(const std::string& prompt) const override;
};

/// Learned metrics (BERTScore, LENS, AlignScore, SummaC). Returns nullopt
/// when the backing service cannot provide the metric.
class MetricService {
public:
    virtual ~MetricService() = default;
    virtual std::optional<double> score(std::string_view metric, std::string_view candidate,
                                        std::string_view reference) const = 0;
};

enum class QuerySource { GeneratedSummary, ReferenceSummary };
enum class PromptMode { None, Paraphrase, SummarizeWithKeyphrases };

std::string_view to_string(QuerySource source);
std::optional<QuerySource> parse_query_source(std::string_view name);
std::string_view to_string(PromptMode mode);
std::optional<PromptMode> parse_prompt_mode(std::string_view name);

struct PipelineConfig {
    QuerySource query_source = QuerySource::GeneratedSummary;
    std::size_t retrieve_k = 20;
    std::size_t rerank_m = 5;
    std::size_t lead_k = 8;
    std::size_t max_query_tokens = kMaxQueryTokens;
    PromptMode prompt_mode = PromptMode::None;
    RewardConfig reward;

    /// Throws InvalidConfig (rerank_m > retrieve_k, zero sizes) or the
    /// reward config's own errors.
    void validate() const;
};

struct Services {
    const GeneratorClient* generator = nullptr;
    const RerankScorer* scorer = nullptr;  // nullptr selects LexicalOverlapScorer
    const MetricService* metrics = nullptr;
    const FamiliarWords* familiar = nullptr;  // required
};

/// Failure raised by run(); `stage()` names the stage that failed.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause);
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct StagePrompt {
    std::string stage;
    std::string prompt;
};

struct PipelineResult {
    std::string doc_id;
    std::string first_pass;
    std::string query;
    std::vector<RankedHit> retrieved;
    std::vector<RankedHit> reranked;
    std::string augmented_input;
    std::vector<StagePrompt> prompts;
    std::string draft;
    std::string final_summary;
    ReadabilityReport readability;
    std::string relevance_source;
    RewardBreakdown reward;
};

/// First `k` sentences of the article, joined by single spaces.
std::string lead_sentences(std::string_view article, std::size_t k);

/// Summarize-prompt generation when a generator is available, otherwise the
/// lead-k extractive fallback.
std::string first_pass(const Document& doc, const GeneratorClient* generator, std::size_t lead_k = 8);

/// Article followed by a "[KNOWLEDGE]" block listing passages in rank order:
///
///   <article>
///
///   [KNOWLEDGE]
///   [1] <id>: <text>
///   ...
///   [/KNOWLEDGE]
///
/// With no passages the article is returned unchanged.
std::string augment(const Document& doc, std::span<const Passage> passages);

PipelineResult run(const Document& doc, const Index& index, const Services& services,
                   const PipelineConfig& cfg);

/// Runs documents on up to `jobs` threads; results come back in document-id
/// order and are independent of `jobs`. The first failure in id order is
/// rethrown.
std::vector<PipelineResult> run_batch(std::span<const Document> docs, const Index& index,
                                      const Services& services, const PipelineConfig& cfg,
                                      std::size_t jobs);

std::string to_json(const PipelineResult& result);

struct EvalPair {
    std::string id;
    std::string prediction;
    std::string reference;
};

/// Loads {"id"?, "prediction", "reference"} JSONL records.
std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& path);

struct MetricValue {
    std::string name;
    bool higher_is_better = true;
    std::optional<double> value;  // nullopt: unavailable, never zero-filled
    std::string note;
};

struct MetricGroup {
    std::string name;
    std::vector<MetricValue> metrics;
};

struct EvalReport {
    std::size_t pair_count = 0;
    std::vector<MetricGroup> groups;  // Relevance, Readability, Factuality
    std::vector<std::pair<std::string, std::string>> config;

    const MetricValue* find(std::string_view metric) const;
    std::string to_json() const;
    std::string to_markdown(std::string_view method) const;
};

/// Means over pairs of ROUGE-1/2/L F1 and FKGL/DCRS/CLI of the predictions.
/// Learned metrics are filled only through `metrics`. Throws EmptyPairs.
EvalReport evaluate(std::span<const EvalPair> pairs, const FamiliarWords& familiar,
                    const MetricService* metrics, std::size_t jobs = 1);

}  // namespace laysum
