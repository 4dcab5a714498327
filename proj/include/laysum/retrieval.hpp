#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "laysum/corpus.hpp"

namespace laysum {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

struct Posting {
    std::uint32_t ordinal = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Immutable BM25 inverted index over a passage collection. Passages are
/// addressed by their ordinal (position in the build order).
class Index {
public:
    static Index build(std::span<const Passage> passages, Bm25Params params = {});

    /// Binary round-trip: "LSIX" magic, u32 format version, then tagged
    /// length-prefixed sections, all little-endian.
    void save(const std::filesystem::path& path) const;
    static Index load(const std::filesystem::path& path);

    static constexpr std::uint32_t kFormatVersion = 1;

    const Bm25Params& params() const { return params_; }
    std::size_t size() const { return ids_.size(); }
    const std::string& id(std::size_t ordinal) const { return ids_[ordinal]; }
    const std::string& text(std::size_t ordinal) const { return texts_[ordinal]; }
    std::optional<std::size_t> ordinal_of(std::string_view id) const;
    std::span<const std::uint32_t> doc_lengths() const { return doc_lengths_; }
    double avg_doc_length() const { return avg_doc_length_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    /// Empty span for an unindexed term.
    std::span<const Posting> postings_for(const std::string& term) const;

    double idf(std::size_t document_frequency) const;

    bool operator==(const Index& other) const;

private:
    void finalize();

    Bm25Params params_;
    std::vector<std::string> ids_;
    std::vector<std::string> texts_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::map<std::string, std::vector<Posting>> postings_;
    std::unordered_map<std::string, std::size_t> ordinal_by_id_;
};

struct RankedHit {
    std::string passage_id;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based

    bool operator==(const RankedHit&) const = default;
};

/// Drops word tokens past `max_tokens` and returns the kept tokens joined by
/// single spaces.
std::string truncate_query(std::string_view query, std::size_t max_tokens);

inline constexpr std::size_t kMaxQueryTokens = 512;

/// Top-k passages by BM25, score desc then ordinal asc. Only passages sharing
/// at least one query term are returned. Throws EmptyQuery when the query has
/// no word tokens and InvalidParam for k == 0.
std::vector<RankedHit> search(const Index& index, std::string_view query, std::size_t k);

/// Second-stage scorer contract: deterministic per (query, passage).
class RerankScorer {
public:
    virtual ~RerankScorer() = default;
    virtual std::string name() const = 0;
    virtual double score(std::string_view query, std::string_view passage) const = 0;
    /// Batch form; the default loops over score().
    virtual std::vector<double> score_batch(std::string_view query,
                                            std::span<const std::string_view> passages) const;
};

/// Cosine similarity of the binary term vectors of query and passage.
class LexicalOverlapScorer final : public RerankScorer {
public:
    std::string name() const override { return "lexical"; }
    double score(std::string_view query, std::string_view passage) const override;
};

/// Scores 1 for the passage text registered as gold for a query, else 0.
class OracleScorer final : public RerankScorer {
public:
    void add(std::string query, std::string gold_passage_text);
    std::string name() const override { return "oracle"; }
    double score(std::string_view query, std::string_view passage) const override;

private:
    std::map<std::string, std::string, std::less<>> gold_;
};

class FunctionScorer final : public RerankScorer {
public:
    using Fn = std::function<double(std::string_view, std::string_view)>;
    FunctionScorer(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
    std::string name() const override { return name_; }
    double score(std::string_view query, std::string_view passage) const override {
        return fn_(query, passage);
    }

private:
    std::string name_;
    Fn fn_;
};

/// Rescores `hits` and keeps the top m, ties broken by the prior rank. Ranks
/// are renumbered 1..m. A throwing scorer or a non-finite score raises
/// ScorerFailure naming the passage.
std::vector<RankedHit> rerank(const Index& index, std::span<const RankedHit> hits,
                              std::string_view query, const RerankScorer& scorer, std::size_t m);

struct EvalQuery {
    std::string query;
    std::string gold_passage_id;
};

/// Loads {"query","gold"} JSONL records.
std::vector<EvalQuery> load_eval_queries(const std::filesystem::path& path);

struct HitRateRow {
    std::string method;
    double top1 = 0.0;
    double top5 = 0.0;
    double top20 = 0.0;
    std::size_t queries = 0;
};

using HitRateTable = std::vector<HitRateRow>;

inline constexpr std::size_t kCandidatePool = 20;

/// Retrieves the top 20 per query, optionally reranks the whole pool, and
/// reports the fraction of queries whose gold passage is within each cutoff.
HitRateRow hit_rate_eval(const Index& index, std::span<const EvalQuery> queries,
                         const RerankScorer* scorer);

}  // namespace laysum
