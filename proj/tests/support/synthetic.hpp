#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "laysum/corpus.hpp"
#include "laysum/ppo.hpp"
#include "laysum/retrieval.hpp"

namespace laysum::testing {

/// Uniform double in [0, 1) with 53 random bits, identical on every platform.
double uniform01(std::mt19937_64& rng);
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Distinct pronounceable lowercase words.
std::vector<std::string> make_vocabulary(std::size_t count, std::mt19937_64& rng);

struct RetrievalSet {
    std::vector<Passage> passages;
    std::vector<EvalQuery> queries;
};

/// Topic-clustered passages. Each query is a sentence held out from its gold
/// passage; the passage text keeps the remaining sentences.
RetrievalSet make_retrieval_set(std::size_t passage_count, std::size_t query_count, std::uint64_t seed);

/// Random token list of length [min_len, max_len] over a small alphabet.
std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                                       std::size_t alphabet);

/// Five candidates with features in [0, 1]; candidate `optimum` dominates the
/// others on every feature.
CandidateSet make_dominant_bandit(std::mt19937_64& rng, std::size_t optimum, std::size_t candidates = 5);

/// Random surrogate-objective instance for gradient checks. Rollouts whose
/// ratio lies within 1e-3 of a clip boundary are redrawn so the objective is
/// smooth around theta.
struct PpoInstance {
    std::vector<CandidateSet> sets;
    std::vector<Rollout> batch;
    PolicyParams params;
    double clip_epsilon = 0.0;
};
PpoInstance make_ppo_instance(std::mt19937_64& rng, double clip_epsilon);

/// Central differences of surrogate_objective with step h.
std::vector<double> central_difference(const PpoInstance& inst, double h);

/// ||a - b|| / max(||b||, 1e-12).
double relative_error(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace laysum::testing
