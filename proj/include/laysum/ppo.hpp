#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laysum/reward.hpp"
#include "laysum/textstats.hpp"

namespace laysum {

// Candidate features: [readability component, relevance, length score].
inline constexpr std::size_t kFeatureCount = 3;
using FeatureVector = std::array<double, kFeatureCount>;

struct Candidate {
    std::string text;
    FeatureVector features{};
};

/// Pre-generated summary variants for one document; the policy picks one.
struct CandidateSet {
    std::string doc_id;
    std::vector<Candidate> candidates;

    /// At least two candidates, every feature finite and in [0, 1].
    void validate() const;
};

struct PolicyParams {
    std::vector<double> theta = std::vector<double>(kFeatureCount, 0.0);
};

enum class Baseline { None, RunningMean };

std::string_view to_string(Baseline baseline);
std::optional<Baseline> parse_baseline(std::string_view name);

struct PpoConfig {
    double clip_epsilon = 0.2;  // 0 disables clipping
    double learning_rate = 0.5;
    std::size_t epochs_per_batch = 4;
    std::size_t batch_size = 16;
    std::size_t iterations = 500;
    Baseline baseline = Baseline::RunningMean;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Softmax over theta . features. Throws DimMismatch.
std::vector<double> policy_distribution(const PolicyParams& params, const CandidateSet& set);

/// Mean over samples of ratio * A (clip_epsilon == 0) or
/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A), where
/// ratio = new_probs[i][actions[i]] / old_probs[i][actions[i]] and
/// A = rewards[i] - baseline[i].
double ppo_ratio_objective(std::span<const std::vector<double>> new_probs,
                           std::span<const std::vector<double>> old_probs,
                           std::span<const std::size_t> actions, std::span<const double> rewards,
                           std::span<const double> baseline, double clip_epsilon);

/// One sampled action under the behaviour policy.
struct Rollout {
    std::size_t set_index = 0;
    std::size_t action = 0;
    double old_prob = 0.0;
    double reward = 0.0;
    double advantage = 0.0;
};

/// Surrogate objective of a fixed rollout batch as a function of theta.
double surrogate_objective(const PolicyParams& params, std::span<const CandidateSet> sets,
                           std::span<const Rollout> batch, double clip_epsilon);

/// Analytic gradient of surrogate_objective with respect to theta, using
/// d ratio = ratio * (f_a - E_p[f]). Terms held by the clip contribute zero.
std::vector<double> surrogate_gradient(const PolicyParams& params, std::span<const CandidateSet> sets,
                                       std::span<const Rollout> batch, double clip_epsilon);

using RewardFn = std::function<double(const CandidateSet&, std::size_t action)>;

/// Reward = weighted sum of a candidate's precomputed feature components.
RewardFn feature_reward(const RewardConfig& cfg);

struct TraceRow {
    std::size_t iteration = 0;
    double mean_reward = 0.0;
    double objective = 0.0;

    bool operator==(const TraceRow&) const = default;
};

struct TrainTrace {
    std::vector<TraceRow> rows;

    /// "iteration,mean_reward,objective" header, values with 17 significant digits.
    std::string to_csv() const;
};

struct TrainResult {
    PolicyParams params;
    TrainTrace trace;
};

/// Each iteration samples batch_size sets uniformly, draws one action per set
/// from the current policy, scores it with `reward`, then takes
/// epochs_per_batch gradient-ascent steps on the surrogate. Deterministic for
/// a given seed.
TrainResult train(std::span<const CandidateSet> sets, const RewardFn& reward, const PpoConfig& cfg,
                  PolicyParams init = {});

/// Computes candidate features from text. Relevance is ROUGE-L F1 against
/// `reference` when it is nonempty, otherwise keyphrase coverage.
CandidateSet build_candidate_set(std::string doc_id, std::span<const std::string> texts,
                                 std::string_view reference, std::span<const std::string> keyphrases,
                                 const RewardConfig& cfg, const FamiliarWords& familiar);

/// JSONL, one set per line. Candidates are either objects
/// {"text", "features": [r, b, l]} or plain strings, in which case features
/// are derived from the record's "reference" / "keyphrases".
std::vector<CandidateSet> load_candidate_sets(const std::filesystem::path& path,
                                              const RewardConfig& cfg, const FamiliarWords& familiar);

}  // namespace laysum
