#include "laysum/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "laysum/error.hpp"
#include "laysum/rouge.hpp"

namespace laysum {

std::string_view to_string(Baseline baseline) {
    return baseline == Baseline::None ? "none" : "running_mean";
}

std::optional<Baseline> parse_baseline(std::string_view name) {
    if (name == "none") return Baseline::None;
    if (name == "running_mean") return Baseline::RunningMean;
    return std::nullopt;
}

void CandidateSet::validate() const {
    if (candidates.size() < 2) {
        throw Error(ErrorCode::InvalidParam, doc_id, "a candidate set needs at least two candidates");
    }
    for (const auto& c : candidates) {
        for (double f : c.features) {
            if (!(f >= 0.0 && f <= 1.0)) {
                throw Error(ErrorCode::InvalidParam, doc_id, "candidate features must lie in [0, 1]");
            }
        }
    }
}

void PpoConfig::validate() const {
    if (!(clip_epsilon >= 0.0) || !std::isfinite(clip_epsilon)) {
        throw Error(ErrorCode::InvalidConfig, "clip_epsilon", "must be >= 0");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::InvalidConfig, "learning_rate", "must be > 0");
    }
    if (epochs_per_batch == 0) throw Error(ErrorCode::InvalidConfig, "epochs_per_batch", "must be >= 1");
    if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch_size", "must be >= 1");
}

std::vector<double> policy_distribution(const PolicyParams& params, const CandidateSet& set) {
    if (params.theta.size() != kFeatureCount) {
        throw Error(ErrorCode::DimMismatch, set.doc_id,
                    "theta has " + std::to_string(params.theta.size()) + " entries, expected " +
                        std::to_string(kFeatureCount));
    }
    if (set.candidates.empty()) {
        throw Error(ErrorCode::DimMismatch, set.doc_id, "empty candidate set");
    }
    std::vector<double> logits(set.candidates.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        double z = 0.0;
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            z += params.theta[k] * set.candidates[i].features[k];
        }
        logits[i] = z;
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - peak);
        total += z;
    }
    for (auto& z : logits) z /= total;
    return logits;
}

namespace {

double clipped_term(double ratio, double advantage, double eps) {
    if (eps == 0.0) {
        return ratio * advantage;
    }
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    return std::min(ratio * advantage, clipped * advantage);
}

}  // namespace

double ppo_ratio_objective(std::span<const std::vector<double>> new_probs,
                           std::span<const std::vector<double>> old_probs,
                           std::span<const std::size_t> actions, std::span<const double> rewards,
                           std::span<const double> baseline, double clip_epsilon) {
    const auto n = actions.size();
    if (new_probs.size() != n || old_probs.size() != n || rewards.size() != n || baseline.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "", "batch vectors must have equal length");
    }
    if (n == 0) {
        throw Error(ErrorCode::LengthMismatch, "", "empty batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = actions[i];
        if (a >= new_probs[i].size() || a >= old_probs[i].size()) {
            throw Error(ErrorCode::LengthMismatch, std::to_string(i), "action index out of range");
        }
        if (!(old_probs[i][a] > 0.0)) {
            throw Error(ErrorCode::ZeroOldProb, std::to_string(i));
        }
        const double ratio = new_probs[i][a] / old_probs[i][a];
        total += clipped_term(ratio, rewards[i] - baseline[i], clip_epsilon);
    }
    return total / static_cast<double>(n);
}

double surrogate_objective(const PolicyParams& params, std::span<const CandidateSet> sets,
                           std::span<const Rollout> batch, double clip_epsilon) {
    double total = 0.0;
    for (const auto& r : batch) {
        const auto probs = policy_distribution(params, sets[r.set_index]);
        total += clipped_term(probs[r.action] / r.old_prob, r.advantage, clip_epsilon);
    }
    return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

std::vector<double> surrogate_gradient(const PolicyParams& params, std::span<const CandidateSet> sets,
                                       std::span<const Rollout> batch, double clip_epsilon) {
    std::vector<double> grad(kFeatureCount, 0.0);
    for (const auto& r : batch) {
        const auto& set = sets[r.set_index];
        const auto probs = policy_distribution(params, set);
        const double ratio = probs[r.action] / r.old_prob;
        if (clip_epsilon > 0.0) {
            const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
            if (ratio * r.advantage > clipped * r.advantage) continue;  // clip is active
        }
        FeatureVector expected{};
        for (std::size_t j = 0; j < probs.size(); ++j) {
            for (std::size_t k = 0; k < kFeatureCount; ++k) {
                expected[k] += probs[j] * set.candidates[j].features[k];
            }
        }
        const auto& chosen = set.candidates[r.action].features;
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            grad[k] += r.advantage * ratio * (chosen[k] - expected[k]);
        }
    }
    if (!batch.empty()) {
        for (auto& g : grad) g /= static_cast<double>(batch.size());
    }
    return grad;
}

RewardFn feature_reward(const RewardConfig& cfg) {
    return [cfg](const CandidateSet& set, std::size_t action) {
        const auto& f = set.candidates[action].features;
        return combine_components(f[0], f[1], f[2], cfg).total;
    };
}

std::string TrainTrace::to_csv() const {
    std::string out = "iteration,mean_reward,objective\n";
    char line[96];
    for (const auto& row : rows) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", row.iteration, row.mean_reward,
                      row.objective);
        out += line;
    }
    return out;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(std::span<const double> probs, double u) {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    return probs.size() - 1;
}

}  // namespace

TrainResult train(std::span<const CandidateSet> sets, const RewardFn& reward, const PpoConfig& cfg,
                  PolicyParams init) {
    cfg.validate();
    if (sets.empty()) {
        throw Error(ErrorCode::EmptyCollection, "", "no candidate sets to train on");
    }
    for (const auto& s : sets) s.validate();

    TrainResult result;
    result.params = std::move(init);
    std::mt19937_64 rng(cfg.seed);
    double reward_sum = 0.0;
    std::size_t reward_count = 0;

    std::vector<Rollout> batch(cfg.batch_size);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        double batch_reward = 0.0;
        for (auto& r : batch) {
            r.set_index = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(sets.size()));
            r.set_index = std::min(r.set_index, sets.size() - 1);
            const auto probs = policy_distribution(result.params, sets[r.set_index]);
            r.action = sample_index(probs, unit_uniform(rng));
            r.old_prob = probs[r.action];
            r.reward = reward(sets[r.set_index], r.action);
            batch_reward += r.reward;
        }
        reward_sum += batch_reward;
        reward_count += batch.size();
        const double baseline =
            cfg.baseline == Baseline::RunningMean ? reward_sum / static_cast<double>(reward_count) : 0.0;
        for (auto& r : batch) r.advantage = r.reward - baseline;

        for (std::size_t epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
            const auto grad = surrogate_gradient(result.params, sets, batch, cfg.clip_epsilon);
            for (std::size_t k = 0; k < kFeatureCount; ++k) {
                result.params.theta[k] += cfg.learning_rate * grad[k];
            }
        }

        result.trace.rows.push_back({it, batch_reward / static_cast<double>(batch.size()),
                                     surrogate_objective(result.params, sets, batch, cfg.clip_epsilon)});
    }
    return result;
}

CandidateSet build_candidate_set(std::string doc_id, std::span<const std::string> texts,
                                 std::string_view reference, std::span<const std::string> keyphrases,
                                 const RewardConfig& cfg, const FamiliarWords& familiar) {
    CandidateSet set;
    set.doc_id = std::move(doc_id);
    const auto ref_tokens = tokenize_words(reference);
    for (const auto& text : texts) {
        const auto stats = compute_stats(text, familiar);
        const double readability = cfg.metric == ReadabilityMetric::Fre ? flesch_reading_ease(stats)
                                                                        : flesch_kincaid_grade(stats);
        double relevance = 0.0;
        if (!ref_tokens.empty()) {
            relevance = rouge_l(tokenize_words(text), ref_tokens).f1;
        } else {
            relevance = keyphrase_coverage(text, keyphrases);
        }
        set.candidates.push_back(
            {text, {readability_component(readability, cfg), relevance, length_score(stats.word_count, cfg)}});
    }
    set.validate();
    return set;
}

std::vector<CandidateSet> load_candidate_sets(const std::filesystem::path& path,
                                              const RewardConfig& cfg, const FamiliarWords& familiar) {
    using nlohmann::json;
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, path.string(), "cannot open for reading");
    }
    std::vector<CandidateSet> sets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        const json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) throw Error(ErrorCode::MalformedJson, "", where);
        if (!obj.contains("doc_id") || !obj["doc_id"].is_string()) {
            throw Error(ErrorCode::MissingField, "doc_id", where);
        }
        if (!obj.contains("candidates") || !obj["candidates"].is_array()) {
            throw Error(ErrorCode::MissingField, "candidates", where);
        }
        const auto& cands = obj["candidates"];
        const auto doc_id = obj["doc_id"].get<std::string>();
        try {
            if (!cands.empty() && cands.front().is_string()) {
                std::vector<std::string> texts;
                for (const auto& c : cands) {
                    if (!c.is_string()) throw Error(ErrorCode::InvalidField, "candidates", "mixed candidate kinds");
                    texts.push_back(c.get<std::string>());
                }
                const std::string reference = obj.value("reference", std::string{});
                const auto keyphrases = obj.value("keyphrases", std::vector<std::string>{});
                sets.push_back(build_candidate_set(doc_id, texts, reference, keyphrases, cfg, familiar));
            } else {
                CandidateSet set;
                set.doc_id = doc_id;
                for (const auto& c : cands) {
                    if (!c.is_object() || !c.contains("features") || !c["features"].is_array() ||
                        c["features"].size() != kFeatureCount) {
                        throw Error(ErrorCode::InvalidField, "candidates",
                                    "expected {\"text\", \"features\": [3 numbers]}");
                    }
                    Candidate cand;
                    cand.text = c.value("text", std::string{});
                    for (std::size_t k = 0; k < kFeatureCount; ++k) {
                        if (!c["features"][k].is_number()) {
                            throw Error(ErrorCode::InvalidField, "features", "expected numbers");
                        }
                        cand.features[k] = c["features"][k].get<double>();
                    }
                    set.candidates.push_back(std::move(cand));
                }
                set.validate();
                sets.push_back(std::move(set));
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidField, "", where + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), e.detail(), where + ": " + e.what());
        }
    }
    return sets;
}

}  // namespace laysum
