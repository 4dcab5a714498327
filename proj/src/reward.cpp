#include "laysum/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "laysum/error.hpp"
#include "laysum/textstats.hpp"

namespace laysum {

std::string_view to_string(RewardMode mode) {
    return mode == RewardMode::Eq2Literal ? "eq2_literal" : "gaussian_normalized";
}

std::optional<RewardMode> parse_reward_mode(std::string_view name) {
    if (name == "eq2_literal") return RewardMode::Eq2Literal;
    if (name == "gaussian_normalized") return RewardMode::GaussianNormalized;
    return std::nullopt;
}

std::string_view to_string(ReadabilityMetric metric) {
    return metric == ReadabilityMetric::Fre ? "fre" : "fkgl";
}

std::optional<ReadabilityMetric> parse_readability_metric(std::string_view name) {
    if (name == "fre") return ReadabilityMetric::Fre;
    if (name == "fkgl") return ReadabilityMetric::Fkgl;
    return std::nullopt;
}

void RewardConfig::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::NonPositiveSigma, "sigma");
    }
    if (!(length_sigma > 0.0) || !std::isfinite(length_sigma)) {
        throw Error(ErrorCode::NonPositiveSigma, "length_sigma");
    }
    if (!(length_target > 0.0) || !std::isfinite(length_target)) {
        throw Error(ErrorCode::InvalidConfig, "length_target", "must be > 0");
    }
    if (!std::isfinite(target_readability)) {
        throw Error(ErrorCode::InvalidConfig, "target_fre", "must be finite");
    }
    for (double w : {w_r, w_b, w_l}) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::InvalidConfig, "weights", "must be non-negative");
        }
    }
    if (std::abs(w_r + w_b + w_l - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidConfig, "weights", "w_r + w_b + w_l must equal 1");
    }
}

double gaussian_pdf(double value, double mean, double sigma) {
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::NonPositiveSigma, "sigma");
    }
    const double z = (value - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

namespace {

double deviation_kernel(double readability, const RewardConfig& cfg) {
    const double d = readability - cfg.target_readability;
    return std::exp(-(d * d) / (2.0 * cfg.sigma * cfg.sigma));
}

}  // namespace

double eq2_reward(double readability, const RewardConfig& cfg) {
    return 1.0 - deviation_kernel(readability, cfg);
}

double normalized_readability(double readability, const RewardConfig& cfg) {
    return deviation_kernel(readability, cfg);
}

double readability_component(double readability, const RewardConfig& cfg) {
    return cfg.mode == RewardMode::Eq2Literal ? eq2_reward(readability, cfg)
                                              : normalized_readability(readability, cfg);
}

double length_score(std::size_t word_count, const RewardConfig& cfg) {
    const double ratio = static_cast<double>(word_count) / cfg.length_target - 1.0;
    return std::exp(-(ratio * ratio) / (2.0 * cfg.length_sigma * cfg.length_sigma));
}

RewardBreakdown combine_components(double readability, double relevance, double length,
                                   const RewardConfig& cfg) {
    RewardBreakdown b;
    b.readability_component = readability;
    b.relevance_component = relevance;
    b.length_component = length;
    b.total = cfg.w_r * readability + cfg.w_b * relevance + cfg.w_l * length;
    return b;
}

RewardBreakdown composite_reward(double readability, double relevance, std::size_t word_count,
                                 const RewardConfig& cfg) {
    if (!(relevance >= 0.0 && relevance <= 1.0)) {
        throw Error(ErrorCode::RelevanceOutOfRange, std::to_string(relevance));
    }
    return combine_components(readability_component(readability, cfg), relevance,
                              length_score(word_count, cfg), cfg);
}

double keyphrase_coverage(std::string_view text, std::span<const std::string> keyphrases) {
    std::size_t usable = 0;
    std::size_t present = 0;
    const auto tokens = tokenize_words(text);
    for (const auto& phrase : keyphrases) {
        const auto needle = tokenize_words(phrase);
        if (needle.empty()) continue;
        ++usable;
        if (std::search(tokens.begin(), tokens.end(), needle.begin(), needle.end()) != tokens.end()) {
            ++present;
        }
    }
    return usable == 0 ? 0.0 : static_cast<double>(present) / static_cast<double>(usable);
}

}  // namespace laysum
