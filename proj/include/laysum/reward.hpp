#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace laysum {

enum class RewardMode {
    Eq2Literal,          // 1 - exp(-d^2 / 2 sigma^2): zero at the target
    GaussianNormalized,  // exp(-d^2 / 2 sigma^2): one at the target
};

/// Which readability score is compared against the target.
enum class ReadabilityMetric { Fre, Fkgl };

std::string_view to_string(RewardMode mode);
std::optional<RewardMode> parse_reward_mode(std::string_view name);
std::string_view to_string(ReadabilityMetric metric);
std::optional<ReadabilityMetric> parse_readability_metric(std::string_view name);

struct RewardConfig {
    double target_readability = 60.0;
    double sigma = 10.0;
    double w_r = 0.5;
    double w_b = 0.3;
    double w_l = 0.2;
    double length_target = 200.0;
    double length_sigma = 0.25;
    RewardMode mode = RewardMode::GaussianNormalized;
    ReadabilityMetric metric = ReadabilityMetric::Fre;

    /// Throws InvalidConfig unless weights are non-negative and sum to 1
    /// (within 1e-9), NonPositiveSigma unless both sigmas are > 0, and
    /// InvalidConfig unless length_target > 0.
    void validate() const;
};

/// Normal density with the given mean and standard deviation.
double gaussian_pdf(double value, double mean, double sigma);

double eq2_reward(double readability, const RewardConfig& cfg);
/// gaussian_pdf normalized by its peak: 1 at the target.
double normalized_readability(double readability, const RewardConfig& cfg);
/// The readability component selected by cfg.mode.
double readability_component(double readability, const RewardConfig& cfg);
/// Gaussian over the ratio word_count / length_target, peak 1 at the target.
double length_score(std::size_t word_count, const RewardConfig& cfg);

struct RewardBreakdown {
    double readability_component = 0.0;
    double relevance_component = 0.0;
    double length_component = 0.0;
    double total = 0.0;
};

/// Weighted sum of already-normalized components, each in [0, 1].
RewardBreakdown combine_components(double readability, double relevance, double length,
                                   const RewardConfig& cfg);

/// Full composite: readability score, relevance in [0, 1] and summary length.
/// Throws RelevanceOutOfRange.
RewardBreakdown composite_reward(double readability, double relevance, std::size_t word_count,
                                 const RewardConfig& cfg);

/// Fraction of keyphrases whose token sequence occurs in `text`; 0 when
/// there are no keyphrases. Used as the relevance proxy without a reference.
double keyphrase_coverage(std::string_view text, std::span<const std::string> keyphrases);

}  // namespace laysum
