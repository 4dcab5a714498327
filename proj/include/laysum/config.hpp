#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "laysum/pipeline.hpp"
#include "laysum/ppo.hpp"
#include "laysum/retrieval.hpp"

namespace laysum {

/// Everything a run can be configured with. Loaded from a TOML-style file:
/// `key = value` lines, `#` comments, optional `[section]` headers (sections
/// group keys for readability only; keys are globally unique).
struct AppConfig {
    PipelineConfig pipeline;
    PpoConfig ppo;
    Bm25Params bm25;
    bool length_target_set = false;  // false: derive from the training split when available

    /// Resolved settings as (key, value) pairs in a fixed order.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Recognized keys: target_fre, sigma, w_r, w_b, w_l, length_target,
/// length_sigma, mode, metric, query_source, retrieve_k, rerank_m, lead_k,
/// prompt_mode, k1, b, clip_epsilon, learning_rate, epochs_per_batch,
/// batch_size, iterations, baseline, seed. Unknown keys and malformed values
/// raise InvalidConfig naming the key. The result is validated.
AppConfig parse_config(std::string_view text, AppConfig base = {});
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

}  // namespace laysum
