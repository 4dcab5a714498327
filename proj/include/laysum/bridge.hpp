#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laysum/pipeline.hpp"
#include "laysum/retrieval.hpp"

namespace laysum {

inline constexpr const char* kBridgeUrlEnv = "LAYSUM_BRIDGE_URL";

/// Value of LAYSUM_BRIDGE_URL, or nullopt (offline mode) when unset/empty.
std::optional<std::string> bridge_url_from_env();

// JSON-over-HTTP wire format shared with the model bridge. Encoders produce
// the exact request bytes; decoders validate the response shape and raise
// BridgeProtocol on violations.
namespace wire {

std::string encode_generate_request(std::string_view prompt);
std::string decode_generate_response(std::string_view body);

std::string encode_score_request(std::string_view query, std::span<const std::string_view> passages);
std::vector<double> decode_score_response(std::string_view body, std::size_t expected);

/// `metric` is omitted from the body when empty (the default, BERTScore-style
/// relevance).
std::string encode_relevance_request(std::string_view candidate, std::string_view reference,
                                     std::string_view metric = {});
double decode_relevance_response(std::string_view body);

struct Health {
    std::string status;
    bool mock = false;
};
Health decode_health_response(std::string_view body);

}  // namespace wire

/// Blocking client for one bridge base URL ("http://host:port"). A fresh
/// connection is opened per call, so one instance may be shared by threads.
class BridgeClient {
public:
    explicit BridgeClient(std::string base_url,
                          std::chrono::milliseconds timeout = std::chrono::seconds(60));

    const std::string& base_url() const { return base_url_; }

    wire::Health health() const;
    std::string generate(std::string_view prompt) const;
    std::vector<double> score(std::string_view query, std::span<const std::string_view> passages) const;
    double relevance(std::string_view candidate, std::string_view reference,
                     std::string_view metric = {}) const;

private:
    std::string post(const char* path, const std::string& body) const;

    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

class BridgeGenerator final : public GeneratorClient {
public:
    explicit BridgeGenerator(const BridgeClient& client) : client_(client) {}
    std::string name() const override { return "bridge"; }
    std::string generate(const std::string& prompt) const override { return client_.generate(prompt); }

private:
    const BridgeClient& client_;
};

/// Scores a whole candidate pool with one /score call.
class BridgeScorer final : public RerankScorer {
public:
    explicit BridgeScorer(const BridgeClient& client) : client_(client) {}
    std::string name() const override { return "bridge"; }
    double score(std::string_view query, std::string_view passage) const override;
    std::vector<double> score_batch(std::string_view query,
                                    std::span<const std::string_view> passages) const override;

private:
    const BridgeClient& client_;
};

/// Learned metrics through /relevance. "bertscore" is sent without a metric
/// field; other metrics name themselves. Failures map to nullopt.
class BridgeMetrics final : public MetricService {
public:
    explicit BridgeMetrics(const BridgeClient& client) : client_(client) {}
    std::optional<double> score(std::string_view metric, std::string_view candidate,
                                std::string_view reference) const override;

private:
    const BridgeClient& client_;
};

}  // namespace laysum
