#include "laysum/bridge.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "laysum/error.hpp"

namespace laysum {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<std::string> bridge_url_from_env() {
    const char* url = std::getenv(kBridgeUrlEnv);
    if (url == nullptr || *url == '\0') return std::nullopt;
    return std::string(url);
}

namespace wire {

namespace {

json parse_body(std::string_view body) {
    json obj = json::parse(body, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw Error(ErrorCode::BridgeProtocol, "", "response is not a JSON object");
    }
    return obj;
}

const json& field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        throw Error(ErrorCode::BridgeProtocol, name, "missing response field");
    }
    return *it;
}

}  // namespace

std::string encode_generate_request(std::string_view prompt) {
    return ordered_json{{"prompt", prompt}}.dump();
}

std::string decode_generate_response(std::string_view body) {
    const auto obj = parse_body(body);
    const auto& text = field(obj, "text");
    if (!text.is_string()) throw Error(ErrorCode::BridgeProtocol, "text", "expected a string");
    return text.get<std::string>();
}

std::string encode_score_request(std::string_view query, std::span<const std::string_view> passages) {
    ordered_json list = ordered_json::array();
    for (auto p : passages) list.push_back(p);
    return ordered_json{{"query", query}, {"passages", list}}.dump();
}

std::vector<double> decode_score_response(std::string_view body, std::size_t expected) {
    const auto obj = parse_body(body);
    const auto& scores = field(obj, "scores");
    if (!scores.is_array()) throw Error(ErrorCode::BridgeProtocol, "scores", "expected an array");
    if (scores.size() != expected) {
        throw Error(ErrorCode::BridgeProtocol, "scores",
                    "got " + std::to_string(scores.size()) + " scores for " + std::to_string(expected) +
                        " passages");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& s : scores) {
        if (!s.is_number()) throw Error(ErrorCode::BridgeProtocol, "scores", "expected numbers");
        out.push_back(s.get<double>());
    }
    return out;
}

std::string encode_relevance_request(std::string_view candidate, std::string_view reference,
                                     std::string_view metric) {
    ordered_json obj{{"candidate", candidate}, {"reference", reference}};
    if (!metric.empty()) obj["metric"] = metric;
    return obj.dump();
}

double decode_relevance_response(std::string_view body) {
    const auto obj = parse_body(body);
    const auto& score = field(obj, "score");
    if (!score.is_number()) throw Error(ErrorCode::BridgeProtocol, "score", "expected a number");
    const double v = score.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::BridgeProtocol, "score", "relevance outside [0, 1]");
    }
    return v;
}

Health decode_health_response(std::string_view body) {
    const auto obj = parse_body(body);
    const auto& status = field(obj, "status");
    if (!status.is_string()) throw Error(ErrorCode::BridgeProtocol, "status", "expected a string");
    Health h;
    h.status = status.get<std::string>();
    if (auto it = obj.find("mock"); it != obj.end() && it->is_boolean()) h.mock = it->get<bool>();
    return h;
}

}  // namespace wire

BridgeClient::BridgeClient(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

namespace {

void configure(httplib::Client& client, std::chrono::milliseconds timeout) {
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
}

[[noreturn]] void fail(const std::string& url, const char* path, const httplib::Result& res) {
    if (!res) {
        throw Error(ErrorCode::BridgeUnavailable, url + path, httplib::to_string(res.error()));
    }
    const auto code = res->status == 400 ? ErrorCode::BridgeProtocol : ErrorCode::BridgeUnavailable;
    throw Error(code, url + path, "HTTP " + std::to_string(res->status) + ": " + res->body);
}

}  // namespace

std::string BridgeClient::post(const char* path, const std::string& body) const {
    httplib::Client client(base_url_);
    configure(client, timeout_);
    auto res = client.Post(path, body, "application/json");
    if (!res || res->status != 200) fail(base_url_, path, res);
    return res->body;
}

wire::Health BridgeClient::health() const {
    httplib::Client client(base_url_);
    configure(client, timeout_);
    auto res = client.Get("/health");
    if (!res || res->status != 200) fail(base_url_, "/health", res);
    return wire::decode_health_response(res->body);
}

std::string BridgeClient::generate(std::string_view prompt) const {
    return wire::decode_generate_response(post("/generate", wire::encode_generate_request(prompt)));
}

std::vector<double> BridgeClient::score(std::string_view query,
                                        std::span<const std::string_view> passages) const {
    return wire::decode_score_response(post("/score", wire::encode_score_request(query, passages)),
                                       passages.size());
}

double BridgeClient::relevance(std::string_view candidate, std::string_view reference,
                               std::string_view metric) const {
    return wire::decode_relevance_response(
        post("/relevance", wire::encode_relevance_request(candidate, reference, metric)));
}

double BridgeScorer::score(std::string_view query, std::string_view passage) const {
    const std::string_view one[] = {passage};
    return client_.score(query, one).front();
}

std::vector<double> BridgeScorer::score_batch(std::string_view query,
                                              std::span<const std::string_view> passages) const {
    if (passages.empty()) return {};
    return client_.score(query, passages);
}

std::optional<double> BridgeMetrics::score(std::string_view metric, std::string_view candidate,
                                           std::string_view reference) const {
    try {
        return client_.relevance(candidate, reference, metric == "bertscore" ? std::string_view{} : metric);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace laysum
