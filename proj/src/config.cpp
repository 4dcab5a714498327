#include "laysum/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "laysum/error.hpp"

namespace laysum {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw Error(ErrorCode::InvalidConfig, std::string(key),
                "value '" + std::string(value) + "' is not " + std::string(expected));
}

double as_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a number");
    return out;
}

std::uint64_t as_uint(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
    return out;
}

template <typename E>
E as_enum(std::string_view key, std::string_view v, std::optional<E> (*parse)(std::string_view)) {
    auto e = parse(v);
    if (!e) bad_value(key, v, "a recognized option");
    return *e;
}

// Shortest representation that round-trips.
std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

}  // namespace

AppConfig parse_config(std::string_view text, AppConfig cfg) {
    using Setter = std::function<void(std::string_view key, std::string_view value)>;
    auto& rw = cfg.pipeline.reward;
    auto& pl = cfg.pipeline;
    auto& ppo = cfg.ppo;
    const std::map<std::string, Setter, std::less<>> setters = {
        {"target_fre", [&](auto k, auto v) { rw.target_readability = as_double(k, v); }},
        {"sigma", [&](auto k, auto v) { rw.sigma = as_double(k, v); }},
        {"w_r", [&](auto k, auto v) { rw.w_r = as_double(k, v); }},
        {"w_b", [&](auto k, auto v) { rw.w_b = as_double(k, v); }},
        {"w_l", [&](auto k, auto v) { rw.w_l = as_double(k, v); }},
        {"length_target", [&](auto k, auto v) {
             rw.length_target = as_double(k, v);
             cfg.length_target_set = true;
         }},
        {"length_sigma", [&](auto k, auto v) { rw.length_sigma = as_double(k, v); }},
        {"mode", [&](auto k, auto v) { rw.mode = as_enum(k, v, parse_reward_mode); }},
        {"metric", [&](auto k, auto v) { rw.metric = as_enum(k, v, parse_readability_metric); }},
        {"query_source", [&](auto k, auto v) { pl.query_source = as_enum(k, v, parse_query_source); }},
        {"retrieve_k", [&](auto k, auto v) { pl.retrieve_k = as_uint(k, v); }},
        {"rerank_m", [&](auto k, auto v) { pl.rerank_m = as_uint(k, v); }},
        {"lead_k", [&](auto k, auto v) { pl.lead_k = as_uint(k, v); }},
        {"prompt_mode", [&](auto k, auto v) { pl.prompt_mode = as_enum(k, v, parse_prompt_mode); }},
        {"k1", [&](auto k, auto v) { cfg.bm25.k1 = as_double(k, v); }},
        {"b", [&](auto k, auto v) { cfg.bm25.b = as_double(k, v); }},
        {"clip_epsilon", [&](auto k, auto v) { ppo.clip_epsilon = as_double(k, v); }},
        {"learning_rate", [&](auto k, auto v) { ppo.learning_rate = as_double(k, v); }},
        {"epochs_per_batch", [&](auto k, auto v) { ppo.epochs_per_batch = as_uint(k, v); }},
        {"batch_size", [&](auto k, auto v) { ppo.batch_size = as_uint(k, v); }},
        {"iterations", [&](auto k, auto v) { ppo.iterations = as_uint(k, v); }},
        {"baseline", [&](auto k, auto v) { ppo.baseline = as_enum(k, v, parse_baseline); }},
        {"seed", [&](auto k, auto v) { ppo.seed = as_uint(k, v); }},
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(ErrorCode::InvalidConfig, "", "line " + std::to_string(line_no) + ": bad section header");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidConfig, "", "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw Error(ErrorCode::InvalidConfig, std::string(key), "unknown key");
        }
        it->second(key, value);
    }

    cfg.pipeline.validate();
    cfg.ppo.validate();
    if (!(cfg.bm25.k1 > 0.0)) throw Error(ErrorCode::InvalidConfig, "k1", "must be > 0");
    if (!(cfg.bm25.b >= 0.0 && cfg.bm25.b <= 1.0)) throw Error(ErrorCode::InvalidConfig, "b", "must be in [0, 1]");
    return cfg;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, path.string(), "cannot open config");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), std::move(base));
}

std::vector<std::pair<std::string, std::string>> AppConfig::echo() const {
    const auto& rw = pipeline.reward;
    return {
        {"target_fre", fmt_double(rw.target_readability)},
        {"sigma", fmt_double(rw.sigma)},
        {"w_r", fmt_double(rw.w_r)},
        {"w_b", fmt_double(rw.w_b)},
        {"w_l", fmt_double(rw.w_l)},
        {"length_target", fmt_double(rw.length_target)},
        {"length_sigma", fmt_double(rw.length_sigma)},
        {"mode", std::string(to_string(rw.mode))},
        {"metric", std::string(to_string(rw.metric))},
        {"query_source", std::string(to_string(pipeline.query_source))},
        {"retrieve_k", std::to_string(pipeline.retrieve_k)},
        {"rerank_m", std::to_string(pipeline.rerank_m)},
        {"lead_k", std::to_string(pipeline.lead_k)},
        {"prompt_mode", std::string(to_string(pipeline.prompt_mode))},
        {"k1", fmt_double(bm25.k1)},
        {"b", fmt_double(bm25.b)},
        {"clip_epsilon", fmt_double(ppo.clip_epsilon)},
        {"learning_rate", fmt_double(ppo.learning_rate)},
        {"epochs_per_batch", std::to_string(ppo.epochs_per_batch)},
        {"batch_size", std::to_string(ppo.batch_size)},
        {"iterations", std::to_string(ppo.iterations)},
        {"baseline", std::string(to_string(ppo.baseline))},
        {"seed", std::to_string(ppo.seed)},
    };
}

}  // namespace laysum
