#include "laysum/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "laysum/bridge.hpp"
#include "laysum/config.hpp"
#include "laysum/corpus.hpp"
#include "laysum/error.hpp"
#include "laysum/pipeline.hpp"
#include "laysum/ppo.hpp"
#include "laysum/retrieval.hpp"
#include "laysum/reward.hpp"
#include "laysum/rouge.hpp"
#include "laysum/textstats.hpp"

namespace laysum::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

UsageError::UsageError(UsageErrorKind kind, const std::string& message, std::string help)
    : std::runtime_error(message), kind_(kind), help_(std::move(help)) {}

namespace {

struct FlagSpec {
    const char* name;
    bool takes_value;
    bool required;
    const char* help;
};

struct SubcommandSpec {
    const char* name;
    const char* help;
    std::vector<FlagSpec> flags;
};

const std::vector<SubcommandSpec>& specs() {
    static const std::vector<SubcommandSpec> all = {
        {"ingest", "Validate a document corpus and/or passage collection",
         {{"corpus", true, false, "Document JSONL"}, {"passages", true, false, "Passage JSONL"}}},
        {"index", "Build a BM25 index from a passage collection",
         {{"passages", true, true, "Passage JSONL"},
          {"out", true, true, "Output index file"},
          {"k1", true, false, "BM25 k1"},
          {"b", true, false, "BM25 b"}}},
        {"retrieve", "Search an index and optionally rerank the hits",
         {{"index", true, true, "Index file"},
          {"query", true, true, "Query text"},
          {"topk", true, false, "Passages to retrieve (default 20)"},
          {"rerank", true, false, "Passages to keep after reranking"},
          {"scorer", true, false, "lexical or bridge"}}},
        {"readability", "Readability scores of a text file", {{"text", true, true, "Text file"}}},
        {"rouge", "ROUGE-1/2/L of a hypothesis against a reference",
         {{"hyp", true, true, "Hypothesis text file"}, {"ref", true, true, "Reference text file"}}},
        {"reward", "Reward components for a readability score",
         {{"fre", true, false, "Flesch Reading Ease value"},
          {"fkgl", true, false, "Flesch-Kincaid grade value"},
          {"text", true, false, "Score this text file instead"},
          {"relevance", true, false, "Relevance in [0, 1]"},
          {"words", true, false, "Summary word count"},
          {"mode", true, false, "eq2_literal or gaussian_normalized"}}},
        {"ppo-train", "Train the candidate-selection policy",
         {{"candidates", true, true, "Candidate-set JSONL"},
          {"seed", true, false, "RNG seed"},
          {"iterations", true, false, "Training iterations"},
          {"epsilon", true, false, "Clip epsilon (0 disables clipping)"},
          {"trace", true, false, "Write the training trace CSV here"}}},
        {"run", "Run the retrieval-augmented pipeline over a corpus",
         {{"corpus", true, true, "Document JSONL"},
          {"index", true, true, "Index file"},
          {"out", true, true, "Output directory"},
          {"jobs", true, false, "Worker threads"},
          {"split", true, false, "Only documents of this split"},
          {"generator", true, false, "none, mock or bridge"},
          {"scorer", true, false, "lexical or bridge"},
          {"prompt-mode", true, false, "none, paraphrase or summarize_with_keyphrases"}}},
        {"evaluate", "Score predictions against references",
         {{"pairs", true, true, "Prediction/reference JSONL"},
          {"jobs", true, false, "Worker threads"},
          {"method", true, false, "Row label in the Markdown report"},
          {"out", true, false, "Also write report.md and report.json here"}}},
        {"hit-rate", "Top-1/5/20 hit rates of BM25 and rerankers",
         {{"index", true, true, "Index file"},
          {"eval", true, true, "Query/gold JSONL"},
          {"rerankers", true, false, "Comma-separated: lexical, oracle, bridge (default lexical,oracle)"}}},
    };
    return all;
}

const std::vector<FlagSpec>& common_flags() {
    static const std::vector<FlagSpec> all = {
        {"json", false, false, "Machine-readable output"},
        {"config", true, false, "TOML-style config file"},
        {"familiar", true, false, "Dale-Chall familiar-word list"},
    };
    return all;
}

const SubcommandSpec* find_spec(std::string_view name) {
    for (const auto& s : specs()) {
        if (name == s.name) return &s;
    }
    return nullptr;
}

std::string top_help() {
    std::ostringstream os;
    os << "usage: laysum <subcommand> [flags]\n\nsubcommands:\n";
    for (const auto& s : specs()) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-12s %s\n", s.name, s.help);
        os << line;
    }
    return os.str();
}

// ---- flag access -----------------------------------------------------------

class Flags {
public:
    explicit Flags(const CliInvocation& inv) : inv_(inv) {}

    bool has(const std::string& name) const { return inv_.flags.count(name) > 0; }
    bool flag(const std::string& name) const { return has(name); }

    const std::string& str(const std::string& name) const { return inv_.flags.at(name); }
    std::string str(const std::string& name, std::string fallback) const {
        return has(name) ? str(name) : std::move(fallback);
    }

    double number(const std::string& name) const {
        const auto& v = str(name);
        double out = 0.0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) bad(name, v, "a number");
        return out;
    }

    std::uint64_t count(const std::string& name) const {
        const auto& v = str(name);
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) bad(name, v, "a non-negative integer");
        return out;
    }

    std::uint64_t count(const std::string& name, std::uint64_t fallback) const {
        return has(name) ? count(name) : fallback;
    }

    [[noreturn]] void bad(const std::string& name, const std::string& value, const char* expected) const {
        throw UsageError(UsageErrorKind::BadValue,
                         "--" + name + ": '" + value + "' is not " + expected, "");
    }

private:
    const CliInvocation& inv_;
};

// ---- helpers ---------------------------------------------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, path.string(), "cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, path.string(), "cannot write file");
    out << content;
    if (!out) throw Error(ErrorCode::Io, path.string(), "write failed");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

ordered_json prf_json(const PrfScore& s) {
    return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

ordered_json hits_json(const std::vector<RankedHit>& hits) {
    ordered_json arr = ordered_json::array();
    for (const auto& h : hits) arr.push_back({{"rank", h.rank}, {"passage_id", h.passage_id}, {"score", h.score}});
    return arr;
}

struct Context {
    const CliInvocation& inv;
    Flags flags;
    std::ostream& out;
    std::ostream& err;
    AppConfig config;
    std::optional<std::string> bridge_url;
    std::unique_ptr<BridgeClient> bridge;

    bool json() const { return flags.flag("json"); }

    const FamiliarWords& familiar() {
        if (!familiar_) {
            const fs::path path = flags.str("familiar", std::string(LAYSUM_RESOURCE_DIR) + "/dale_chall_familiar.txt");
            familiar_ = FamiliarWords::load(path);
        }
        return *familiar_;
    }

    const BridgeClient& require_bridge(const char* what) {
        if (!bridge) {
            throw Error(ErrorCode::BridgeUnavailable, what,
                        std::string("requires ") + kBridgeUrlEnv + " to name a running model bridge");
        }
        return *bridge;
    }

    void echo_config() const {
        err << "laysum " << inv.subcommand << ":";
        for (const auto& [k, v] : config.echo()) err << ' ' << k << '=' << v;
        err << " bridge=" << (bridge_url ? *bridge_url : std::string("offline")) << '\n';
    }

    void emit(const ordered_json& j) const { out << j.dump(2) << '\n'; }

    std::optional<FamiliarWords> familiar_;
};

// Reranker selection shared by retrieve and run.
std::unique_ptr<RerankScorer> make_scorer(Context& ctx, const std::string& name) {
    if (name == "lexical") return std::make_unique<LexicalOverlapScorer>();
    if (name == "bridge") return std::make_unique<BridgeScorer>(ctx.require_bridge("scorer"));
    ctx.flags.bad("scorer", name, "one of lexical, bridge");
}

// ---- subcommands -----------------------------------------------------------

int cmd_ingest(Context& ctx) {
    if (!ctx.flags.has("corpus") && !ctx.flags.has("passages")) {
        throw UsageError(UsageErrorKind::MissingRequiredFlag, "ingest: one of --corpus or --passages is required", "");
    }
    ctx.echo_config();
    ordered_json j = ordered_json::object();
    if (ctx.flags.has("corpus")) {
        const auto& path = ctx.flags.str("corpus");
        const auto corpus = load_corpus(path);
        const auto mean = mean_train_summary_length(corpus);
        j["corpus"] = {
            {"path", path},
            {"documents", corpus.size()},
            {"splits",
             {{"train", corpus.count(Split::Train)},
              {"validation", corpus.count(Split::Validation)},
              {"test", corpus.count(Split::Test)}}},
            {"mean_train_summary_words", mean ? ordered_json(*mean) : ordered_json(nullptr)},
        };
        if (!ctx.json()) {
            ctx.out << "corpus " << path << ": " << corpus.size() << " documents (train "
                    << corpus.count(Split::Train) << ", validation " << corpus.count(Split::Validation)
                    << ", test " << corpus.count(Split::Test) << ")\n";
        }
    }
    if (ctx.flags.has("passages")) {
        const auto& path = ctx.flags.str("passages");
        const auto passages = load_passages(path);
        std::vector<std::string> ids;
        ids.reserve(passages.size());
        for (const auto& p : passages) ids.push_back(p.id);
        std::sort(ids.begin(), ids.end());
        if (auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
            throw Error(ErrorCode::DuplicateId, *dup, "passage id appears more than once");
        }
        j["passages"] = {{"path", path}, {"count", passages.size()}};
        if (!ctx.json()) ctx.out << "passages " << path << ": " << passages.size() << " passages\n";
    }
    if (ctx.json()) ctx.emit(j);
    return kExitOk;
}

int cmd_index(Context& ctx) {
    if (ctx.flags.has("k1")) ctx.config.bm25.k1 = ctx.flags.number("k1");
    if (ctx.flags.has("b")) ctx.config.bm25.b = ctx.flags.number("b");
    ctx.echo_config();
    const auto passages = load_passages(ctx.flags.str("passages"));
    const auto index = Index::build(passages, ctx.config.bm25);
    const auto& out_path = ctx.flags.str("out");
    index.save(out_path);
    if (ctx.json()) {
        ctx.emit({{"out", out_path},
                  {"passages", index.size()},
                  {"terms", index.postings().size()},
                  {"avg_doc_length", index.avg_doc_length()},
                  {"k1", index.params().k1},
                  {"b", index.params().b}});
    } else {
        ctx.out << "indexed " << index.size() << " passages, " << index.postings().size() << " terms -> "
                << out_path << '\n';
    }
    return kExitOk;
}

int cmd_retrieve(Context& ctx) {
    ctx.echo_config();
    const auto index = Index::load(ctx.flags.str("index"));
    const auto query = truncate_query(ctx.flags.str("query"), ctx.config.pipeline.max_query_tokens);
    const auto topk = ctx.flags.count("topk", ctx.config.pipeline.retrieve_k);
    const auto hits = search(index, query, topk);
    std::optional<std::vector<RankedHit>> reranked;
    if (ctx.flags.has("rerank")) {
        const auto m = ctx.flags.count("rerank");
        if (m > topk) ctx.flags.bad("rerank", ctx.flags.str("rerank"), "at most --topk");
        const auto scorer = make_scorer(ctx, ctx.flags.str("scorer", ctx.bridge ? "bridge" : "lexical"));
        reranked = rerank(index, hits, query, *scorer, std::min<std::size_t>(m, hits.size()));
    }
    if (ctx.json()) {
        ordered_json j{{"query", query}, {"retrieved", hits_json(hits)}};
        j["reranked"] = reranked ? hits_json(*reranked) : ordered_json(nullptr);
        ctx.emit(j);
        return kExitOk;
    }
    const auto& shown = reranked ? *reranked : hits;
    for (const auto& h : shown) ctx.out << h.rank << '\t' << h.passage_id << '\t' << fmt(h.score) << '\n';
    return kExitOk;
}

int cmd_readability(Context& ctx) {
    ctx.echo_config();
    const auto text = read_file(ctx.flags.str("text"));
    const auto stats = compute_stats(text, ctx.familiar());
    const auto r = readability_report(stats);
    if (ctx.json()) {
        ctx.emit({{"fre", r.fre},
                  {"fkgl", r.fkgl},
                  {"dcrs", r.dcrs},
                  {"cli", r.cli},
                  {"sentences", stats.sentence_count},
                  {"words", stats.word_count},
                  {"syllables", stats.syllable_count},
                  {"letters", stats.letter_count},
                  {"difficult_words", stats.difficult_word_count}});
    } else {
        ctx.out << "fre  " << fmt(r.fre) << "\nfkgl " << fmt(r.fkgl) << "\ndcrs " << fmt(r.dcrs) << "\ncli  "
                << fmt(r.cli) << '\n';
    }
    return kExitOk;
}

int cmd_rouge(Context& ctx) {
    ctx.echo_config();
    const auto scores = rouge_all(read_file(ctx.flags.str("hyp")), read_file(ctx.flags.str("ref")));
    if (ctx.json()) {
        ctx.emit({{"rouge1", prf_json(scores.rouge1)},
                  {"rouge2", prf_json(scores.rouge2)},
                  {"rougeL", prf_json(scores.rougeL)}});
    } else {
        ctx.out << "rouge1 f1 " << fmt(scores.rouge1.f1) << "\nrouge2 f1 " << fmt(scores.rouge2.f1)
                << "\nrougeL f1 " << fmt(scores.rougeL.f1) << '\n';
    }
    return kExitOk;
}

int cmd_reward(Context& ctx) {
    auto& rw = ctx.config.pipeline.reward;
    if (ctx.flags.has("mode")) {
        const auto mode = parse_reward_mode(ctx.flags.str("mode"));
        if (!mode) ctx.flags.bad("mode", ctx.flags.str("mode"), "eq2_literal or gaussian_normalized");
        rw.mode = *mode;
    }
    const int sources = ctx.flags.has("fre") + ctx.flags.has("fkgl") + ctx.flags.has("text");
    if (sources != 1) {
        throw UsageError(UsageErrorKind::MissingRequiredFlag, "reward: exactly one of --fre, --fkgl or --text is required",
                         "");
    }
    std::optional<std::size_t> words;
    if (ctx.flags.has("words")) words = ctx.flags.count("words");
    double readability = 0.0;
    if (ctx.flags.has("fre")) {
        rw.metric = ReadabilityMetric::Fre;
        readability = ctx.flags.number("fre");
    } else if (ctx.flags.has("fkgl")) {
        rw.metric = ReadabilityMetric::Fkgl;
        readability = ctx.flags.number("fkgl");
    } else {
        const auto text = read_file(ctx.flags.str("text"));
        const auto stats = compute_stats(text, ctx.familiar());
        const auto r = readability_report(stats);
        readability = rw.metric == ReadabilityMetric::Fre ? r.fre : r.fkgl;
        if (!words) words = stats.word_count;
    }
    if (ctx.flags.has("relevance") && !words) {
        throw UsageError(UsageErrorKind::MissingRequiredFlag, "reward: --relevance needs --words or --text", "");
    }
    rw.validate();
    ctx.echo_config();

    ordered_json j{{"metric", to_string(rw.metric)},
                   {"readability", readability},
                   {"target", rw.target_readability},
                   {"sigma", rw.sigma},
                   {"mode", to_string(rw.mode)},
                   {"eq2_reward", eq2_reward(readability, rw)},
                   {"normalized_readability", normalized_readability(readability, rw)},
                   {"readability_component", readability_component(readability, rw)}};
    if (ctx.flags.has("relevance") && words) {
        const auto b = composite_reward(readability, ctx.flags.number("relevance"), *words, rw);
        j["composite"] = {{"readability_component", b.readability_component},
                          {"relevance_component", b.relevance_component},
                          {"length_component", b.length_component},
                          {"total", b.total}};
    } else {
        j["composite"] = nullptr;
    }
    if (ctx.json()) {
        ctx.emit(j);
    } else {
        ctx.out << "eq2_reward             " << fmt(j["eq2_reward"].get<double>()) << '\n'
                << "normalized_readability " << fmt(j["normalized_readability"].get<double>()) << '\n'
                << "readability_component  " << fmt(j["readability_component"].get<double>()) << '\n';
        if (!j["composite"].is_null()) ctx.out << "composite              " << fmt(j["composite"]["total"].get<double>()) << '\n';
    }
    return kExitOk;
}

int cmd_ppo_train(Context& ctx) {
    auto& ppo = ctx.config.ppo;
    if (ctx.flags.has("seed")) ppo.seed = ctx.flags.count("seed");
    if (ctx.flags.has("iterations")) ppo.iterations = ctx.flags.count("iterations");
    if (ctx.flags.has("epsilon")) ppo.clip_epsilon = ctx.flags.number("epsilon");
    ppo.validate();
    ctx.echo_config();
    const auto sets = load_candidate_sets(ctx.flags.str("candidates"), ctx.config.pipeline.reward, ctx.familiar());
    if (sets.empty()) throw Error(ErrorCode::EmptyCollection, ctx.flags.str("candidates"), "no candidate sets");
    const auto result = train(sets, feature_reward(ctx.config.pipeline.reward), ppo);
    const auto csv = result.trace.to_csv();
    if (ctx.flags.has("trace")) write_file(ctx.flags.str("trace"), csv);

    ordered_json selection = ordered_json::array();
    for (const auto& set : sets) {
        const auto probs = policy_distribution(result.params, set);
        const auto best = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        selection.push_back({{"doc_id", set.doc_id}, {"selected", best}, {"probabilities", probs}});
    }
    const double final_reward = result.trace.rows.empty() ? 0.0 : result.trace.rows.back().mean_reward;
    if (ctx.json()) {
        ctx.emit({{"seed", ppo.seed},
                  {"iterations", ppo.iterations},
                  {"theta", result.params.theta},
                  {"final_mean_reward", final_reward},
                  {"trace", ctx.flags.has("trace") ? ordered_json(ctx.flags.str("trace")) : ordered_json(nullptr)},
                  {"selection", selection}});
    } else if (ctx.flags.has("trace")) {
        ctx.out << "trained " << ppo.iterations << " iterations, final mean reward " << fmt(final_reward)
                << ", trace -> " << ctx.flags.str("trace") << '\n';
    } else {
        ctx.out << csv;
    }
    return kExitOk;
}

int cmd_run(Context& ctx) {
    auto& pl = ctx.config.pipeline;
    if (ctx.flags.has("prompt-mode")) {
        const auto mode = parse_prompt_mode(ctx.flags.str("prompt-mode"));
        if (!mode) ctx.flags.bad("prompt-mode", ctx.flags.str("prompt-mode"), "none, paraphrase or summarize_with_keyphrases");
        pl.prompt_mode = *mode;
    }
    const auto jobs = ctx.flags.count("jobs", 1);
    if (jobs == 0) ctx.flags.bad("jobs", "0", "a positive integer");

    const auto corpus = load_corpus(ctx.flags.str("corpus"));
    if (!ctx.config.length_target_set) {
        if (auto mean = mean_train_summary_length(corpus)) pl.reward.length_target = *mean;
    }
    std::vector<Document> docs;
    if (ctx.flags.has("split")) {
        const auto split = parse_split(ctx.flags.str("split"));
        if (!split) ctx.flags.bad("split", ctx.flags.str("split"), "train, validation or test");
        std::copy_if(corpus.documents.begin(), corpus.documents.end(), std::back_inserter(docs),
                     [&](const Document& d) { return d.split == *split; });
    } else {
        docs = corpus.documents;
    }
    pl.validate();
    ctx.echo_config();

    const auto index = Index::load(ctx.flags.str("index"));
    MockGenerator mock;
    std::unique_ptr<GeneratorClient> bridge_generator;
    const GeneratorClient* generator = nullptr;
    const auto gen_name = ctx.flags.str("generator", ctx.bridge ? "bridge" : "none");
    if (gen_name == "mock") {
        generator = &mock;
    } else if (gen_name == "bridge") {
        bridge_generator = std::make_unique<BridgeGenerator>(ctx.require_bridge("generator"));
        generator = bridge_generator.get();
    } else if (gen_name != "none") {
        ctx.flags.bad("generator", gen_name, "one of none, mock, bridge");
    }
    const auto scorer = make_scorer(ctx, ctx.flags.str("scorer", ctx.bridge ? "bridge" : "lexical"));
    std::unique_ptr<BridgeMetrics> metrics;
    if (ctx.bridge) metrics = std::make_unique<BridgeMetrics>(*ctx.bridge);

    Services services;
    services.generator = generator;
    services.scorer = scorer.get();
    services.metrics = metrics.get();
    services.familiar = &ctx.familiar();

    const auto results = run_batch(docs, index, services, pl, jobs);

    const fs::path out_dir = ctx.flags.str("out");
    fs::create_directories(out_dir);
    std::string lines;
    for (const auto& r : results) lines += to_json(r) + '\n';
    write_file(out_dir / "results.jsonl", lines);

    std::vector<EvalPair> pairs;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& doc = *std::find_if(docs.begin(), docs.end(),
                                        [&](const Document& d) { return d.id == results[i].doc_id; });
        if (!doc.summary.empty()) pairs.push_back({doc.id, results[i].final_summary, doc.summary});
    }
    bool reported = false;
    if (!pairs.empty()) {
        auto report = evaluate(pairs, ctx.familiar(), metrics.get(), jobs);
        for (auto& kv : ctx.config.echo()) report.config.push_back(std::move(kv));
        write_file(out_dir / "report.md", report.to_markdown("rag"));
        write_file(out_dir / "report.json", report.to_json() + '\n');
        reported = true;
    } else {
        ctx.err << "laysum run: no reference summaries among the selected documents; report skipped\n";
    }

    if (ctx.json()) {
        ctx.emit({{"documents", results.size()},
                  {"out", out_dir.string()},
                  {"results", (out_dir / "results.jsonl").string()},
                  {"report", reported ? ordered_json((out_dir / "report.json").string()) : ordered_json(nullptr)}});
    } else {
        ctx.out << "processed " << results.size() << " documents -> " << out_dir.string() << '\n';
    }
    return kExitOk;
}

int cmd_evaluate(Context& ctx) {
    const auto jobs = ctx.flags.count("jobs", 1);
    if (jobs == 0) ctx.flags.bad("jobs", "0", "a positive integer");
    ctx.echo_config();
    const auto pairs = load_eval_pairs(ctx.flags.str("pairs"));
    std::unique_ptr<BridgeMetrics> metrics;
    if (ctx.bridge) metrics = std::make_unique<BridgeMetrics>(*ctx.bridge);
    const auto report = evaluate(pairs, ctx.familiar(), metrics.get(), jobs);
    const auto method = ctx.flags.str("method", "system");
    if (ctx.flags.has("out")) {
        const fs::path out_dir = ctx.flags.str("out");
        fs::create_directories(out_dir);
        write_file(out_dir / "report.md", report.to_markdown(method));
        write_file(out_dir / "report.json", report.to_json() + '\n');
    }
    if (ctx.json()) {
        ctx.out << report.to_json() << '\n';
    } else {
        ctx.out << report.to_markdown(method);
    }
    return kExitOk;
}

int cmd_hit_rate(Context& ctx) {
    ctx.echo_config();
    const auto index = Index::load(ctx.flags.str("index"));
    const auto queries = load_eval_queries(ctx.flags.str("eval"));

    HitRateTable table;
    table.push_back(hit_rate_eval(index, queries, nullptr));
    std::stringstream names(ctx.flags.str("rerankers", "lexical,oracle"));
    std::string name;
    while (std::getline(names, name, ',')) {
        if (name.empty()) continue;
        std::unique_ptr<RerankScorer> scorer;
        if (name == "oracle") {
            auto oracle = std::make_unique<OracleScorer>();
            for (const auto& q : queries) {
                if (auto ord = index.ordinal_of(q.gold_passage_id)) oracle->add(q.query, index.text(*ord));
            }
            scorer = std::move(oracle);
        } else if (name == "lexical" || name == "bridge") {
            scorer = make_scorer(ctx, name);
        } else {
            ctx.flags.bad("rerankers", name, "one of lexical, oracle, bridge");
        }
        table.push_back(hit_rate_eval(index, queries, scorer.get()));
    }

    if (ctx.json()) {
        ordered_json rows = ordered_json::array();
        for (const auto& r : table) {
            rows.push_back({{"method", r.method}, {"top1", r.top1}, {"top5", r.top5}, {"top20", r.top20}});
        }
        ctx.emit({{"queries", queries.size()}, {"rows", rows}});
    } else {
        ctx.out << "| Method | Top-1 | Top-5 | Top-20 |\n|---|---|---|---|\n";
        for (const auto& r : table) {
            char line[160];
            std::snprintf(line, sizeof line, "| %s | %.2f | %.2f | %.2f |\n", r.method.c_str(), 100 * r.top1,
                          100 * r.top5, 100 * r.top20);
            ctx.out << line;
        }
    }
    return kExitOk;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& s : specs()) v.emplace_back(s.name);
        return v;
    }();
    return names;
}

CliInvocation parse_args(std::span<const std::string> args) {
    if (args.empty()) {
        throw UsageError(UsageErrorKind::UnknownSubcommand, "missing subcommand", top_help());
    }
    if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        throw UsageError(UsageErrorKind::HelpRequested, "", top_help());
    }
    const auto* spec = find_spec(args[0]);
    if (spec == nullptr) {
        throw UsageError(UsageErrorKind::UnknownSubcommand, "unknown subcommand '" + args[0] + "'", top_help());
    }

    CLI::App app{spec->help, std::string("laysum ") + spec->name};
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    auto add = [&](const FlagSpec& f) {
        const std::string long_name = std::string("--") + f.name;
        CLI::Option* opt = f.takes_value ? app.add_option(long_name, values[f.name], f.help)
                                         : app.add_flag(long_name, f.help);
        if (f.required) opt->required();
        options.emplace_back(f.name, opt);
    };
    for (const auto& f : spec->flags) add(f);
    for (const auto& f : common_flags()) add(f);

    std::vector<const char*> argv;
    const std::string prog = std::string("laysum ") + spec->name;
    argv.push_back(prog.c_str());
    for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw UsageError(UsageErrorKind::HelpRequested, "", app.help());
    } catch (const CLI::RequiredError& e) {
        throw UsageError(UsageErrorKind::MissingRequiredFlag, e.what(), app.help());
    } catch (const CLI::ExtrasError& e) {
        throw UsageError(UsageErrorKind::UnknownFlag, e.what(), app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(UsageErrorKind::BadValue, e.what(), app.help());
    }

    CliInvocation inv;
    inv.subcommand = spec->name;
    for (const auto& [name, opt] : options) {
        if (opt->count() == 0) continue;
        inv.flags[name] = opt->get_expected_min() == 0 ? "true" : values[name];
    }
    return inv;
}

int dispatch(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    Context ctx{inv, Flags(inv), out, err, {}, bridge_url_from_env(), nullptr, std::nullopt};
    try {
        if (ctx.flags.has("config")) ctx.config = load_config(ctx.flags.str("config"));
        if (ctx.bridge_url) ctx.bridge = std::make_unique<BridgeClient>(*ctx.bridge_url);

        const auto& sub = inv.subcommand;
        if (sub == "ingest") return cmd_ingest(ctx);
        if (sub == "index") return cmd_index(ctx);
        if (sub == "retrieve") return cmd_retrieve(ctx);
        if (sub == "readability") return cmd_readability(ctx);
        if (sub == "rouge") return cmd_rouge(ctx);
        if (sub == "reward") return cmd_reward(ctx);
        if (sub == "ppo-train") return cmd_ppo_train(ctx);
        if (sub == "run") return cmd_run(ctx);
        if (sub == "evaluate") return cmd_evaluate(ctx);
        if (sub == "hit-rate") return cmd_hit_rate(ctx);
        throw UsageError(UsageErrorKind::UnknownSubcommand, "unknown subcommand '" + sub + "'", top_help());
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        err << "laysum " << inv.subcommand << ": error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(parse_args(args), out, err);
    } catch (const UsageError& e) {
        if (e.kind() == UsageErrorKind::HelpRequested) {
            out << e.help();
            return kExitOk;
        }
        err << "laysum: " << e.what() << '\n';
        if (!e.help().empty()) err << e.help();
        return kExitUsage;
    }
}

}  // namespace laysum::cli
