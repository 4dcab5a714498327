#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <unistd.h>

#include "laysum/error.hpp"
#include "laysum/retrieval.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace laysum {
namespace {

namespace fs = std::filesystem;

std::vector<Passage> passages(std::initializer_list<const char*> texts) {
    std::vector<Passage> out;
    int i = 0;
    for (const char* t : texts) out.push_back({"p" + std::to_string(i++), t, "test"});
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return ErrorCode::Io;
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("laysum_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(IndexBuild, HandBuiltPostings) {
    const auto index = Index::build(passages({"a b", "b c"}));
    EXPECT_EQ(index.postings().at("a"), (std::vector<Posting>{{0, 1}}));
    EXPECT_EQ(index.postings().at("b"), (std::vector<Posting>{{0, 1}, {1, 1}}));
    EXPECT_EQ(index.postings().at("c"), (std::vector<Posting>{{1, 1}}));
    EXPECT_DOUBLE_EQ(index.avg_doc_length(), 2.0);
}

TEST(IndexBuild, SinglePassage) {
    const auto index = Index::build(passages({"one two three four"}));
    EXPECT_DOUBLE_EQ(index.avg_doc_length(), 4.0);
}

TEST(IndexBuild, Errors) {
    EXPECT_EQ(code_of([] { Index::build({}); }), ErrorCode::EmptyCollection);
    const auto ps = passages({"a"});
    EXPECT_EQ(code_of([&] { Index::build(ps, {0.0, 0.4}); }), ErrorCode::InvalidParam);
    EXPECT_EQ(code_of([&] { Index::build(ps, {0.9, 1.5}); }), ErrorCode::InvalidParam);
    EXPECT_EQ(code_of([&] { Index::build(ps, {0.9, -0.1}); }), ErrorCode::InvalidParam);
    std::vector<Passage> dup{{"x", "a", ""}, {"x", "b", ""}};
    EXPECT_EQ(code_of([&] { Index::build(dup); }), ErrorCode::DuplicateId);
}

TEST(IndexBuild, StructuralInvariants) {
    const auto set = testing::make_retrieval_set(200, 0, 3);
    const auto index = Index::build(set.passages);
    double total = 0;
    for (auto len : index.doc_lengths()) total += len;
    EXPECT_DOUBLE_EQ(index.avg_doc_length(), total / static_cast<double>(index.size()));
    for (const auto& [term, list] : index.postings()) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            EXPECT_LT(list[i].ordinal, index.size());
            EXPECT_GE(list[i].tf, 1u);
            if (i > 0) EXPECT_LT(list[i - 1].ordinal, list[i].ordinal) << term;
        }
    }
}

TEST(IndexFile, RoundTrip) {
    const auto set = testing::make_retrieval_set(120, 0, 4);
    const auto index = Index::build(set.passages, {1.2, 0.75});
    const auto path = temp_path("roundtrip.lsix");
    index.save(path);
    const auto loaded = Index::load(path);
    EXPECT_TRUE(loaded == index);
    EXPECT_EQ(loaded.params().k1, 1.2);
    EXPECT_EQ(search(loaded, "stuff " + set.passages[5].text, 10), search(index, "stuff " + set.passages[5].text, 10));
    fs::remove(path);
}

TEST(IndexFile, HeaderIsVersioned) {
    const auto path = temp_path("header.lsix");
    Index::build(passages({"a b"})).save(path);
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    std::uint32_t version = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    EXPECT_EQ(std::string(magic, 4), "LSIX");
    EXPECT_EQ(version, Index::kFormatVersion);
    fs::remove(path);
}

TEST(IndexFile, RejectsCorruptFiles) {
    const auto path = temp_path("corrupt.lsix");
    Index::build(passages({"a b", "c d"})).save(path);
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    auto write = [&](const std::string& b) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << b;
    };
    write("XXXX" + bytes.substr(4));
    EXPECT_EQ(code_of([&] { Index::load(path); }), ErrorCode::IndexFormat);
    auto wrong_version = bytes;
    wrong_version[4] = 99;
    write(wrong_version);
    EXPECT_EQ(code_of([&] { Index::load(path); }), ErrorCode::IndexFormat);
    for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
        write(bytes.substr(0, cut));
        EXPECT_EQ(code_of([&] { Index::load(path); }), ErrorCode::IndexFormat) << cut;
    }
    fs::remove(path);
    EXPECT_EQ(code_of([&] { Index::load(path); }), ErrorCode::Io);
}

TEST(Search, ExactTextRanksFirst) {
    const auto set = testing::make_retrieval_set(100, 0, 5);
    const auto index = Index::build(set.passages);
    for (std::size_t i = 0; i < 100; i += 7) {
        const auto hits = search(index, set.passages[i].text, 1);
        ASSERT_EQ(hits.size(), 1u);
        EXPECT_EQ(hits[0].passage_id, set.passages[i].id);
    }
}

TEST(Search, NoIndexedTermsYieldsNothing) {
    const auto index = Index::build(passages({"a b", "b c"}));
    EXPECT_TRUE(search(index, "zzz yyy", 5).empty());
}

TEST(Search, TiesBreakByOrdinal) {
    const auto index = Index::build(passages({"x y", "z w", "x y"}));
    const auto hits = search(index, "x", 3);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].passage_id, "p0");
    EXPECT_EQ(hits[1].passage_id, "p2");
    EXPECT_EQ(hits[0].score, hits[1].score);
}

TEST(Search, Errors) {
    const auto index = Index::build(passages({"a"}));
    EXPECT_EQ(code_of([&] { search(index, "   ", 3); }), ErrorCode::EmptyQuery);
    EXPECT_EQ(code_of([&] { search(index, "a", 0); }), ErrorCode::InvalidParam);
}

TEST(Search, MatchesBruteForceOracle) {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 5; ++round) {
        std::vector<Passage> ps;
        for (int i = 0; i < 60; ++i) {
            std::string text;
            for (const auto& t : testing::random_tokens(rng, 1, 12, 8)) text += t + " ";
            ps.push_back({"d" + std::to_string(i), text, ""});
        }
        const auto index = Index::build(ps);
        for (int q = 0; q < 20; ++q) {
            std::string query;
            for (const auto& t : testing::random_tokens(rng, 1, 4, 10)) query += t + " ";
            const auto want = oracle::bm25_rank(ps, query, 0.9, 0.4);
            const auto got = search(index, query, ps.size());
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t r = 0; r < got.size(); ++r) {
                EXPECT_EQ(got[r].passage_id, ps[want[r].ordinal].id);
                EXPECT_EQ(got[r].score, want[r].score);
                EXPECT_EQ(got[r].rank, r + 1);
            }
        }
    }
}

TEST(Search, UnrelatedPassageOnlyShiftsAverageLength) {
    auto ps = passages({"alpha beta gamma", "beta delta", "alpha alpha epsilon zeta"});
    const std::string query = "alpha beta";
    const auto before = search(Index::build(ps), query, 10);
    ps.push_back({"extra", "omega omega omega omega omega omega", ""});
    const auto after = search(Index::build(ps), query, 10);
    // Closed-form recomputation with the new N and average length.
    const auto want = oracle::bm25_rank(ps, query, 0.9, 0.4);
    ASSERT_EQ(after.size(), before.size());
    ASSERT_EQ(after.size(), want.size());
    for (std::size_t i = 0; i < after.size(); ++i) {
        EXPECT_EQ(after[i].passage_id, ps[want[i].ordinal].id);
        EXPECT_EQ(after[i].score, want[i].score);
        EXPECT_NE(after[i].passage_id, "extra");
    }
}

TEST(TruncateQuery, CapsTokenCount) {
    std::string q;
    for (int i = 0; i < 600; ++i) q += "w" + std::to_string(i) + " ";
    const auto t = truncate_query(q, kMaxQueryTokens);
    EXPECT_EQ(tokenize_words(t).size(), kMaxQueryTokens);
    EXPECT_EQ(truncate_query("A b, c!", 2), "a b");
}

std::vector<RankedHit> sample_hits(const Index& index) { return search(index, "alpha beta gamma delta", 10); }

TEST(Rerank, NegatedScoreReversesOrder) {
    const auto index = Index::build(passages({"alpha", "alpha beta", "alpha beta gamma", "alpha beta gamma delta"}));
    const auto hits = sample_hits(index);
    std::map<std::string, double> bm25;
    for (const auto& h : hits) bm25[index.text(*index.ordinal_of(h.passage_id))] = h.score;
    FunctionScorer neg("neg", [&](std::string_view, std::string_view p) { return -bm25.at(std::string(p)); });
    const auto out = rerank(index, hits, "q", neg, 3);
    ASSERT_EQ(out.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(out[i].passage_id, hits[hits.size() - 1 - i].passage_id);
        EXPECT_EQ(out[i].rank, i + 1);
    }
}

TEST(Rerank, ConstantScorerIsStable) {
    const auto index = Index::build(passages({"alpha", "alpha beta", "alpha beta gamma", "alpha beta gamma delta"}));
    const auto hits = sample_hits(index);
    FunctionScorer flat("flat", [](std::string_view, std::string_view) { return 1.0; });
    const auto out = rerank(index, hits, "q", flat, 2);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].passage_id, hits[0].passage_id);
    EXPECT_EQ(out[1].passage_id, hits[1].passage_id);
}

TEST(Rerank, PriorScoreIsIdentity) {
    const auto index = Index::build(passages({"alpha", "alpha beta", "alpha beta gamma", "alpha beta gamma delta"}));
    const auto hits = sample_hits(index);
    std::map<std::string, double> bm25;
    for (const auto& h : hits) bm25[index.text(*index.ordinal_of(h.passage_id))] = h.score;
    FunctionScorer same("same", [&](std::string_view, std::string_view p) { return bm25.at(std::string(p)); });
    EXPECT_EQ(rerank(index, hits, "q", same, hits.size()), hits);
}

TEST(Rerank, FailuresNameThePassage) {
    const auto index = Index::build(passages({"alpha", "alpha beta"}));
    const auto hits = search(index, "alpha", 2);
    FunctionScorer boom("boom", [](std::string_view, std::string_view p) -> double {
        if (p == "alpha beta") throw std::runtime_error("backend down");
        return 0.0;
    });
    try {
        rerank(index, hits, "alpha", boom, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ScorerFailure);
        EXPECT_EQ(e.detail(), "p1");
    }
    FunctionScorer nan("nan", [](std::string_view, std::string_view) { return std::nan(""); });
    EXPECT_EQ(code_of([&] { rerank(index, hits, "alpha", nan, 2); }), ErrorCode::ScorerFailure);
    LexicalOverlapScorer lex;
    EXPECT_EQ(code_of([&] { rerank(index, hits, "alpha", lex, 3); }), ErrorCode::InvalidParam);
}

TEST(Rerank, OutputIsSubsetWithNonIncreasingScores) {
    const auto set = testing::make_retrieval_set(200, 20, 8);
    const auto index = Index::build(set.passages);
    LexicalOverlapScorer lex;
    for (const auto& q : set.queries) {
        const auto hits = search(index, q.query, 20);
        const auto out = rerank(index, hits, q.query, lex, std::min<std::size_t>(5, hits.size()));
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_EQ(out[i].rank, i + 1);
            if (i > 0) EXPECT_GE(out[i - 1].score, out[i].score);
            EXPECT_NE(std::find_if(hits.begin(), hits.end(), [&](const RankedHit& h) { return h.passage_id == out[i].passage_id; }),
                      hits.end());
        }
    }
}

TEST(Scorers, LexicalOverlapIsCosine) {
    LexicalOverlapScorer lex;
    EXPECT_DOUBLE_EQ(lex.score("a b", "a b"), 1.0);
    EXPECT_DOUBLE_EQ(lex.score("a b", "c d"), 0.0);
    EXPECT_DOUBLE_EQ(lex.score("a b", "a c"), 0.5);
    EXPECT_DOUBLE_EQ(lex.score("a a b", "a c"), 0.5);
}

TEST(HitRate, VerbatimQueriesArePerfect) {
    const auto set = testing::make_retrieval_set(100, 0, 12);
    const auto index = Index::build(set.passages);
    std::vector<EvalQuery> qs;
    for (std::size_t i = 0; i < 30; ++i) qs.push_back({set.passages[i].text, set.passages[i].id});
    const auto row = hit_rate_eval(index, qs, nullptr);
    EXPECT_EQ(row.method, "bm25");
    EXPECT_EQ(row.top1, 1.0);
    EXPECT_EQ(row.top5, 1.0);
    EXPECT_EQ(row.top20, 1.0);
}

TEST(HitRate, DisjointVocabularyScoresZero) {
    const auto index = Index::build(passages({"a b", "c d"}));
    const std::vector<EvalQuery> qs{{"zz", "p0"}, {"yy", "p1"}};
    const auto row = hit_rate_eval(index, qs, nullptr);
    EXPECT_EQ(row.top1, 0.0);
    EXPECT_EQ(row.top20, 0.0);
}

TEST(HitRate, Errors) {
    const auto index = Index::build(passages({"a b"}));
    const std::vector<EvalQuery> bad{{"a", "nope"}};
    EXPECT_EQ(code_of([&] { hit_rate_eval(index, bad, nullptr); }), ErrorCode::UnknownGoldId);
    EXPECT_EQ(code_of([&] { hit_rate_eval(index, {}, nullptr); }), ErrorCode::InvalidParam);
}

TEST(HitRate, MonotoneAndOracleBeatsBm25) {
    const auto set = testing::make_retrieval_set(300, 80, 21);
    const auto index = Index::build(set.passages);
    OracleScorer oracle_scorer;
    for (const auto& q : set.queries) oracle_scorer.add(q.query, index.text(*index.ordinal_of(q.gold_passage_id)));
    LexicalOverlapScorer lex;
    const auto bm25 = hit_rate_eval(index, set.queries, nullptr);
    for (const RerankScorer* s : {static_cast<const RerankScorer*>(nullptr), static_cast<const RerankScorer*>(&lex),
                                  static_cast<const RerankScorer*>(&oracle_scorer)}) {
        const auto row = hit_rate_eval(index, set.queries, s);
        EXPECT_LE(row.top1, row.top5);
        EXPECT_LE(row.top5, row.top20);
        EXPECT_EQ(row.queries, set.queries.size());
    }
    const auto oracle_row = hit_rate_eval(index, set.queries, &oracle_scorer);
    EXPECT_EQ(oracle_row.method, "oracle");
    EXPECT_GE(oracle_row.top1, bm25.top1);
    EXPECT_EQ(oracle_row.top1, bm25.top20);
}

TEST(EvalQueries, LoadsJsonl) {
    const auto path = temp_path("queries.jsonl");
    {
        std::ofstream out(path);
        out << R"({"query":"alpha","gold":"p0"})" << "\n\n" << R"({"query":"beta","gold":"p1"})" << "\n";
    }
    const auto qs = load_eval_queries(path);
    ASSERT_EQ(qs.size(), 2u);
    EXPECT_EQ(qs[1].gold_passage_id, "p1");
    fs::remove(path);
}

}  // namespace
}  // namespace laysum
