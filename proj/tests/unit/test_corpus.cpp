#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "laysum/corpus.hpp"
#include "laysum/error.hpp"
#include "synthetic.hpp"

namespace laysum {
namespace {

namespace fs = std::filesystem;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return ErrorCode::Io;
}

class TempFile {
public:
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("laysum_corpus_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".jsonl");
        std::ofstream(path_, std::ios::binary) << content;
    }
    ~TempFile() { fs::remove(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

TEST(ParseRecord, FieldMapping) {
    const auto d = parse_record(R"({"id":"d1","article":"A body.","summary":"A lay sum.","keyphrases":["x"],"split":"train"})");
    EXPECT_EQ(d.id, "d1");
    EXPECT_EQ(d.article, "A body.");
    EXPECT_EQ(d.summary, "A lay sum.");
    EXPECT_EQ(d.keyphrases, std::vector<std::string>{"x"});
    EXPECT_EQ(d.split, Split::Train);
}

TEST(ParseRecord, EmptyArticle) {
    EXPECT_EQ(code_of([] { parse_record(R"({"id":"d2","article":""})"); }), ErrorCode::EmptyArticle);
}

TEST(ParseRecord, TestSplitMayLackSummary) {
    const auto d = parse_record(R"({"id":"d3","article":"Body","split":"test"})");
    EXPECT_TRUE(d.summary.empty());
    EXPECT_TRUE(d.keyphrases.empty());
    EXPECT_EQ(d.split, Split::Test);
}

TEST(ParseRecord, SummaryRequiredOutsideTestSplit) {
    try {
        parse_record(R"({"id":"d4","article":"Body","split":"validation"})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingField);
        EXPECT_EQ(e.detail(), "summary");
    }
    EXPECT_EQ(code_of([] { parse_record(R"({"id":"d4","article":"Body","summary":"","split":"train"})"); }),
              ErrorCode::MissingField);
}

TEST(ParseRecord, ValidationErrors) {
    EXPECT_EQ(code_of([] { parse_record("{not json"); }), ErrorCode::MalformedJson);
    EXPECT_EQ(code_of([] { parse_record("[1,2]"); }), ErrorCode::MalformedJson);
    EXPECT_EQ(code_of([] { parse_record(R"({"article":"A","summary":"s","split":"train"})"); }), ErrorCode::MissingField);
    EXPECT_EQ(code_of([] { parse_record(R"({"id":"","article":"A","summary":"s","split":"train"})"); }), ErrorCode::InvalidField);
    EXPECT_EQ(code_of([] { parse_record(R"({"id":7,"article":"A","summary":"s","split":"train"})"); }), ErrorCode::InvalidField);
    EXPECT_EQ(code_of([] { parse_record(R"({"id":"a","article":"A","summary":"s","split":"dev"})"); }), ErrorCode::InvalidField);
    EXPECT_EQ(code_of([] { parse_record(R"({"id":"a","article":"A","summary":"s"})"); }), ErrorCode::MissingField);
    EXPECT_EQ(code_of([] { parse_record(R"({"id":"a","article":"A","summary":"s","split":"train","keyphrases":"x"})"); }),
              ErrorCode::InvalidField);
}

TEST(ParseRecord, UnknownFieldsIgnored) {
    EXPECT_NO_THROW(parse_record(R"({"id":"a","article":"A","summary":"s","split":"train","doi":"10.1/x"})"));
}

TEST(ParseRecord, RoundTripProperty) {
    std::mt19937_64 rng(10);
    const auto vocab = testing::make_vocabulary(50, rng);
    auto words = [&](std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[testing::uniform_index(rng, vocab.size())];
        return s;
    };
    for (int i = 0; i < 200; ++i) {
        Document d;
        d.id = "doc-" + std::to_string(i) + "-\"quoted\"\\";
        d.article = words(1 + testing::uniform_index(rng, 30)) + "\n\tcafé ✓";
        d.split = static_cast<Split>(testing::uniform_index(rng, 3));
        d.summary = d.split == Split::Test && i % 2 ? "" : words(1 + testing::uniform_index(rng, 10));
        for (std::size_t k = 0; k < testing::uniform_index(rng, 4); ++k) d.keyphrases.push_back(words(2));
        EXPECT_EQ(parse_record(serialize(d)), d);
    }
}

TEST(Passages, ParseAndRoundTrip) {
    const auto p = parse_passage(R"({"id":"w1","text":"Some text","source":"wiki"})");
    EXPECT_EQ(p.source, "wiki");
    EXPECT_EQ(parse_passage(serialize(p)), p);
    EXPECT_EQ(parse_passage(R"({"id":"w1","text":"Some text"})").source, "");
    try {
        parse_passage(R"({"id":"w2"})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingField);
        EXPECT_EQ(e.detail(), "text");
    }
    EXPECT_EQ(code_of([] { parse_passage(R"({"id":"w2","text":"  "})"); }), ErrorCode::EmptyText);
}

TEST(LoadCorpus, ThreeLines) {
    TempFile f(R"({"id":"a","article":"A.","summary":"s","split":"train"})"
               "\n"
               R"({"id":"b","article":"B.","summary":"s","split":"validation"})"
               "\n\n"
               R"({"id":"c","article":"C.","split":"test"})"
               "\n");
    const auto corpus = load_corpus(f.path());
    ASSERT_EQ(corpus.size(), 3u);
    EXPECT_EQ(corpus.documents[0].id, "a");
    EXPECT_EQ(corpus.documents[2].id, "c");
    EXPECT_EQ(corpus.count(Split::Train), 1u);
    EXPECT_EQ(corpus.count(Split::Validation), 1u);
    EXPECT_EQ(corpus.count(Split::Test), 1u);
}

TEST(LoadCorpus, DuplicateId) {
    TempFile f(R"({"id":"d1","article":"A.","summary":"s","split":"train"})"
               "\n"
               R"({"id":"d1","article":"B.","summary":"s","split":"train"})"
               "\n");
    try {
        load_corpus(f.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
        EXPECT_EQ(e.detail(), "d1");
    }
}

TEST(LoadCorpus, ErrorsCarryLineNumbers) {
    TempFile f(R"({"id":"a","article":"A.","summary":"s","split":"train"})"
               "\n"
               R"({"id":"b","article":""})"
               "\n");
    try {
        load_corpus(f.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyArticle);
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    EXPECT_EQ(code_of([] { load_corpus("/nonexistent/corpus.jsonl"); }), ErrorCode::Io);
}

TEST(LoadCorpus, DeterministicAndInvariantsHold) {
    std::string content;
    for (int i = 0; i < 50; ++i) {
        Document d{"d" + std::to_string(i), "Article " + std::to_string(i) + ".", i % 3 == 2 ? "" : "Sum.", {}, static_cast<Split>(i % 3)};
        content += serialize(d) + "\n";
    }
    TempFile f(content);
    const auto a = load_corpus(f.path());
    const auto b = load_corpus(f.path());
    EXPECT_EQ(a.documents, b.documents);
    EXPECT_EQ(a.split_counts, b.split_counts);
    std::size_t total = 0;
    for (auto c : a.split_counts) total += c;
    EXPECT_EQ(total, a.size());
    for (const auto& d : a.documents) {
        EXPECT_FALSE(d.id.empty());
        EXPECT_FALSE(d.article.empty());
        if (d.split != Split::Test) EXPECT_FALSE(d.summary.empty());
    }
}

TEST(LoadPassages, FileOrderAndUniqueness) {
    TempFile f(R"({"id":"p1","text":"one"})" "\n" R"({"id":"p2","text":"two"})" "\n");
    const auto ps = load_passages(f.path());
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_EQ(ps[0].id, "p1");
    TempFile dup(R"({"id":"p1","text":"one"})" "\n" R"({"id":"p1","text":"two"})" "\n");
    EXPECT_EQ(code_of([&] { load_passages(dup.path()); }), ErrorCode::DuplicateId);
}

TEST(LoadPassages, SyntheticThousand) {
    const auto set = testing::make_retrieval_set(1000, 0, 1);
    std::string content;
    for (const auto& p : set.passages) content += serialize(p) + "\n";
    TempFile f(content);
    const auto ps = load_passages(f.path());
    EXPECT_EQ(ps.size(), 1000u);
    EXPECT_EQ(ps, set.passages);
}

TEST(MeanSummaryLength, TrainSplitOnly) {
    Corpus c;
    c.documents = {{"a", "A.", "one two three", {}, Split::Train},
                   {"b", "B.", "one", {}, Split::Train},
                   {"c", "C.", "one two three four five six", {}, Split::Validation}};
    EXPECT_DOUBLE_EQ(*mean_train_summary_length(c), 2.0);
    c.documents.resize(0);
    EXPECT_FALSE(mean_train_summary_length(c).has_value());
}

TEST(SplitNames, RoundTrip) {
    for (auto s : {Split::Train, Split::Validation, Split::Test}) EXPECT_EQ(parse_split(to_string(s)), s);
    EXPECT_FALSE(parse_split("dev"));
}

}  // namespace
}  // namespace laysum
