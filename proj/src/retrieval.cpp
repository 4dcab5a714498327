#include "laysum/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "laysum/error.hpp"
#include "laysum/textstats.hpp"

namespace laysum {

namespace {

constexpr std::uint32_t fourcc(const char (&tag)[5]) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(tag[0])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(tag[1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(tag[2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(tag[3])) << 24;
}

constexpr std::uint32_t kTagParams = fourcc("PARM");
constexpr std::uint32_t kTagIds = fourcc("PIDS");
constexpr std::uint32_t kTagTexts = fourcc("PTXT");
constexpr std::uint32_t kTagLengths = fourcc("DLEN");
constexpr std::uint32_t kTagPostings = fourcc("POST");
constexpr char kMagic[4] = {'L', 'S', 'I', 'X'};

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }
    void raw(std::string_view s) { buf_.append(s); }
    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u32();
        return std::string(take(n));
    }
    std::string_view take(std::size_t n) {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    unsigned char byte(std::size_t i) const { return static_cast<unsigned char>(data_[i]); }
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw Error(ErrorCode::IndexFormat, "", "truncated index data");
        }
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

double bm25_term(double idf, double tf, double len, double avg, const Bm25Params& p) {
    return idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * (len / avg)));
}

}  // namespace

Index Index::build(std::span<const Passage> passages, Bm25Params params) {
    if (passages.empty()) {
        throw Error(ErrorCode::EmptyCollection, "", "cannot index zero passages");
    }
    if (!(params.k1 > 0.0) || !std::isfinite(params.k1)) {
        throw Error(ErrorCode::InvalidParam, "k1", "must be > 0");
    }
    if (!(params.b >= 0.0 && params.b <= 1.0)) {
        throw Error(ErrorCode::InvalidParam, "b", "must be in [0, 1]");
    }

    Index index;
    index.params_ = params;
    index.ids_.reserve(passages.size());
    index.texts_.reserve(passages.size());
    for (std::size_t ordinal = 0; ordinal < passages.size(); ++ordinal) {
        const auto& p = passages[ordinal];
        index.ids_.push_back(p.id);
        index.texts_.push_back(p.text);

        const auto tokens = tokenize_words(p.text);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            index.postings_[term].push_back({static_cast<std::uint32_t>(ordinal), count});
        }
    }
    index.finalize();
    if (index.ordinal_by_id_.size() != index.ids_.size()) {
        throw Error(ErrorCode::DuplicateId, "", "passage ids must be unique");
    }
    return index;
}

void Index::finalize() {
    const double total = std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), 0.0);
    avg_doc_length_ = total / static_cast<double>(doc_lengths_.size());
    ordinal_by_id_.clear();
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        ordinal_by_id_.emplace(ids_[i], i);
    }
}

std::optional<std::size_t> Index::ordinal_of(std::string_view id) const {
    auto it = ordinal_by_id_.find(std::string(id));
    if (it == ordinal_by_id_.end()) return std::nullopt;
    return it->second;
}

std::span<const Posting> Index::postings_for(const std::string& term) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return {};
    return it->second;
}

double Index::idf(std::size_t document_frequency) const {
    const double n = static_cast<double>(ids_.size());
    const double df = static_cast<double>(document_frequency);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

bool Index::operator==(const Index& other) const {
    return params_.k1 == other.params_.k1 && params_.b == other.params_.b && ids_ == other.ids_ &&
           texts_ == other.texts_ && doc_lengths_ == other.doc_lengths_ &&
           avg_doc_length_ == other.avg_doc_length_ && postings_ == other.postings_;
}

void Index::save(const std::filesystem::path& path) const {
    auto section = [](ByteWriter& out, std::uint32_t tag, const ByteWriter& payload) {
        out.u32(tag);
        out.u64(payload.bytes().size());
        out.raw(payload.bytes());
    };

    ByteWriter params;
    params.f64(params_.k1);
    params.f64(params_.b);

    ByteWriter ids;
    ids.u32(static_cast<std::uint32_t>(ids_.size()));
    for (const auto& id : ids_) ids.str(id);

    ByteWriter texts;
    texts.u32(static_cast<std::uint32_t>(texts_.size()));
    for (const auto& t : texts_) texts.str(t);

    ByteWriter lengths;
    lengths.u32(static_cast<std::uint32_t>(doc_lengths_.size()));
    for (auto len : doc_lengths_) lengths.u32(len);

    ByteWriter postings;
    postings.u32(static_cast<std::uint32_t>(postings_.size()));
    for (const auto& [term, list] : postings_) {
        postings.str(term);
        postings.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            postings.u32(p.ordinal);
            postings.u32(p.tf);
        }
    }

    ByteWriter file;
    file.raw(std::string_view(kMagic, 4));
    file.u32(kFormatVersion);
    file.u32(5);
    section(file, kTagParams, params);
    section(file, kTagIds, ids);
    section(file, kTagTexts, texts);
    section(file, kTagLengths, lengths);
    section(file, kTagPostings, postings);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, path.string(), "cannot open for writing");
    }
    out.write(file.bytes().data(), static_cast<std::streamsize>(file.bytes().size()));
    if (!out) {
        throw Error(ErrorCode::Io, path.string(), "write failed");
    }
}

Index Index::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, path.string(), "cannot open for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string data = buffer.str();

    ByteReader reader(data);
    if (reader.take(4) != std::string_view(kMagic, 4)) {
        throw Error(ErrorCode::IndexFormat, path.string(), "bad magic");
    }
    if (const auto version = reader.u32(); version != kFormatVersion) {
        throw Error(ErrorCode::IndexFormat, path.string(),
                    "unsupported format version " + std::to_string(version));
    }

    Index index;
    std::set<std::uint32_t> seen;
    const auto sections = reader.u32();
    for (std::uint32_t s = 0; s < sections; ++s) {
        const auto tag = reader.u32();
        const auto length = reader.u64();
        if (length > data.size()) {
            throw Error(ErrorCode::IndexFormat, path.string(), "section length out of range");
        }
        ByteReader body(reader.take(static_cast<std::size_t>(length)));
        seen.insert(tag);
        if (tag == kTagParams) {
            index.params_.k1 = body.f64();
            index.params_.b = body.f64();
        } else if (tag == kTagIds) {
            const auto n = body.u32();
            for (std::uint32_t i = 0; i < n; ++i) index.ids_.push_back(body.str());
        } else if (tag == kTagTexts) {
            const auto n = body.u32();
            for (std::uint32_t i = 0; i < n; ++i) index.texts_.push_back(body.str());
        } else if (tag == kTagLengths) {
            const auto n = body.u32();
            for (std::uint32_t i = 0; i < n; ++i) index.doc_lengths_.push_back(body.u32());
        } else if (tag == kTagPostings) {
            const auto terms = body.u32();
            for (std::uint32_t t = 0; t < terms; ++t) {
                auto term = body.str();
                auto& list = index.postings_[std::move(term)];
                const auto n = body.u32();
                list.reserve(n);
                for (std::uint32_t i = 0; i < n; ++i) {
                    Posting p;
                    p.ordinal = body.u32();
                    p.tf = body.u32();
                    list.push_back(p);
                }
            }
        } else {
            continue;  // unknown sections are skipped
        }
        if (!body.done()) {
            throw Error(ErrorCode::IndexFormat, path.string(), "trailing bytes in section");
        }
    }
    for (auto tag : {kTagParams, kTagIds, kTagTexts, kTagLengths, kTagPostings}) {
        if (!seen.contains(tag)) {
            throw Error(ErrorCode::IndexFormat, path.string(), "missing section");
        }
    }

    const auto n = index.ids_.size();
    if (n == 0 || index.texts_.size() != n || index.doc_lengths_.size() != n) {
        throw Error(ErrorCode::IndexFormat, path.string(), "inconsistent section sizes");
    }
    for (const auto& [term, list] : index.postings_) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].ordinal >= n || list[i].tf == 0 ||
                (i > 0 && list[i - 1].ordinal >= list[i].ordinal)) {
                throw Error(ErrorCode::IndexFormat, path.string(), "invalid postings for '" + term + "'");
            }
        }
    }
    index.finalize();
    return index;
}

std::string truncate_query(std::string_view query, std::size_t max_tokens) {
    auto tokens = tokenize_words(query);
    if (tokens.size() > max_tokens) tokens.resize(max_tokens);
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

std::vector<RankedHit> search(const Index& index, std::string_view query, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidParam, "k", "must be >= 1");
    }
    const auto terms = tokenize_words(query);
    if (terms.empty()) {
        throw Error(ErrorCode::EmptyQuery, "", "query has no word tokens");
    }

    std::vector<double> scores(index.size(), 0.0);
    std::vector<char> matched(index.size(), 0);
    const auto lengths = index.doc_lengths();
    for (const auto& term : terms) {
        const auto postings = index.postings_for(term);
        if (postings.empty()) continue;
        const double idf = index.idf(postings.size());
        for (const auto& p : postings) {
            scores[p.ordinal] += bm25_term(idf, static_cast<double>(p.tf),
                                           static_cast<double>(lengths[p.ordinal]),
                                           index.avg_doc_length(), index.params());
            matched[p.ordinal] = 1;
        }
    }

    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 0; i < matched.size(); ++i) {
        if (matched[i]) candidates.push_back(i);
    }
    const auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    const auto keep = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), better);

    std::vector<RankedHit> hits;
    hits.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
        const auto ordinal = candidates[r];
        hits.push_back({index.id(ordinal), scores[ordinal], r + 1});
    }
    return hits;
}

std::vector<double> RerankScorer::score_batch(std::string_view query,
                                              std::span<const std::string_view> passages) const {
    std::vector<double> out;
    out.reserve(passages.size());
    for (auto p : passages) out.push_back(score(query, p));
    return out;
}

double LexicalOverlapScorer::score(std::string_view query, std::string_view passage) const {
    const auto q = tokenize_words(query);
    const auto p = tokenize_words(passage);
    const std::set<std::string> qs(q.begin(), q.end());
    const std::set<std::string> ps(p.begin(), p.end());
    if (qs.empty() || ps.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& t : qs) shared += ps.count(t);
    return static_cast<double>(shared) /
           std::sqrt(static_cast<double>(qs.size()) * static_cast<double>(ps.size()));
}

void OracleScorer::add(std::string query, std::string gold_passage_text) {
    gold_.insert_or_assign(std::move(query), std::move(gold_passage_text));
}

double OracleScorer::score(std::string_view query, std::string_view passage) const {
    auto it = gold_.find(query);
    return (it != gold_.end() && it->second == passage) ? 1.0 : 0.0;
}

std::vector<RankedHit> rerank(const Index& index, std::span<const RankedHit> hits,
                              std::string_view query, const RerankScorer& scorer, std::size_t m) {
    if (m > hits.size()) {
        throw Error(ErrorCode::InvalidParam, "m",
                    "rerank depth " + std::to_string(m) + " exceeds " + std::to_string(hits.size()) +
                        " candidates");
    }
    std::vector<std::string_view> texts;
    texts.reserve(hits.size());
    for (const auto& h : hits) {
        const auto ordinal = index.ordinal_of(h.passage_id);
        if (!ordinal) {
            throw Error(ErrorCode::InvalidParam, h.passage_id, "hit is not in the index");
        }
        texts.push_back(index.text(*ordinal));
    }

    std::vector<double> scores;
    try {
        scores = scorer.score_batch(query, texts);
    } catch (const std::exception& e) {
        for (std::size_t i = 0; i < hits.size(); ++i) {
            try {
                (void)scorer.score(query, texts[i]);
            } catch (const std::exception&) {
                throw Error(ErrorCode::ScorerFailure, hits[i].passage_id, e.what());
            }
        }
        throw Error(ErrorCode::ScorerFailure, hits.empty() ? "" : hits.front().passage_id, e.what());
    }
    if (scores.size() != hits.size()) {
        throw Error(ErrorCode::ScorerFailure, "", "scorer returned " + std::to_string(scores.size()) +
                                                      " scores for " + std::to_string(hits.size()) +
                                                      " passages");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw Error(ErrorCode::ScorerFailure, hits[i].passage_id, "non-finite score");
        }
    }

    std::vector<std::size_t> order(hits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return hits[a].rank < hits[b].rank;
    });

    std::vector<RankedHit> out;
    out.reserve(m);
    for (std::size_t r = 0; r < m; ++r) {
        const auto i = order[r];
        out.push_back({hits[i].passage_id, scores[i], r + 1});
    }
    return out;
}

std::vector<EvalQuery> load_eval_queries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, path.string(), "cannot open for reading");
    }
    std::vector<EvalQuery> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        const auto obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw Error(ErrorCode::MalformedJson, "", where);
        }
        for (const char* field : {"query", "gold"}) {
            if (!obj.contains(field)) throw Error(ErrorCode::MissingField, field, where);
            if (!obj[field].is_string()) throw Error(ErrorCode::InvalidField, field, where);
        }
        out.push_back({obj["query"].get<std::string>(), obj["gold"].get<std::string>()});
    }
    return out;
}

HitRateRow hit_rate_eval(const Index& index, std::span<const EvalQuery> queries,
                         const RerankScorer* scorer) {
    if (queries.empty()) {
        throw Error(ErrorCode::InvalidParam, "queries", "evaluation set is empty");
    }
    for (const auto& q : queries) {
        if (!index.ordinal_of(q.gold_passage_id)) {
            throw Error(ErrorCode::UnknownGoldId, q.gold_passage_id);
        }
    }

    std::size_t at1 = 0, at5 = 0, at20 = 0;
    for (const auto& q : queries) {
        auto hits = search(index, q.query, kCandidatePool);
        if (scorer != nullptr) {
            hits = rerank(index, hits, q.query, *scorer, hits.size());
        }
        for (const auto& h : hits) {
            if (h.passage_id != q.gold_passage_id) continue;
            if (h.rank <= 1) ++at1;
            if (h.rank <= 5) ++at5;
            if (h.rank <= 20) ++at20;
            break;
        }
    }
    const double n = static_cast<double>(queries.size());
    HitRateRow row;
    row.method = scorer != nullptr ? scorer->name() : "bm25";
    row.top1 = static_cast<double>(at1) / n;
    row.top5 = static_cast<double>(at5) / n;
    row.top20 = static_cast<double>(at20) / n;
    row.queries = queries.size();
    return row;
}

}  // namespace laysum
