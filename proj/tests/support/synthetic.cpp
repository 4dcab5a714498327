#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace laysum::testing {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

std::vector<std::string> make_vocabulary(std::size_t count, std::mt19937_64& rng) {
    static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "pl", "tr"};
    static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "oo"};
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < count) {
        std::string w;
        const std::size_t syllables = 2 + uniform_index(rng, 2);
        for (std::size_t s = 0; s < syllables; ++s) {
            w += kOnsets[uniform_index(rng, std::size(kOnsets))];
            w += kVowels[uniform_index(rng, std::size(kVowels))];
        }
        if (seen.insert(w).second) words.push_back(w);
    }
    return words;
}

namespace {

std::string sentence(std::mt19937_64& rng, const std::vector<std::string>& topic,
                     const std::vector<std::string>& signature, const std::vector<std::string>& common) {
    const std::size_t len = 8 + uniform_index(rng, 5);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) {
        const double u = uniform01(rng);
        const std::string* w = nullptr;
        if (u < 0.15) {
            w = &signature[uniform_index(rng, signature.size())];
        } else if (u < 0.55) {
            w = &topic[uniform_index(rng, topic.size())];
        } else {
            w = &common[uniform_index(rng, common.size())];
        }
        if (!out.empty()) out += ' ';
        out += *w;
    }
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out + '.';
}

}  // namespace

RetrievalSet make_retrieval_set(std::size_t passage_count, std::size_t query_count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t topics = std::max<std::size_t>(1, passage_count / 20);
    const auto vocab = make_vocabulary(200 + topics * 30 + passage_count * 4, rng);
    const std::vector<std::string> common(vocab.begin(), vocab.begin() + 200);
    std::vector<std::vector<std::string>> topic_words(topics);
    for (std::size_t t = 0; t < topics; ++t) {
        const auto first = vocab.begin() + static_cast<std::ptrdiff_t>(200 + t * 30);
        topic_words[t].assign(first, first + 30);
    }
    const std::size_t signature_base = 200 + topics * 30;

    RetrievalSet set;
    std::vector<std::string> held_out(passage_count);
    for (std::size_t i = 0; i < passage_count; ++i) {
        const auto& topic = topic_words[i % topics];
        const auto sig_first = vocab.begin() + static_cast<std::ptrdiff_t>(signature_base + i * 4);
        const std::vector<std::string> signature(sig_first, sig_first + 4);
        std::string text;
        for (std::size_t s = 0; s < 5; ++s) {
            if (!text.empty()) text += ' ';
            text += sentence(rng, topic, signature, common);
        }
        held_out[i] = sentence(rng, topic, signature, common);
        char id[32];
        std::snprintf(id, sizeof id, "p%04zu", i);
        set.passages.push_back({id, text, "synthetic"});
    }
    for (std::size_t q = 0; q < query_count; ++q) {
        const std::size_t gold = uniform_index(rng, passage_count);
        set.queries.push_back({held_out[gold], set.passages[gold].id});
    }
    return set;
}

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                                       std::size_t alphabet) {
    const std::size_t len = min_len + uniform_index(rng, max_len - min_len + 1);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < len; ++i) out.push_back(std::string(1, static_cast<char>('a' + uniform_index(rng, alphabet))));
    return out;
}

CandidateSet make_dominant_bandit(std::mt19937_64& rng, std::size_t optimum, std::size_t candidates) {
    CandidateSet set;
    set.doc_id = "bandit";
    for (std::size_t c = 0; c < candidates; ++c) {
        Candidate cand;
        cand.text = "candidate " + std::to_string(c);
        for (auto& f : cand.features) f = 0.1 + 0.5 * uniform01(rng);
        set.candidates.push_back(cand);
    }
    for (auto& f : set.candidates[optimum].features) f = 0.9 + 0.1 * uniform01(rng);
    return set;
}

PpoInstance make_ppo_instance(std::mt19937_64& rng, double clip_epsilon) {
    PpoInstance inst;
    inst.clip_epsilon = clip_epsilon;
    for (auto& t : inst.params.theta) t = -2.0 + 4.0 * uniform01(rng);
    PolicyParams old = inst.params;
    for (auto& t : old.theta) t += -0.3 + 0.6 * uniform01(rng);

    const std::size_t set_count = 1 + uniform_index(rng, 4);
    for (std::size_t s = 0; s < set_count; ++s) {
        CandidateSet set;
        set.doc_id = "set" + std::to_string(s);
        const std::size_t n = 2 + uniform_index(rng, 5);
        for (std::size_t c = 0; c < n; ++c) {
            Candidate cand;
            for (auto& f : cand.features) f = uniform01(rng);
            set.candidates.push_back(cand);
        }
        inst.sets.push_back(set);
    }
    const std::size_t batch = 1 + uniform_index(rng, 12);
    while (inst.batch.size() < batch) {
        Rollout r;
        r.set_index = uniform_index(rng, inst.sets.size());
        const auto& set = inst.sets[r.set_index];
        r.action = uniform_index(rng, set.candidates.size());
        r.old_prob = policy_distribution(old, set)[r.action];
        r.advantage = -1.0 + 2.0 * uniform01(rng);
        r.reward = r.advantage;
        const double ratio = policy_distribution(inst.params, set)[r.action] / r.old_prob;
        if (clip_epsilon > 0.0 &&
            (std::abs(ratio - (1.0 - clip_epsilon)) < 1e-3 || std::abs(ratio - (1.0 + clip_epsilon)) < 1e-3)) {
            continue;
        }
        inst.batch.push_back(r);
    }
    return inst;
}

std::vector<double> central_difference(const PpoInstance& inst, double h) {
    std::vector<double> grad(inst.params.theta.size());
    for (std::size_t k = 0; k < grad.size(); ++k) {
        PolicyParams up = inst.params, down = inst.params;
        up.theta[k] += h;
        down.theta[k] -= h;
        grad[k] = (surrogate_objective(up, inst.sets, inst.batch, inst.clip_epsilon) -
                   surrogate_objective(down, inst.sets, inst.batch, inst.clip_epsilon)) /
                  (2.0 * h);
    }
    return grad;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        norm += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

}  // namespace laysum::testing
