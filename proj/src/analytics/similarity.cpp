#include "analytics/similarity.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "util/errors.hpp"

namespace iothp::analytics {

double cosine(const TokenVector& a, const TokenVector& b) {
    if (a.counts.empty() || b.counts.empty()) {
        throw ValidationError("cosine over an empty token vector");
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (const auto& [tok, cnt] : a.counts) {
        norm_a += static_cast<double>(cnt) * cnt;
        auto it = b.counts.find(tok);
        if (it != b.counts.end()) dot += static_cast<double>(cnt) * it->second;
    }
    for (const auto& [tok, cnt] : b.counts) {
        norm_b += static_cast<double>(cnt) * cnt;
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

SimilarityMatrix build_similarity_matrix(const std::vector<std::string>& corpus) {
    SimilarityMatrix m;
    m.commands = corpus;
    size_t n = corpus.size();
    std::vector<TokenVector> vecs;
    vecs.reserve(n);
    for (const auto& c : corpus) vecs.push_back(token_vector(c));
    m.values.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        m.values[i][i] = 1.0;
        for (size_t j = i + 1; j < n; ++j) {
            double s = cosine(vecs[i], vecs[j]);
            m.values[i][j] = s;
            m.values[j][i] = s;
        }
    }
    return m;
}

Corpus build_corpus(const std::vector<std::string>& raw_commands) {
    Corpus corpus;
    std::unordered_map<std::string, size_t> seen;
    for (const auto& c : raw_commands) {
        auto [it, inserted] = seen.try_emplace(c, corpus.commands.size());
        if (inserted) {
            corpus.commands.push_back(c);
            corpus.multiplicity.push_back(1);
        } else {
            ++corpus.multiplicity[it->second];
        }
    }
    return corpus;
}

std::vector<std::vector<double>> build_features(const std::vector<std::string>& corpus,
                                                FeatureSpace space) {
    if (corpus.size() < 2) {
        throw ValidationError("feature construction needs at least 2 unique commands, got " +
                              std::to_string(corpus.size()));
    }
    if (space == FeatureSpace::SimilarityRows) {
        return build_similarity_matrix(corpus).values;
    }
    // Count vectors over the union vocabulary, columns in first-seen token order.
    std::vector<std::string> vocab;
    std::unordered_map<std::string, size_t> vocab_index;
    std::vector<TokenVector> vecs;
    vecs.reserve(corpus.size());
    for (const auto& c : corpus) {
        TokenVector v = token_vector(c);
        for (const auto& t : tokenize(c)) {
            if (vocab_index.try_emplace(t, vocab.size()).second) vocab.push_back(t);
        }
        vecs.push_back(std::move(v));
    }
    std::vector<std::vector<double>> rows(corpus.size(), std::vector<double>(vocab.size(), 0.0));
    for (size_t i = 0; i < vecs.size(); ++i) {
        for (const auto& [tok, cnt] : vecs[i].counts) {
            rows[i][vocab_index[tok]] = static_cast<double>(cnt);
        }
    }
    return rows;
}

}  // namespace iothp::analytics
