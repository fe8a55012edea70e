#pragma once

#include <string>
#include <vector>

#include "analytics/tokenize.hpp"

namespace iothp::analytics {

// Cosine of the angle between two token-count vectors over their union
// vocabulary: dot(A,B) / (|A| |B|). Counts are non-negative, so the result is
// in [0, 1]. Throws ValidationError if either vector is empty.
double cosine(const TokenVector& a, const TokenVector& b);

// Pairwise similarities for an ordered corpus of unique commands.
struct SimilarityMatrix {
    std::vector<std::string> commands;
    std::vector<std::vector<double>> values;  // symmetric, unit diagonal
};

SimilarityMatrix build_similarity_matrix(const std::vector<std::string>& corpus);

enum class FeatureSpace {
    SimilarityRows,  // feature row i = row i of the similarity matrix
    CountVectors,    // raw token counts over the corpus vocabulary
};

// Deduplicated corpus in first-seen order, with multiplicities for reporting.
struct Corpus {
    std::vector<std::string> commands;
    std::vector<size_t> multiplicity;
};

Corpus build_corpus(const std::vector<std::string>& raw_commands);

// Feature matrix fed to the clustering step. Requires corpus size >= 2.
std::vector<std::vector<double>> build_features(const std::vector<std::string>& corpus,
                                                FeatureSpace space = FeatureSpace::SimilarityRows);

}  // namespace iothp::analytics
