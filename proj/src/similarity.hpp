#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dataset.hpp"

namespace graminfer {

struct SimilarityHit {
  size_t index;  // position in the few-shot dataset
  double score;  // cosine similarity, in [0, 1]
};

// Text embedding is deliberately naive: the sequence of Unicode code points,
// zero-padded to a common length before cosine. Single-character texts are
// therefore always parallel (score 1.0) — a known quirk of the scheme, kept
// as-is.
std::vector<double> vectorize(std::string_view text);

// Cosine over zero-padded vectors; 0.0 when either side has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// Hits scoring >= threshold, sorted by descending score (ties keep dataset
// order), truncated to k. May return fewer than k.
std::vector<SimilarityHit> retrieve_similar(std::string_view query,
                                            const std::vector<FslRecord>& fsl, size_t k,
                                            double threshold);

}  // namespace graminfer
