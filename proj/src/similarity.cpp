#include "similarity.hpp"

#include <algorithm>
#include <cmath>

#include "util.hpp"

namespace graminfer {

std::vector<double> vectorize(std::string_view text) {
  std::u32string cps = utf8_decode(text);
  std::vector<double> out;
  out.reserve(cps.size());
  for (char32_t c : cps) out.push_back(static_cast<double>(c));
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  size_t n = std::max(a.size(), b.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double x = i < a.size() ? a[i] : 0.0;
    double y = i < b.size() ? b[i] : 0.0;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  double score = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(score, 0.0, 1.0);
}

std::vector<SimilarityHit> retrieve_similar(std::string_view query,
                                            const std::vector<FslRecord>& fsl, size_t k,
                                            double threshold) {
  std::vector<double> qv = vectorize(query);
  std::vector<SimilarityHit> hits;
  for (size_t i = 0; i < fsl.size(); ++i) {
    double score = cosine(qv, vectorize(fsl[i].code));
    if (score >= threshold) hits.push_back({i, score});
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const SimilarityHit& a, const SimilarityHit& b) {
                     return a.score > b.score;
                   });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace graminfer
