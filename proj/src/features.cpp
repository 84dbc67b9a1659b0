#include "drift/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drift {

FeatureVector bigram_features(const TokenSeq& tokens, const Vocabulary& vocab) {
  if (tokens.empty()) {
    throw std::invalid_argument("bigram_features: empty sentence");
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(tokens.size());
  TokenId prev = vocab.bos_context();
  for (TokenId id : tokens) {
    keys.push_back(pack_bigram(prev, id));
    prev = id;
  }
  std::sort(keys.begin(), keys.end());

  FeatureVector fv;
  double sq = 0.0;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    double count = static_cast<double>(j - i);
    fv.entries.emplace_back(keys[i], count);
    sq += count * count;
    i = j;
  }
  fv.norm = std::sqrt(sq);
  return fv;
}

FeatureVector bigram_features(const Sentence& sentence, const Vocabulary& vocab) {
  return bigram_features(vocab.encode(sentence.tokens), vocab);
}

double cosine(const FeatureVector& u, const FeatureVector& v) {
  if (u.norm <= 0.0 || v.norm <= 0.0) {
    throw std::invalid_argument("cosine: zero-norm feature vector");
  }
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < u.entries.size() && j < v.entries.size()) {
    if (u.entries[i].first < v.entries[j].first) {
      ++i;
    } else if (u.entries[i].first > v.entries[j].first) {
      ++j;
    } else {
      dot += u.entries[i].second * v.entries[j].second;
      ++i;
      ++j;
    }
  }
  double sim = dot / (u.norm * v.norm);
  return std::min(1.0, std::max(0.0, sim));
}

}  // namespace drift
