#pragma once

#include <cstdint>
#include <vector>

#include "drift/corpus.hpp"

namespace drift {

inline std::uint64_t pack_bigram(TokenId context, TokenId next) {
  return (static_cast<std::uint64_t>(context) << 32) | next;
}
inline TokenId bigram_context(std::uint64_t key) {
  return static_cast<TokenId>(key >> 32);
}
inline TokenId bigram_next(std::uint64_t key) {
  return static_cast<TokenId>(key & 0xffffffffu);
}

// Sparse bigram count vector, entries sorted by packed key.
struct FeatureVector {
  std::vector<std::pair<std::uint64_t, double>> entries;
  double norm = 0.0;
};

// Counts of adjacent token pairs including the (BOS, w1) bigram.
FeatureVector bigram_features(const TokenSeq& tokens, const Vocabulary& vocab);
FeatureVector bigram_features(const Sentence& sentence, const Vocabulary& vocab);

// dot(u,v) / (|u||v|), clamped to [0,1]. Zero-norm input is an error.
double cosine(const FeatureVector& u, const FeatureVector& v);

}  // namespace drift
