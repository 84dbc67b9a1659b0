#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "drift/clustering.hpp"
#include "drift/corpus.hpp"

namespace drift {

// Smoothed bigram model of one HMM state.
//
// Normal kind:    p(w'|w) = (f(w,w') + d1) / (f(w) + d1*|V|)
// where f(w) is the bigram-context count (the number of successors of w,
// with BOS contexts counted), so every row sums to exactly 1.
//
// Insertion kind: p(w'|w) proportional to 1 - max over the normal states of
// their p(w'|w), normalized over the vocabulary. The tables are derived
// from the normal states and rebuilt whenever those change; only counts are
// ever serialized.
class StateLm {
 public:
  enum class Kind { normal, insertion };

  StateLm() = default;

  Kind kind() const { return kind_; }
  double delta1() const { return delta1_; }
  std::size_t vocab_size() const { return vocab_size_; }

  double prob(TokenId context, TokenId next) const;
  double logprob(TokenId context, TokenId next) const;
  double sentence_logprob(std::span<const TokenId> tokens, TokenId bos) const;

  std::int64_t bigram_count(TokenId context, TokenId next) const;
  std::int64_t context_count(TokenId context) const;
  // Sorted (context, next, count) triples with count > 0.
  std::vector<std::tuple<TokenId, TokenId, std::int64_t>> bigram_counts() const;

  friend StateLm estimate_emission(const std::vector<const TokenSeq*>& cluster,
                                   double delta1, const Vocabulary& vocab);
  friend StateLm estimate_insertion(const std::vector<StateLm>& other_states,
                                    const Vocabulary& vocab);
  friend class ContentModel;  // rebuilds counts when deserializing

 private:
  Kind kind_ = Kind::normal;
  double delta1_ = 0.0;
  std::size_t vocab_size_ = 0;
  std::size_t context_capacity_ = 0;

  // normal kind
  std::unordered_map<std::uint64_t, std::int64_t> bigrams_;
  std::vector<std::int64_t> context_counts_;

  // insertion kind: max over normal states of p(w'|w), sparse over bigrams
  // seen anywhere, with per-context defaults and normalizers.
  std::unordered_map<std::uint64_t, double> max_seen_;
  std::vector<double> default_max_;  // max_i d1/(f_i(w)+d1|V|)
  std::vector<double> denom_;        // sum_u (1 - max_i p_i(u|w))
};

// Emission model from the sentences of one cluster. An empty cluster yields
// the uniform model 1/|V|.
StateLm estimate_emission(const std::vector<const TokenSeq*>& cluster,
                          double delta1, const Vocabulary& vocab);
StateLm estimate_emission(const std::vector<TokenSeq>& cluster, double delta1,
                          const Vocabulary& vocab);

// Complementary insertion model over the given normal states.
StateLm estimate_insertion(const std::vector<StateLm>& other_states,
                           const Vocabulary& vocab);

struct TransitionMatrix {
  int m = 0;
  std::vector<double> probs;  // row-major m*m, rows renormalized to sum 1
  std::vector<double> pi;     // initial distribution, sums to 1
  std::vector<double> end;    // per-state final-transition weight
  double delta2 = 0.0;

  double at(int from, int to) const { return probs[from * m + to]; }
};

// Smoothed transition estimates from per-document cluster-label sequences:
// p(s_j|s_i) = (D(c_i,c_j) + d2) / (D(c_i) + d2*m), renormalized by row,
// where D(c_i,c_j) counts documents in which c_i immediately precedes c_j
// and D(c_i) counts documents containing c_i. pi uses the documents' first
// sentences in place of D(c_i,c_j) with D(init) = #documents; end uses last
// sentences and is kept as a raw weight (it is a termination factor, not a
// distribution over states).
TransitionMatrix estimate_transitions(
    const std::vector<std::vector<int>>& doc_labels, int m, double delta2);
TransitionMatrix estimate_transitions(const Clustering& clustering,
                                      const std::vector<Document>& documents,
                                      double delta2);

struct Hyperparams {
  int k = 0;
  int T = 0;
  double delta1 = 1e-6;
  double delta2 = 1e-2;
  bool use_end = true;
};

struct ViterbiResult {
  std::vector<int> states;
  double log_score = 0.0;
};

// The content HMM: normal states 0..m-2, insertion state m-1, smoothed
// transitions with dummy-initial pi and optional dummy-final end weights.
// Immutable after construction; scoring calls are safe to run concurrently.
class ContentModel {
 public:
  ContentModel(Vocabulary vocab, std::vector<StateLm> normal_states,
               TransitionMatrix transitions, Hyperparams hp,
               std::string version = "1");

  int num_states() const { return static_cast<int>(states_.size()); }
  int insertion_state() const { return num_states() - 1; }
  const Vocabulary& vocab() const { return vocab_; }
  const StateLm& state(int i) const { return states_.at(i); }
  const TransitionMatrix& transitions() const { return transitions_; }
  const Hyperparams& hyperparams() const { return hp_; }
  const std::string& version() const { return version_; }

  double emission_logprob(int state, std::span<const TokenId> tokens) const;

  // Emission log-prob table: row per state, column per sentence.
  std::vector<std::vector<double>> emission_matrix(
      const std::vector<TokenSeq>& sentences) const;

  // log p(document) by the forward recursion over the emission table
  // columns in the given order (defaults to identity).
  double forward_logprob(const std::vector<std::vector<double>>& emissions,
                         std::span<const int> order) const;
  double forward_logprob(const std::vector<TokenSeq>& sentences) const;
  double forward_logprob(const Document& document) const;

  // Most likely state sequence; backpointer ties resolve to the lower
  // state index.
  ViterbiResult viterbi_decode(const std::vector<std::vector<double>>& emissions) const;
  ViterbiResult viterbi_decode(const std::vector<TokenSeq>& sentences) const;
  ViterbiResult viterbi_decode(const Document& document) const;

  std::vector<TokenSeq> encode(const Document& document) const;

  std::string to_json() const;
  static ContentModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static ContentModel load(const std::string& path);

 private:
  Vocabulary vocab_;
  std::vector<StateLm> states_;  // last is the insertion state
  TransitionMatrix transitions_;
  Hyperparams hp_;
  std::string version_;
  std::vector<double> log_trans_;
  std::vector<double> log_pi_;
  std::vector<double> log_end_;
};

}  // namespace drift
