#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "drift/content_model.hpp"
#include "drift/corpus.hpp"

namespace drift {

// tau(sigma) = 1 - 2*S/C(N,2) where S counts adjacent swaps needed to sort
// sigma (= inversions). Requires N >= 2 and a valid permutation of 0..N-1.
double kendall_tau(std::span<const int> sigma);

struct PermutationCap {
  int exhaustive_max = 9;  // enumerate all N! up to here (<= 12)
  int sample_size = 2000;  // random permutations beyond
  std::uint64_t seed = 0;
};

struct OrderingResult {
  std::string doc_id;
  int n = 0;
  // Count of scored permutations strictly above the original order
  // (optimistic: equal scores rank the original ahead). Pessimistic counts
  // ties against it.
  std::uint64_t oso_rank = 0;
  std::uint64_t oso_rank_pessimistic = 0;
  bool oso_predicted = false;
  std::vector<int> best_perm;  // earliest enumerated among top scores
  double tau_of_best = 0.0;
  std::uint64_t num_permutations_scored = 0;
  bool sampled = false;
  // Equals oso_rank when exhaustive; when sampled, the strictly-greater
  // fraction scaled to N!-1.
  double estimated_rank = 0.0;
  double oso_score = 0.0;
  double best_score = 0.0;
};

// Scoring handle for one document; score() must be safe to call from
// several threads at once.
class DocumentScorer {
 public:
  virtual ~DocumentScorer() = default;
  virtual int size() const = 0;
  virtual double score(std::span<const int> order) const = 0;
};

class OrderingScorer {
 public:
  virtual ~OrderingScorer() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<DocumentScorer> prepare(const Document& doc) const = 0;
};

// Scores permutations with the forward probability of the reordered
// document; sentences are encoded with the model's own vocabulary.
class ContentModelScorer : public OrderingScorer {
 public:
  explicit ContentModelScorer(const ContentModel& model) : model_(model) {}
  std::string name() const override { return "content_model"; }
  std::unique_ptr<DocumentScorer> prepare(const Document& doc) const override;

 private:
  const ContentModel& model_;
};

// Degenerate single-state model: one smoothed bigram LM over all training
// sentences.
struct BigramBaseline {
  Vocabulary vocab;
  StateLm lm;
};

BigramBaseline train_bigram_baseline(const Corpus& corpus, double delta1);

enum class BaselineMode {
  bos_reset,  // every sentence restarts from BOS; order-independent
  chain,      // sentences concatenated, bigrams cross the boundaries
};

class BigramBaselineScorer : public OrderingScorer {
 public:
  BigramBaselineScorer(const BigramBaseline& baseline, BaselineMode mode)
      : baseline_(baseline), mode_(mode) {}
  std::string name() const override {
    return mode_ == BaselineMode::chain ? "bigram_chain" : "bigram";
  }
  std::unique_ptr<DocumentScorer> prepare(const Document& doc) const override;

 private:
  const BigramBaseline& baseline_;
  BaselineMode mode_;
};

double score_permutation(const OrderingScorer& scorer, const Document& doc,
                         std::span<const int> sigma);
double score_permutation(const ContentModel& model, const Document& doc,
                         std::span<const int> sigma);

// Rank of the original order among all permutations: exhaustive when
// N <= cap.exhaustive_max, otherwise the original plus cap.sample_size
// seeded random permutations with the rank estimate scaled to N!.
// Permutation scoring is chunked across jobs with a deterministic
// reduction, so results do not depend on thread timing.
OrderingResult rank_oso(const DocumentScorer& scorer, const std::string& doc_id,
                        const PermutationCap& cap, int jobs = 1);
OrderingResult rank_oso(const OrderingScorer& scorer, const Document& doc,
                        const PermutationCap& cap, int jobs = 1);

struct OrderingReport {
  std::string system;
  int num_docs = 0;     // scored documents (N >= 2)
  int num_skipped = 0;  // shorter documents
  double mean_rank = 0.0;
  double oso_prediction_rate = 0.0;  // fraction of docs with rank 0
  double mean_tau = 0.0;
  int bin_rank_0_4 = 0;
  int bin_rank_5_10 = 0;
  int bin_rank_gt_10 = 0;
  std::vector<OrderingResult> per_doc;
};

OrderingReport evaluate_ordering(const OrderingScorer& scorer,
                                 const Corpus& test, const PermutationCap& cap,
                                 int jobs = 1);

}  // namespace drift
