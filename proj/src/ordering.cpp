#include "drift/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "drift/parallel.hpp"
#include "drift/rng.hpp"

namespace drift {
namespace {

void check_permutation(std::span<const int> sigma) {
  std::vector<bool> seen(sigma.size(), false);
  for (int v : sigma) {
    if (v < 0 || static_cast<std::size_t>(v) >= sigma.size() || seen[v]) {
      throw std::invalid_argument("not a permutation of 0..N-1");
    }
    seen[v] = true;
  }
}

// Inversions by merge sort.
std::uint64_t count_inversions(std::vector<int>& a, std::vector<int>& tmp,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(a, tmp, lo, mid) +
                      count_inversions(a, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[i] <= a[j]) {
      tmp[k++] = a[i++];
    } else {
      inv += mid - i;
      tmp[k++] = a[j++];
    }
  }
  while (i < mid) tmp[k++] = a[i++];
  while (j < hi) tmp[k++] = a[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, a.begin() + lo);
  return inv;
}

double factorial_as_double(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::uint64_t factorial_u64(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

// Lexicographic unranking in the factorial number system.
std::vector<int> unrank_permutation(std::uint64_t index, int n) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> perm;
  perm.reserve(n);
  std::uint64_t f = factorial_u64(n);
  for (int i = n; i >= 1; --i) {
    f /= static_cast<std::uint64_t>(i);
    std::size_t pick = static_cast<std::size_t>(index / f);
    index %= f;
    perm.push_back(pool[pick]);
    pool.erase(pool.begin() + pick);
  }
  return perm;
}

class ContentModelDocScorer : public DocumentScorer {
 public:
  ContentModelDocScorer(const ContentModel& model,
                        std::vector<std::vector<double>> emissions, int n)
      : model_(model), emissions_(std::move(emissions)), n_(n) {}
  int size() const override { return n_; }
  double score(std::span<const int> order) const override {
    return model_.forward_logprob(emissions_, order);
  }

 private:
  const ContentModel& model_;
  std::vector<std::vector<double>> emissions_;
  int n_;
};

class ResetBigramDocScorer : public DocumentScorer {
 public:
  ResetBigramDocScorer(double total, int n) : total_(total), n_(n) {}
  int size() const override { return n_; }
  double score(std::span<const int>) const override { return total_; }

 private:
  double total_;
  int n_;
};

class ChainBigramDocScorer : public DocumentScorer {
 public:
  ChainBigramDocScorer(double interior, std::vector<double> start,
                       std::vector<double> link, int n)
      : interior_(interior), start_(std::move(start)), link_(std::move(link)),
        n_(n) {}
  int size() const override { return n_; }
  double score(std::span<const int> order) const override {
    double total = interior_ + start_[order[0]];
    for (std::size_t t = 1; t < order.size(); ++t) {
      total += link_[static_cast<std::size_t>(order[t - 1]) * n_ + order[t]];
    }
    return total;
  }

 private:
  double interior_;
  std::vector<double> start_;  // log p(first(s) | BOS)
  std::vector<double> link_;   // log p(first(b) | last(a)), row-major
  int n_;
};

struct ChunkBest {
  std::uint64_t greater = 0;
  std::uint64_t greater_equal = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::uint64_t best_index = 0;
  bool has_best = false;
};

}  // namespace

double kendall_tau(std::span<const int> sigma) {
  if (sigma.size() < 2) {
    throw std::invalid_argument("kendall_tau: need at least 2 items");
  }
  check_permutation(sigma);
  std::vector<int> a(sigma.begin(), sigma.end());
  std::vector<int> tmp(a.size());
  const double inv = static_cast<double>(count_inversions(a, tmp, 0, a.size()));
  const double pairs = 0.5 * static_cast<double>(a.size()) *
                       static_cast<double>(a.size() - 1);
  return 1.0 - 2.0 * inv / pairs;
}

std::unique_ptr<DocumentScorer> ContentModelScorer::prepare(
    const Document& doc) const {
  auto encoded = model_.encode(doc);
  const int n = static_cast<int>(encoded.size());
  return std::make_unique<ContentModelDocScorer>(
      model_, model_.emission_matrix(encoded), n);
}

BigramBaseline train_bigram_baseline(const Corpus& corpus, double delta1) {
  BigramBaseline baseline;
  baseline.vocab = corpus.vocabulary;
  std::vector<TokenSeq> sentences;
  sentences.reserve(corpus.total_sentences());
  for (const Document& doc : corpus.documents) {
    for (const Sentence& sent : doc.sentences) {
      sentences.push_back(baseline.vocab.encode(sent.tokens));
    }
  }
  baseline.lm = estimate_emission(sentences, delta1, baseline.vocab);
  return baseline;
}

std::unique_ptr<DocumentScorer> BigramBaselineScorer::prepare(
    const Document& doc) const {
  const Vocabulary& vocab = baseline_.vocab;
  const TokenId bos = vocab.bos_context();
  std::vector<TokenSeq> encoded;
  encoded.reserve(doc.sentences.size());
  for (const Sentence& sent : doc.sentences) {
    if (sent.tokens.empty()) {
      throw std::invalid_argument("baseline scorer: empty sentence");
    }
    encoded.push_back(vocab.encode(sent.tokens));
  }
  const int n = static_cast<int>(encoded.size());

  if (mode_ == BaselineMode::bos_reset) {
    double total = 0.0;
    for (const TokenSeq& seq : encoded) {
      total += baseline_.lm.sentence_logprob(seq, bos);
    }
    return std::make_unique<ResetBigramDocScorer>(total, n);
  }

  double interior = 0.0;
  std::vector<double> start(n);
  std::vector<double> link(static_cast<std::size_t>(n) * n, 0.0);
  for (int s = 0; s < n; ++s) {
    const TokenSeq& seq = encoded[s];
    for (std::size_t t = 1; t < seq.size(); ++t) {
      interior += baseline_.lm.logprob(seq[t - 1], seq[t]);
    }
    start[s] = baseline_.lm.logprob(bos, seq.front());
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      link[static_cast<std::size_t>(a) * n + b] =
          baseline_.lm.logprob(encoded[a].back(), encoded[b].front());
    }
  }
  return std::make_unique<ChainBigramDocScorer>(interior, std::move(start),
                                                std::move(link), n);
}

double score_permutation(const OrderingScorer& scorer, const Document& doc,
                         std::span<const int> sigma) {
  if (sigma.size() != doc.sentences.size()) {
    throw std::invalid_argument("score_permutation: length mismatch");
  }
  check_permutation(sigma);
  return scorer.prepare(doc)->score(sigma);
}

double score_permutation(const ContentModel& model, const Document& doc,
                         std::span<const int> sigma) {
  return score_permutation(ContentModelScorer(model), doc, sigma);
}

OrderingResult rank_oso(const DocumentScorer& scorer, const std::string& doc_id,
                        const PermutationCap& cap, int jobs) {
  const int n = scorer.size();
  if (n < 2) throw std::invalid_argument("rank_oso: need at least 2 sentences");
  if (cap.exhaustive_max > 12) {
    throw std::invalid_argument("rank_oso: exhaustive_max above 12");
  }

  OrderingResult result;
  result.doc_id = doc_id;
  result.n = n;

  std::vector<int> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  result.oso_score = scorer.score(identity);

  if (n <= cap.exhaustive_max) {
    const std::uint64_t total = factorial_u64(n);
    result.num_permutations_scored = total;
    const int workers =
        jobs > 1 ? static_cast<int>(std::min<std::uint64_t>(jobs, total)) : 1;
    std::vector<ChunkBest> chunks(workers);
    const std::uint64_t per = total / workers;
    const std::uint64_t extra = total % workers;

    parallel_for(workers, workers, [&](std::size_t w) {
      const std::uint64_t begin = w * per + std::min<std::uint64_t>(w, extra);
      const std::uint64_t end = begin + per + (w < extra ? 1 : 0);
      ChunkBest& acc = chunks[w];
      std::vector<int> perm = unrank_permutation(begin, n);
      for (std::uint64_t idx = begin; idx < end; ++idx) {
        const double s = scorer.score(perm);
        if (s > result.oso_score) ++acc.greater;
        if (s >= result.oso_score) ++acc.greater_equal;
        if (!acc.has_best || s > acc.best_score) {
          acc.best_score = s;
          acc.best_index = idx;
          acc.has_best = true;
        }
        std::next_permutation(perm.begin(), perm.end());
      }
    });

    ChunkBest total_acc;
    for (const ChunkBest& acc : chunks) {
      total_acc.greater += acc.greater;
      total_acc.greater_equal += acc.greater_equal;
      if (acc.has_best &&
          (!total_acc.has_best || acc.best_score > total_acc.best_score)) {
        total_acc.best_score = acc.best_score;
        total_acc.best_index = acc.best_index;
        total_acc.has_best = true;
      }
    }
    result.oso_rank = total_acc.greater;
    result.oso_rank_pessimistic = total_acc.greater_equal - 1;
    result.best_perm = unrank_permutation(total_acc.best_index, n);
    result.best_score = total_acc.best_score;
    result.estimated_rank = static_cast<double>(result.oso_rank);
  } else {
    result.sampled = true;
    result.num_permutations_scored =
        1 + static_cast<std::uint64_t>(cap.sample_size);
    std::mt19937_64 rng(derive_seed(cap.seed, fnv1a64(doc_id)));
    std::uint64_t greater = 0;
    std::uint64_t greater_equal = 0;
    double best_score = result.oso_score;
    std::vector<int> best_perm = identity;
    std::vector<int> perm = identity;
    for (int s = 0; s < cap.sample_size; ++s) {
      for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(uniform_below(rng, i + 1));
        std::swap(perm[i], perm[j]);
      }
      const double score = scorer.score(perm);
      if (score > result.oso_score) ++greater;
      if (score >= result.oso_score) ++greater_equal;
      if (score > best_score) {
        best_score = score;
        best_perm = perm;
      }
    }
    result.oso_rank = greater;
    result.oso_rank_pessimistic = greater_equal;
    result.best_perm = std::move(best_perm);
    result.best_score = best_score;
    result.estimated_rank = static_cast<double>(greater) /
                            static_cast<double>(cap.sample_size) *
                            (factorial_as_double(n) - 1.0);
  }

  result.oso_predicted = result.oso_rank == 0;
  result.tau_of_best = kendall_tau(result.best_perm);
  return result;
}

OrderingResult rank_oso(const OrderingScorer& scorer, const Document& doc,
                        const PermutationCap& cap, int jobs) {
  return rank_oso(*scorer.prepare(doc), doc.doc_id, cap, jobs);
}

OrderingReport evaluate_ordering(const OrderingScorer& scorer,
                                 const Corpus& test, const PermutationCap& cap,
                                 int jobs) {
  if (test.documents.empty()) {
    throw std::invalid_argument("evaluate_ordering: empty test corpus");
  }
  OrderingReport report;
  report.system = scorer.name();
  for (const Document& doc : test.documents) {
    if (doc.sentences.size() < 2) {
      ++report.num_skipped;
      continue;
    }
    report.per_doc.push_back(rank_oso(scorer, doc, cap, jobs));
  }
  report.num_docs = static_cast<int>(report.per_doc.size());
  if (report.num_docs == 0) return report;

  double rank_sum = 0.0;
  double tau_sum = 0.0;
  int predicted = 0;
  for (const OrderingResult& r : report.per_doc) {
    rank_sum += r.estimated_rank;
    tau_sum += r.tau_of_best;
    if (r.oso_predicted) ++predicted;
    if (r.estimated_rank <= 4.0) {
      ++report.bin_rank_0_4;
    } else if (r.estimated_rank <= 10.0) {
      ++report.bin_rank_5_10;
    } else {
      ++report.bin_rank_gt_10;
    }
  }
  report.mean_rank = rank_sum / report.num_docs;
  report.oso_prediction_rate = static_cast<double>(predicted) / report.num_docs;
  report.mean_tau = tau_sum / report.num_docs;
  return report;
}

}  // namespace drift
