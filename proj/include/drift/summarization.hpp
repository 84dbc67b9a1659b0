#pragma once

#include <string>
#include <vector>

#include "drift/content_model.hpp"
#include "drift/corpus.hpp"

namespace drift {

struct AlignedPair {
  Document full;
  Document summary;
  std::vector<int> gold_indices;  // sorted positions into full
};

// Greedy one-to-one alignment of summary sentences to full-document
// sentences by descending bigram cosine, keeping matches at or above the
// threshold. Unaligned summary sentences are dropped with a warning on
// stderr. Throws "pair unusable" when nothing aligns.
AlignedPair align_summary(const Document& full, const Document& summary,
                          double threshold = 0.5);

struct StateSummaryStats {
  double summary_prob = 0.0;  // defined only when eligible
  int support_docs = 0;       // full articles whose V-topics include the state
  int both_docs = 0;          // pairs where full and summary share the state
  bool eligible = false;
};

struct SummaryModel {
  std::vector<StateSummaryStats> states;  // one per model state
  int min_support = 3;

  std::string to_json() const;
  static SummaryModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static SummaryModel load(const std::string& path);
};

// V-topic of a sentence = its Viterbi state; summaries are decoded as
// their own document sequences. For each state with at least min_support
// full articles containing it, summary_prob = share of those pairs whose
// summary also contains it.
SummaryModel train_summarizer(const ContentModel& model,
                              const std::vector<AlignedPair>& pairs,
                              int min_support = 3);

// Extract min(ell, N) sentence indices: pick the top-ell eligible states
// among the document's V-topics by summary_prob (ties: lower state index),
// keep sentences of those states prioritized by state probability then
// position, and backfill with leading unselected sentences. Output sorted
// by position.
std::vector<int> summarize(const ContentModel& model, const SummaryModel& summ,
                           const Document& document, int ell);

std::vector<int> lead_baseline(const Document& document, int ell);

// |predicted ∩ gold| / |predicted|.
double extraction_accuracy(const std::vector<int>& predicted,
                           const std::vector<int>& gold);

struct SummaryEval {
  std::string doc_id;
  std::vector<int> predicted;
  std::vector<int> gold;
  double accuracy = 0.0;
};

struct SummarizationReport {
  std::string system;
  int num_docs = 0;
  double mean_accuracy = 0.0;
  std::vector<SummaryEval> per_doc;
};

// Per test pair, summarize the full document with ell = |gold| and score
// against the aligned gold indices.
SummarizationReport evaluate_summarization(const ContentModel& model,
                                           const SummaryModel& summ,
                                           const std::vector<AlignedPair>& pairs,
                                           int jobs = 1);
SummarizationReport evaluate_lead(const std::vector<AlignedPair>& pairs);

}  // namespace drift
