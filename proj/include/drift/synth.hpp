#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drift/corpus.hpp"

namespace drift {

// Planted HMM over synthetic 3-letter words. Each state owns a disjoint
// vocabulary (prefix 'a' + state index); all states share a function-word
// pool (prefix 'z') that receives `overlap` of each context's emission
// mass. Per-context successor weights are random multinomials.
struct PlantedSpec {
  int num_states = 4;
  int words_per_state = 50;
  int shared_words = 20;
  double overlap = 0.1;

  // Row-major num_states x num_states, rows summing to 1. Empty means the
  // uniform-exit pattern: self_transition on the diagonal, rest split
  // evenly. The start state is uniform.
  std::vector<double> transitions;
  double self_transition = 0.6;

  int num_docs = 100;
  int min_sentences = 8;
  int max_sentences = 12;
  int min_words = 5;
  int max_words = 12;

  // Gold summary = sentences whose planted state is in summary_states,
  // capped at summary_cap (0 = keep all) by priority = position in this
  // list, then by sentence position.
  std::vector<int> summary_states = {0};
  int summary_cap = 0;

  std::uint64_t seed = 42;
};

struct PlantedCorpus {
  Corpus corpus;
  std::vector<std::vector<int>> labels;          // [doc][sentence]
  std::vector<std::vector<int>> gold_summaries;  // per doc, sorted positions
};

// Deterministic for a given spec: emission tables use one derived seed,
// each document another, so results do not depend on jobs.
PlantedCorpus generate_corpus(const PlantedSpec& spec, int jobs = 1);

// Summary documents ("<doc_id>-sum") holding copies of the gold sentences,
// re-indexed from 0. Documents with an empty gold summary are skipped.
std::vector<Document> extract_summary_documents(const PlantedCorpus& planted);

// One record per document: {"doc_id", "labels", "gold_summary_indices"}.
void save_sidecar_jsonl(const PlantedCorpus& planted, const std::string& path);

}  // namespace drift
