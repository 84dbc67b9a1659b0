#pragma once

#include <string>
#include <vector>

#include "drift/clustering.hpp"
#include "drift/content_model.hpp"
#include "drift/corpus.hpp"
#include "drift/ordering.hpp"

namespace drift {

struct TrainConfig {
  int k = 40;           // initial cluster count
  int T = 4;            // minimum cluster size
  double delta1 = 1e-6;
  double delta2 = 1e-2;
  int max_iterations = 20;
  bool use_end = true;
  // When >= 2, merge smallest content clusters into etcetera until this
  // many clusters (counting etcetera) remain, before estimation.
  int m_target = 0;
};

struct TrainResult {
  ContentModel model;
  Clustering clustering;  // final assignment over the training sentences
  int iterations = 0;     // decode passes performed
  bool converged = false;
  std::vector<double> loglik_per_iteration;  // corpus log-likelihood per pass
};

// Emission, insertion and transition estimates for a clustering whose last
// cluster is etcetera (mapped to the insertion state).
ContentModel estimate_model(const Clustering& clustering, const Corpus& corpus,
                            const TrainConfig& config);

// Pipeline: complete-link clustering of all sentences, merge clusters
// smaller than T into etcetera, optionally force the cluster count down to
// m_target, estimate, then re-estimate until the assignment map repeats or
// max_iterations is hit (converged=false in that case).
TrainResult build_content_model(const Corpus& corpus, const TrainConfig& config,
                                int jobs = 1);

// The re-estimation loop alone: repeat {decode every training document;
// reassign each sentence to its decoded state's cluster; re-estimate}
// until the assignment map equals the previous pass's. Content states that
// receive zero sentences are retired. Decoding is parallel over documents;
// estimation is sequential. When the clustering that produced `model` is
// given, a first decode matching it converges in one pass.
TrainResult viterbi_reestimate(ContentModel model, const Corpus& corpus,
                               const TrainConfig& config, int jobs = 1,
                               const Clustering* initial_clustering = nullptr);

// Merge the smallest content cluster (ties: lowest index) into etcetera
// until m_target clusters (counting etcetera) remain.
Clustering force_state_count(const Clustering& clustering, int m_target);

struct GridSpec {
  std::vector<int> k_values{10, 20, 40, 60, 80, 100};
  std::vector<int> t_values{2, 4, 8};
  std::vector<double> delta1_values{1e-8, 1e-6, 1e-4};
  std::vector<double> delta2_values{1e-4, 1e-2, 0.1};
  PermutationCap cap;
  int max_iterations = 20;
  bool use_end = true;
};

struct GridCell {
  TrainConfig config;
  double oso_prediction_rate = -1.0;
  double mean_rank = 0.0;
  double mean_tau = 0.0;
  int num_states = 0;
  bool failed = false;
  std::string error;
};

struct TuneResult {
  TrainConfig best;
  std::vector<GridCell> cells;
};

// Exhaustive grid evaluation: train on `train`, score OSO prediction rate
// on `dev` per cell. Ties prefer smaller k, then larger T, then smaller
// delta1, then smaller delta2. Cells that fail to train are kept in the
// table with their error; if every cell fails, throws.
TuneResult tune_parameters(const Corpus& train, const Corpus& dev,
                           const GridSpec& grid, int jobs = 1);

struct CurvePoint {
  int train_size = 0;
  double oso_prediction_rate = 0.0;
  double mean_rank = 0.0;
  double mean_tau = 0.0;
};

// For each size, train on a seeded random subset of the corpus and
// evaluate ordering on `test`. Subsets are a pure function of (seed, size).
std::vector<CurvePoint> learning_curve(const Corpus& corpus,
                                       const TrainConfig& config,
                                       const std::vector<int>& sizes,
                                       const Corpus& test,
                                       const PermutationCap& cap,
                                       std::uint64_t seed, int jobs = 1);

struct SizeSweepEntry {
  int m_target = 0;
  TrainResult result;
  OrderingReport ordering;
};

// Re-train with the cluster count forced to each target and evaluate
// ordering. The caller can add task metrics that need extra inputs.
std::vector<SizeSweepEntry> size_sweep(const Corpus& corpus,
                                       const TrainConfig& config,
                                       const std::vector<int>& m_targets,
                                       const Corpus& test,
                                       const PermutationCap& cap, int jobs = 1);

}  // namespace drift
