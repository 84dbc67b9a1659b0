#include "drift/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "drift/parallel.hpp"
#include "drift/rng.hpp"

namespace drift {
namespace {

void validate_config(const TrainConfig& config) {
  if (config.k < 2) throw std::invalid_argument("k must be >= 2");
  if (config.T < 1) throw std::invalid_argument("T must be >= 1");
  if (config.delta1 <= 0.0) throw std::invalid_argument("delta1 must be > 0");
  if (config.delta2 <= 0.0) throw std::invalid_argument("delta2 must be > 0");
  if (config.max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  if (config.m_target != 0 && config.m_target < 2) {
    throw std::invalid_argument("m_target must be >= 2");
  }
}

std::vector<std::vector<int>> split_labels(
    const std::vector<int>& flat, const std::vector<std::vector<TokenSeq>>& docs) {
  std::vector<std::vector<int>> out(docs.size());
  std::size_t ordinal = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    out[d].assign(flat.begin() + ordinal, flat.begin() + ordinal + docs[d].size());
    ordinal += docs[d].size();
  }
  if (ordinal != flat.size()) {
    throw std::invalid_argument("clustering does not cover the corpus");
  }
  return out;
}

std::vector<int> flatten_labels(const std::vector<std::vector<int>>& doc_labels) {
  std::vector<int> flat;
  for (const std::vector<int>& labels : doc_labels) {
    flat.insert(flat.end(), labels.begin(), labels.end());
  }
  return flat;
}

ContentModel estimate_from(const std::vector<std::vector<int>>& doc_labels,
                           int m, const std::vector<std::vector<TokenSeq>>& docs,
                           const Vocabulary& vocab, const TrainConfig& config) {
  std::vector<std::vector<const TokenSeq*>> cluster_sents(m);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t s = 0; s < docs[d].size(); ++s) {
      cluster_sents.at(doc_labels[d][s]).push_back(&docs[d][s]);
    }
  }
  std::vector<StateLm> normals;
  normals.reserve(m - 1);
  for (int i = 0; i + 1 < m; ++i) {
    normals.push_back(estimate_emission(cluster_sents[i], config.delta1, vocab));
  }
  TransitionMatrix transitions = estimate_transitions(doc_labels, m, config.delta2);
  Hyperparams hp{config.k, config.T, config.delta1, config.delta2,
                 config.use_end};
  return ContentModel(vocab, std::move(normals), std::move(transitions), hp);
}

// Retire empty content clusters in place; returns the new cluster count.
int retire_empty(std::vector<std::vector<int>>& doc_labels, int m) {
  std::vector<std::int64_t> counts(m, 0);
  for (const std::vector<int>& labels : doc_labels) {
    for (int c : labels) ++counts.at(c);
  }
  std::vector<int> remap(m, -1);
  int next = 0;
  for (int i = 0; i + 1 < m; ++i) {
    if (counts[i] > 0) remap[i] = next++;
  }
  const int new_m = next + 1;  // etcetera stays last
  remap[m - 1] = new_m - 1;
  if (new_m == m) return m;
  if (new_m < 2) {
    throw std::runtime_error("re-estimation retired every content state");
  }
  for (std::vector<int>& labels : doc_labels) {
    for (int& c : labels) c = remap[c];
  }
  return new_m;
}

}  // namespace

ContentModel estimate_model(const Clustering& clustering, const Corpus& corpus,
                            const TrainConfig& config) {
  validate_config(config);
  if (!clustering.etcetera_index ||
      *clustering.etcetera_index != clustering.m - 1) {
    throw std::invalid_argument(
        "estimate_model: clustering must end with the etcetera cluster");
  }
  auto docs = encode_corpus(corpus);
  auto doc_labels = split_labels(clustering.assignments, docs);
  return estimate_from(doc_labels, clustering.m, docs, corpus.vocabulary,
                       config);
}

TrainResult viterbi_reestimate(ContentModel model, const Corpus& corpus,
                               const TrainConfig& config, int jobs,
                               const Clustering* initial_clustering) {
  validate_config(config);
  const std::vector<std::vector<TokenSeq>> docs = [&] {
    std::vector<std::vector<TokenSeq>> out;
    out.reserve(corpus.documents.size());
    for (const Document& doc : corpus.documents) {
      out.push_back(model.encode(doc));
    }
    return out;
  }();
  for (const auto& doc : docs) {
    if (doc.empty()) {
      throw std::invalid_argument("viterbi_reestimate: empty document");
    }
  }

  TrainResult result{std::move(model), Clustering{}, 0, false, {}};

  std::vector<int> prev_flat;
  int prev_m = -1;
  if (initial_clustering) {
    prev_flat = initial_clustering->assignments;
    prev_m = initial_clustering->m;
  }

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    std::vector<std::vector<int>> doc_labels(docs.size());
    std::vector<double> doc_loglik(docs.size(), 0.0);
    parallel_for(docs.size(), jobs, [&](std::size_t d) {
      auto emissions = result.model.emission_matrix(docs[d]);
      doc_labels[d] = result.model.viterbi_decode(emissions).states;
      std::vector<int> identity(docs[d].size());
      std::iota(identity.begin(), identity.end(), 0);
      doc_loglik[d] = result.model.forward_logprob(emissions, identity);
    });
    double total = 0.0;
    for (double ll : doc_loglik) total += ll;
    result.loglik_per_iteration.push_back(total);
    result.iterations = iter;

    int m = result.model.num_states();
    m = retire_empty(doc_labels, m);
    std::vector<int> flat = flatten_labels(doc_labels);
    result.clustering = Clustering{flat, m, m - 1};
    if (m == prev_m && flat == prev_flat) {
      result.converged = true;
      break;
    }
    result.model =
        estimate_from(doc_labels, m, docs, result.model.vocab(), config);
    prev_flat = std::move(flat);
    prev_m = m;
  }
  return result;
}

TrainResult build_content_model(const Corpus& corpus, const TrainConfig& config,
                                int jobs) {
  validate_config(config);
  if (corpus.documents.size() < 2) {
    throw std::invalid_argument("need at least 2 documents");
  }
  std::vector<Sentence> sentences;
  sentences.reserve(corpus.total_sentences());
  for (const Document& doc : corpus.documents) {
    for (const Sentence& sent : doc.sentences) sentences.push_back(sent);
  }

  Clustering initial =
      complete_link_cluster(sentences, corpus.vocabulary, config.k, jobs);
  initial = merge_small_clusters(initial, config.T);
  if (config.m_target >= 2) {
    initial = force_state_count(initial, config.m_target);
  }

  ContentModel model = estimate_model(initial, corpus, config);
  return viterbi_reestimate(std::move(model), corpus, config, jobs, &initial);
}

Clustering force_state_count(const Clustering& clustering, int m_target) {
  if (!clustering.etcetera_index ||
      *clustering.etcetera_index != clustering.m - 1) {
    throw std::invalid_argument(
        "force_state_count: clustering must end with the etcetera cluster");
  }
  if (m_target < 2) throw std::invalid_argument("m_target must be >= 2");
  if (m_target > clustering.m) {
    throw std::invalid_argument("m_target exceeds current cluster count");
  }
  if (m_target == clustering.m) return clustering;

  std::vector<int> sizes = clustering.cluster_sizes();
  const int m = clustering.m;
  std::vector<bool> alive(m, true);
  int total = m;
  while (total > m_target) {
    int pick = -1;
    for (int i = 0; i + 1 < m; ++i) {
      if (!alive[i]) continue;
      if (pick < 0 || sizes[i] < sizes[pick]) pick = i;
    }
    alive[pick] = false;
    --total;
  }
  std::vector<int> remap(m, -1);
  int next = 0;
  for (int i = 0; i + 1 < m; ++i) {
    if (alive[i]) remap[i] = next++;
  }
  remap[m - 1] = next;  // etcetera absorbs the rest
  Clustering out;
  out.m = m_target;
  out.etcetera_index = m_target - 1;
  out.assignments.reserve(clustering.assignments.size());
  for (int c : clustering.assignments) {
    out.assignments.push_back(remap[c] >= 0 ? remap[c] : m_target - 1);
  }
  return out;
}

TuneResult tune_parameters(const Corpus& train, const Corpus& dev,
                           const GridSpec& grid, int jobs) {
  if (dev.documents.empty()) {
    throw std::invalid_argument("tune_parameters: empty dev corpus");
  }
  if (grid.k_values.empty() || grid.t_values.empty() ||
      grid.delta1_values.empty() || grid.delta2_values.empty()) {
    throw std::invalid_argument("tune_parameters: empty grid dimension");
  }

  std::vector<TrainConfig> configs;
  for (int k : grid.k_values) {
    for (int T : grid.t_values) {
      for (double d1 : grid.delta1_values) {
        for (double d2 : grid.delta2_values) {
          TrainConfig cfg;
          cfg.k = k;
          cfg.T = T;
          cfg.delta1 = d1;
          cfg.delta2 = d2;
          cfg.max_iterations = grid.max_iterations;
          cfg.use_end = grid.use_end;
          configs.push_back(cfg);
        }
      }
    }
  }

  TuneResult result;
  result.cells.resize(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    GridCell& cell = result.cells[i];
    cell.config = configs[i];
    try {
      TrainResult trained = build_content_model(train, configs[i], 1);
      ContentModelScorer scorer(trained.model);
      OrderingReport report = evaluate_ordering(scorer, dev, grid.cap, 1);
      cell.oso_prediction_rate = report.oso_prediction_rate;
      cell.mean_rank = report.mean_rank;
      cell.mean_tau = report.mean_tau;
      cell.num_states = trained.model.num_states();
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  });

  const GridCell* best = nullptr;
  for (const GridCell& cell : result.cells) {
    if (cell.failed) continue;
    if (!best) {
      best = &cell;
      continue;
    }
    const auto key = [](const GridCell& c) {
      return std::make_tuple(-c.oso_prediction_rate, c.config.k, -c.config.T,
                             c.config.delta1, c.config.delta2);
    };
    if (key(cell) < key(*best)) best = &cell;
  }
  if (!best) {
    throw std::runtime_error("tune_parameters: every grid cell failed: " +
                             result.cells.front().error);
  }
  result.best = best->config;
  return result;
}

std::vector<CurvePoint> learning_curve(const Corpus& corpus,
                                       const TrainConfig& config,
                                       const std::vector<int>& sizes,
                                       const Corpus& test,
                                       const PermutationCap& cap,
                                       std::uint64_t seed, int jobs) {
  validate_config(config);
  if (sizes.empty()) throw std::invalid_argument("learning_curve: no sizes");
  const int available = static_cast<int>(corpus.documents.size());
  for (int size : sizes) {
    if (size < 2 || size > available) {
      throw std::invalid_argument(
          "learning_curve: size must be in [2, #documents]");
    }
  }

  std::vector<CurvePoint> points;
  for (int size : sizes) {
    std::vector<int> indices(available);
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(size)));
    for (int i = 0; i < size; ++i) {
      int j = i + static_cast<int>(uniform_below(rng, available - i));
      std::swap(indices[i], indices[j]);
    }
    indices.resize(size);
    std::sort(indices.begin(), indices.end());

    Corpus subset;
    for (int idx : indices) subset.documents.push_back(corpus.documents[idx]);
    subset.vocabulary = build_vocabulary(subset.documents);

    TrainResult trained = build_content_model(subset, config, jobs);
    ContentModelScorer scorer(trained.model);
    OrderingReport report = evaluate_ordering(scorer, test, cap, jobs);
    points.push_back(CurvePoint{size, report.oso_prediction_rate,
                                report.mean_rank, report.mean_tau});
  }
  return points;
}

std::vector<SizeSweepEntry> size_sweep(const Corpus& corpus,
                                       const TrainConfig& config,
                                       const std::vector<int>& m_targets,
                                       const Corpus& test,
                                       const PermutationCap& cap, int jobs) {
  if (m_targets.empty()) throw std::invalid_argument("size_sweep: no targets");
  std::vector<SizeSweepEntry> entries;
  std::string first_error;
  for (int target : m_targets) {
    TrainConfig cfg = config;
    cfg.m_target = target;
    // Whether a target is attainable depends on how many clusters survive
    // the small-cluster merge, which the caller cannot know up front. Skip
    // such targets instead of discarding the sizes that did train; only the
    // m_target varies per pass, so a partial failure is always that.
    try {
      TrainResult trained = build_content_model(corpus, cfg, jobs);
      ContentModelScorer scorer(trained.model);
      OrderingReport report = evaluate_ordering(scorer, test, cap, jobs);
      entries.push_back(
          SizeSweepEntry{target, std::move(trained), std::move(report)});
    } catch (const std::invalid_argument& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (entries.empty()) {
    throw std::invalid_argument("size_sweep: every target failed: " +
                                first_error);
  }
  return entries;
}

}  // namespace drift
