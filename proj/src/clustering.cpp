#include "drift/clustering.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "drift/parallel.hpp"

namespace drift {

std::vector<int> Clustering::cluster_sizes() const {
  std::vector<int> sizes(m, 0);
  for (int c : assignments) sizes.at(c) += 1;
  return sizes;
}

Clustering complete_link_cluster(const std::vector<FeatureVector>& features,
                                 int k, int jobs) {
  const std::size_t n = features.size();
  if (k < 1) throw std::invalid_argument("complete_link_cluster: k must be >= 1");
  if (n < static_cast<std::size_t>(k)) {
    throw std::invalid_argument(
        "complete_link_cluster: fewer sentences than clusters (k=" +
        std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  if (n > kMaxClusterInput) {
    throw std::invalid_argument(
        "complete_link_cluster: " + std::to_string(n) +
        " sentences exceed the dense-matrix cap of " +
        std::to_string(kMaxClusterInput) +
        "; cluster a subsample or split the corpus");
  }

  // Dense pairwise similarity, filled in parallel by row.
  std::vector<double> sim(n * n, 0.0);
  parallel_for(n, jobs, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = cosine(features[i], features[j]);
      sim[i * n + j] = s;
      sim[j * n + i] = s;
    }
  });

  // Slot i starts as sentence i; a merge keeps the lower slot, so a slot
  // index always equals the smallest ordinal in its cluster.
  std::vector<bool> active(n, true);
  std::vector<int> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);

  constexpr int kNone = -1;
  std::vector<int> best(n, kNone);  // best partner per active slot
  auto rescan = [&](std::size_t i) {
    int arg = kNone;
    double value = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      if (sim[i * n + j] > value) {
        value = sim[i * n + j];
        arg = static_cast<int>(j);
      }
    }
    best[i] = arg;
  };
  for (std::size_t i = 0; i < n; ++i) rescan(i);

  std::size_t clusters = n;
  while (clusters > static_cast<std::size_t>(k)) {
    std::size_t a = n;
    std::size_t b = n;
    double value = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || best[i] == kNone) continue;
      std::size_t j = static_cast<std::size_t>(best[i]);
      double s = sim[i * n + j];
      std::size_t lo = std::min(i, j);
      std::size_t hi = std::max(i, j);
      if (s > value || (s == value && (lo < a || (lo == a && hi < b)))) {
        value = s;
        a = lo;
        b = hi;
      }
    }

    // Complete link: similarity to the merged cluster is the row minimum.
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a || j == b) continue;
      double s = std::min(sim[a * n + j], sim[b * n + j]);
      sim[a * n + j] = s;
      sim[j * n + a] = s;
    }
    active[b] = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (parent[i] == static_cast<int>(b)) parent[i] = static_cast<int>(a);
    }
    --clusters;

    rescan(a);
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || i == a) continue;
      if (best[i] == static_cast<int>(a) || best[i] == static_cast<int>(b)) {
        rescan(i);
      }
    }
  }

  // Dense indices ordered by slot id (= smallest member ordinal).
  std::vector<int> slot_to_cluster(n, kNone);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) slot_to_cluster[i] = next++;
  }
  Clustering result;
  result.m = next;
  result.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.assignments[i] = slot_to_cluster[parent[i]];
  }
  return result;
}

Clustering complete_link_cluster(const std::vector<Sentence>& sentences,
                                 const Vocabulary& vocab, int k, int jobs) {
  std::vector<FeatureVector> features;
  features.reserve(sentences.size());
  for (const Sentence& sent : sentences) {
    features.push_back(bigram_features(sent, vocab));
  }
  return complete_link_cluster(features, k, jobs);
}

Clustering merge_small_clusters(const Clustering& clustering, int T) {
  if (clustering.etcetera_index.has_value()) {
    throw std::invalid_argument(
        "merge_small_clusters: clustering already has an etcetera cluster");
  }
  if (T < 1) throw std::invalid_argument("merge_small_clusters: T must be >= 1");

  std::vector<int> sizes = clustering.cluster_sizes();
  std::vector<int> remap(clustering.m, -1);
  int survivors = 0;
  for (int c = 0; c < clustering.m; ++c) {
    if (sizes[c] >= T) remap[c] = survivors++;
  }
  if (survivors == 0) {
    throw std::runtime_error(
        "no content states: every cluster is smaller than T=" +
        std::to_string(T));
  }
  Clustering result;
  result.m = survivors + 1;
  result.etcetera_index = survivors;
  result.assignments.reserve(clustering.assignments.size());
  for (int c : clustering.assignments) {
    result.assignments.push_back(remap[c] >= 0 ? remap[c] : survivors);
  }
  return result;
}

void dump_clustering_tsv(const Clustering& clustering,
                         const std::vector<Sentence>& sentences,
                         std::ostream& out) {
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out << sentences[i].doc_id << "\t" << sentences[i].index << "\t"
        << clustering.assignments.at(i) << "\n";
  }
}

}  // namespace drift
