#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "drift/features.hpp"

namespace drift {

// Partition of the training sentences (by flattened corpus ordinal) into
// dense cluster indices 0..m-1. When etcetera_index is set it is always the
// last cluster and may be empty; all other clusters are non-empty.
struct Clustering {
  std::vector<int> assignments;
  int m = 0;
  std::optional<int> etcetera_index;

  std::vector<int> cluster_sizes() const;
};

// Agglomerative complete-link clustering: inter-cluster similarity is the
// minimum pairwise cosine, the most similar pair merges each step, and on
// equal similarity the pair with the lexicographically smallest
// (min id, max id) merges first, where a cluster's id is the smallest
// sentence ordinal it contains. Stops at k clusters; etcetera_index unset.
Clustering complete_link_cluster(const std::vector<FeatureVector>& features,
                                 int k, int jobs = 1);
Clustering complete_link_cluster(const std::vector<Sentence>& sentences,
                                 const Vocabulary& vocab, int k, int jobs = 1);

// Moves every cluster with fewer than T sentences into a single new last
// cluster (the etcetera cluster, kept even when empty); survivors are
// renumbered in relative order. Throws when no cluster reaches T.
Clustering merge_small_clusters(const Clustering& clustering, int T);

// Debug dump: one (doc_id, index, cluster_id) TSV row per sentence, in
// corpus order.
void dump_clustering_tsv(const Clustering& clustering,
                         const std::vector<Sentence>& sentences,
                         std::ostream& out);

// Hard cap on the dense similarity matrix.
inline constexpr std::size_t kMaxClusterInput = 4000;

}  // namespace drift
