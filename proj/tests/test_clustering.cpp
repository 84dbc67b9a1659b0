#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "drift/clustering.hpp"
#include "drift/corpus.hpp"
#include "drift/features.hpp"
#include "oracles.hpp"

using namespace drift;

namespace {

// Sentences over per-group token inventories. Same-group sentences share
// bigrams, cross-group ones share nothing, so the intended partition has
// within-group similarity > 0 and cross-group similarity 0.
struct GroupedFixture {
  std::vector<Sentence> sentences;
  std::vector<int> truth;
  Vocabulary vocab;
};

GroupedFixture make_grouped(const std::vector<int>& group_sizes) {
  GroupedFixture fx;
  Document doc;
  doc.doc_id = "d";
  int ordinal = 0;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    const std::string base = "tok" + std::to_string(g);
    for (int i = 0; i < group_sizes[g]; ++i) {
      Sentence s;
      s.doc_id = "d";
      s.index = ordinal++;
      // rotate through a few variants so the group is not all-identical
      s.tokens = {base + "a", base + (i % 2 ? "b" : "c"), base + "a"};
      fx.truth.push_back(static_cast<int>(g));
      doc.sentences.push_back(s);
    }
  }
  fx.vocab = build_vocabulary({doc});
  fx.sentences = doc.sentences;
  return fx;
}

std::vector<FeatureVector> features_of(const GroupedFixture& fx) {
  std::vector<FeatureVector> out;
  for (const Sentence& s : fx.sentences) {
    out.push_back(bigram_features(s, fx.vocab));
  }
  return out;
}

}  // namespace

TEST_CASE("separated groups are recovered exactly") {
  GroupedFixture fx = make_grouped({4, 3, 5});
  Clustering result = complete_link_cluster(fx.sentences, fx.vocab, 3);
  REQUIRE(result.m == 3);
  CHECK(!result.etcetera_index.has_value());
  CHECK(oracle::canonical_partition(result.assignments) ==
        oracle::canonical_partition(fx.truth));
  // dense labels, every cluster non-empty
  auto sizes = result.cluster_sizes();
  REQUIRE(sizes.size() == 3);
  for (int s : sizes) CHECK(s > 0);
}

TEST_CASE("fast clustering equals the from-scratch agglomeration") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    // random sparse feature vectors over a small bigram space
    const int n = 5 + static_cast<int>(rng() % 4);  // 5..8 items
    std::vector<FeatureVector> features;
    for (int i = 0; i < n; ++i) {
      FeatureVector fv;
      double sq = 0.0;
      for (std::uint64_t key = 0; key < 6; ++key) {
        if (rng() % 2 == 0) continue;
        const double w = 1.0 + static_cast<double>(rng() % 3);
        fv.entries.emplace_back(key, w);
        sq += w * w;
      }
      if (fv.entries.empty()) {
        fv.entries.emplace_back(i % 6, 1.0);
        sq = 1.0;
      }
      fv.norm = std::sqrt(sq);
      features.push_back(std::move(fv));
    }
    for (int k = 2; k <= 3; ++k) {
      Clustering fast = complete_link_cluster(features, k);
      auto naive = oracle::naive_complete_link(features, k);
      CHECK(oracle::canonical_partition(fast.assignments) ==
            oracle::canonical_partition(naive));
    }
  }
}

TEST_CASE("clustering is independent of the job count") {
  GroupedFixture fx = make_grouped({6, 5, 4, 3});
  auto features = features_of(fx);
  Clustering one = complete_link_cluster(features, 4, 1);
  Clustering four = complete_link_cluster(features, 4, 4);
  CHECK(one.assignments == four.assignments);
}

TEST_CASE("degenerate inputs are rejected") {
  GroupedFixture fx = make_grouped({3, 3});
  CHECK_THROWS_AS(complete_link_cluster(fx.sentences, fx.vocab, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      complete_link_cluster(std::vector<FeatureVector>{}, 2),
      std::invalid_argument);
  // k larger than n cannot produce k non-empty clusters
  GroupedFixture tiny = make_grouped({2});
  CHECK_THROWS_AS(complete_link_cluster(tiny.sentences, tiny.vocab, 5),
                  std::invalid_argument);
}

TEST_CASE("small clusters merge into a trailing etcetera cluster") {
  // clusters of sizes 10, 9, 2, 1 with T=3: the last two fold in
  Clustering clustering;
  clustering.m = 4;
  for (int c : {0, 1, 2, 3}) {
    const int size = c == 0 ? 10 : c == 1 ? 9 : c == 2 ? 2 : 1;
    for (int i = 0; i < size; ++i) clustering.assignments.push_back(c);
  }
  Clustering merged = merge_small_clusters(clustering, 3);
  REQUIRE(merged.m == 3);
  REQUIRE(merged.etcetera_index.has_value());
  CHECK(*merged.etcetera_index == 2);
  auto sizes = merged.cluster_sizes();
  CHECK(sizes == std::vector<int>{10, 9, 3});
  // survivors keep their relative order
  CHECK(merged.assignments[0] == 0);
  CHECK(merged.assignments[10] == 1);
  CHECK(merged.assignments[19] == 2);
  CHECK(merged.assignments[21] == 2);
}

TEST_CASE("etcetera exists even when nothing is small") {
  Clustering clustering;
  clustering.m = 2;
  clustering.assignments = {0, 0, 0, 1, 1, 1};
  Clustering merged = merge_small_clusters(clustering, 2);
  REQUIRE(merged.m == 3);
  CHECK(*merged.etcetera_index == 2);
  CHECK(merged.cluster_sizes() == std::vector<int>{3, 3, 0});
}

TEST_CASE("merge fails when every cluster is below the threshold") {
  Clustering clustering;
  clustering.m = 3;
  clustering.assignments = {0, 1, 2};
  CHECK_THROWS_AS(merge_small_clusters(clustering, 2), std::runtime_error);
}

TEST_CASE("tsv dump lists every sentence with its cluster") {
  GroupedFixture fx = make_grouped({2, 2});
  Clustering result = complete_link_cluster(fx.sentences, fx.vocab, 2);
  std::ostringstream out;
  dump_clustering_tsv(result, fx.sentences, out);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.find('\t') != std::string::npos);
    ++rows;
  }
  CHECK(rows == 4);
}
