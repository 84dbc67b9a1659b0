#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "drift/corpus.hpp"
#include "drift/features.hpp"

using namespace drift;

namespace {

Document make_doc(const std::string& id,
                  const std::vector<std::vector<std::string>>& sents) {
  Document doc;
  doc.doc_id = id;
  for (std::size_t i = 0; i < sents.size(); ++i) {
    Sentence s;
    s.doc_id = id;
    s.index = static_cast<int>(i);
    s.tokens = sents[i];
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

}  // namespace

TEST_CASE("bigram keys pack and unpack") {
  const std::uint64_t key = pack_bigram(7, 0xffffffffu);
  CHECK(bigram_context(key) == 7);
  CHECK(bigram_next(key) == 0xffffffffu);
  CHECK(pack_bigram(0, 1) < pack_bigram(1, 0));
}

TEST_CASE("bigram features count adjacent pairs with a BOS start") {
  Document doc = make_doc("d", {{"a", "b", "a", "b"}});
  Vocabulary vocab = build_vocabulary({doc});
  const TokenId a = vocab.id_of("a");
  const TokenId b = vocab.id_of("b");
  const TokenId bos = vocab.bos_context();

  FeatureVector fv = bigram_features(doc.sentences[0], vocab);
  REQUIRE(fv.entries.size() == 3);
  CHECK(fv.entries[0].first == pack_bigram(bos, a));
  CHECK(fv.entries[0].second == 1.0);
  CHECK(fv.entries[1].first == pack_bigram(a, b));
  CHECK(fv.entries[1].second == 2.0);
  CHECK(fv.entries[2].first == pack_bigram(b, a));
  CHECK(fv.entries[2].second == 1.0);
  CHECK(fv.norm == doctest::Approx(std::sqrt(6.0)));

  // entries are sorted by packed key
  for (std::size_t i = 1; i < fv.entries.size(); ++i) {
    CHECK(fv.entries[i - 1].first < fv.entries[i].first);
  }
}

TEST_CASE("single-token sentence has only the BOS bigram") {
  Document doc = make_doc("d", {{"quake"}});
  Vocabulary vocab = build_vocabulary({doc});
  FeatureVector fv = bigram_features(doc.sentences[0], vocab);
  REQUIRE(fv.entries.size() == 1);
  CHECK(fv.entries[0].first ==
        pack_bigram(vocab.bos_context(), vocab.id_of("quake")));
  CHECK(fv.norm == doctest::Approx(1.0));
}

TEST_CASE("cosine of half-overlapping unit vectors is 1/sqrt(2)") {
  FeatureVector u{{{pack_bigram(1, 1), 1.0}, {pack_bigram(2, 2), 1.0}},
                  std::sqrt(2.0)};
  FeatureVector v{{{pack_bigram(1, 1), 1.0}}, 1.0};
  CHECK(cosine(u, v) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(cosine(v, u) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("cosine is clamped and rejects zero vectors") {
  FeatureVector u{{{pack_bigram(0, 3), 3.0}, {pack_bigram(3, 4), 4.0}}, 5.0};
  CHECK(cosine(u, u) == 1.0);

  FeatureVector disjoint{{{pack_bigram(9, 9), 4.0}}, 4.0};
  CHECK(cosine(u, disjoint) == 0.0);

  FeatureVector zero;
  CHECK_THROWS_AS(cosine(u, zero), std::invalid_argument);
}

TEST_CASE("different sentences with shared bigrams land between 0 and 1") {
  Document doc = make_doc(
      "d", {{"the", "quake", "hit"}, {"the", "quake", "spared", "nobody"}});
  Vocabulary vocab = build_vocabulary({doc});
  FeatureVector u = bigram_features(doc.sentences[0], vocab);
  FeatureVector v = bigram_features(doc.sentences[1], vocab);
  // shared: (BOS,the), (the,quake); u also has (quake,hit)
  const double sim = cosine(u, v);
  CHECK(sim == doctest::Approx(2.0 / (std::sqrt(3.0) * 2.0)));
}
