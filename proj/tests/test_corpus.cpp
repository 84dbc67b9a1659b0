#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "drift/corpus.hpp"

using namespace drift;
namespace fs = std::filesystem;

namespace {

std::string normalize_ws(const std::string& s) {
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("drift_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

Document doc_of(const std::vector<std::vector<std::string>>& sents,
                const std::string& id = "d") {
  Document doc;
  doc.doc_id = id;
  for (std::size_t i = 0; i < sents.size(); ++i) {
    doc.sentences.push_back(
        Sentence{id, static_cast<int>(i), "raw", sents[i]});
  }
  return doc;
}

}  // namespace

TEST_CASE("splitter handles a hand-segmented news paragraph") {
  const std::vector<std::string> expected = {
      "A strong earthquake shook the region early Tuesday.",
      "The temblor measured 6.1 on the Richter scale.",
      "Mr. Alvarez said dozens were hurt.",
      "Rescue crews reached the village of San Pedro before dawn.",
      "It was the worst quake since March 1998.",
      "Nearly 2,000 homes lost power.",
      "Did anyone expect it?",
      "\"We felt the ground roll,\" a resident said.",
      "Officials warned of aftershocks.",
      "\"Stay outside!\"",
      "they shouted.",
      "The army sent 40 trucks and 12 helicopters.",
      "Dr. Kim treated patients at St. Mary Hospital.",
      "Aid arrived from the U.N. on Wednesday.",
      "The epicenter lay 380 kilometers (238 miles) south of the capital.",
      "Roads stayed closed for 3 days.",
      "No one knows the full toll yet.",
      "Survivors camped in parks.",
      "Some waited in line for water!",
      "Power returned to most districts by Friday evening.",
      "The governor promised $5 million in relief.",
      "Reconstruction may take years",
  };
  std::string raw;
  for (const std::string& s : expected) {
    if (!raw.empty()) raw += ' ';
    raw += s;
  }

  std::vector<std::string> spans = split_sentences(raw);
  REQUIRE(spans.size() == expected.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    CHECK(spans[i] == expected[i]);
  }

  // concatenation modulo whitespace equals the input
  std::string joined;
  for (const std::string& s : spans) joined += s + ' ';
  CHECK(normalize_ws(joined) == normalize_ws(raw));

  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   \n  ").empty());
  CHECK(split_sentences("It shook. Dozens died.") ==
        std::vector<std::string>{"It shook.", "Dozens died."});
}

TEST_CASE("masking follows NUM, DATE, NAME precedence") {
  CHECK(tokenize_and_mask("The temblor injured dozens") ==
        std::vector<std::string>{"the", "temblor", "injured", "dozens"});
  CHECK(tokenize_and_mask("380 kilometers (238 miles) south") ==
        std::vector<std::string>{"NUM", "kilometers", "NUM", "miles", "south"});
  CHECK(tokenize_and_mask("quake hit Peshawar on Tuesday") ==
        std::vector<std::string>{"quake", "hit", "NAME", "on", "DATE"});
  // month + number collapse to one DATE; capitalized runs to one NAME
  CHECK(tokenize_and_mask("It was the worst quake since March 1998.") ==
        std::vector<std::string>{"it", "was", "the", "worst", "quake", "since",
                                 "DATE"});
  CHECK(tokenize_and_mask("Rescue crews reached San Pedro village") ==
        std::vector<std::string>{"rescue", "crews", "reached", "NAME",
                                 "village"});
  // sentence-initial capitalization is not a NAME
  CHECK(tokenize_and_mask("Maria fled") ==
        std::vector<std::string>{"maria", "fled"});
  CHECK(tokenize_and_mask("The governor promised $5 million in relief.") ==
        std::vector<std::string>{"the", "governor", "promised", "NUM",
                                 "million", "in", "relief"});
  CHECK_THROWS_WITH_AS(tokenize_and_mask("!!! ..."),
                       "empty after tokenization", std::invalid_argument);
}

TEST_CASE("masking is idempotent on its own output") {
  for (const std::string raw :
       {"The temblor measured 6.1 on the Richter scale.",
        "quake hit Peshawar on Tuesday",
        "Aid arrived from the U.N. on Wednesday."}) {
    std::vector<std::string> tokens = tokenize_and_mask(raw);
    std::string detok;
    for (const std::string& t : tokens) {
      if (!detok.empty()) detok += ' ';
      detok += t;
    }
    CHECK(tokenize_and_mask(detok) == tokens);
  }
}

TEST_CASE("vocabulary is sorted, reserved-complete and maps unknowns to UNK") {
  Document doc = doc_of({{"a", "b"}, {"b", "c"}});
  Vocabulary vocab = build_vocabulary({doc});
  for (const char* reserved :
       {kNameToken, kNumToken, kDateToken, kUnkToken, kBosToken}) {
    CHECK(vocab.has(reserved));
  }
  CHECK(vocab.size() == 8);  // a, b, c + 5 reserved
  const auto& items = vocab.items();
  CHECK(std::is_sorted(items.begin(), items.end()));

  CHECK(vocab.encode_token("a") == vocab.id_of("a"));
  CHECK(vocab.encode_token("zebra") == vocab.id_of(kUnkToken));
  CHECK(!vocab.find("zebra").has_value());
  CHECK_THROWS_AS(vocab.id_of("zebra"), std::invalid_argument);
  CHECK(vocab.token(vocab.bos_context()) == kBosToken);
}

TEST_CASE("corpus stats match hand arithmetic") {
  auto doc_with_n = [](int n, const std::string& id) {
    std::vector<std::vector<std::string>> sents;
    for (int i = 0; i < n; ++i) sents.push_back({"w" + std::to_string(i % 4)});
    return doc_of(sents, id);
  };
  Corpus corpus;
  corpus.documents = {doc_with_n(10, "a"), doc_with_n(12, "b"),
                      doc_with_n(14, "c")};
  corpus.vocabulary = build_vocabulary(corpus.documents);

  CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.avg_doc_length_sentences == doctest::Approx(12.0));
  CHECK(stats.stddev_length == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(stats.vocab_size == 4);  // w0..w3 actually occur
  CHECK(stats.token_type_ratio == doctest::Approx(36.0 / 4.0));

  Corpus single;
  single.documents = {doc_with_n(5, "only")};
  single.vocabulary = build_vocabulary(single.documents);
  CHECK(corpus_stats(single).avg_doc_length_sentences == doctest::Approx(5.0));
  CHECK(corpus_stats(single).stddev_length == doctest::Approx(0.0));
}

TEST_CASE("directory ingestion plus JSONL round trip") {
  TempDir tmp;
  {
    std::ofstream a(tmp.path / "earthquake1.txt");
    a << "A quake hit Peshawar on Tuesday. Dozens died. Mr. Alvarez wept.\n";
    std::ofstream b(tmp.path / "earthquake2.txt");
    b << "The temblor measured 6.1 near Lima. Roads closed for 3 days.\n";
    std::ofstream ignored(tmp.path / "notes.md");
    ignored << "not part of the corpus\n";
  }

  Corpus corpus = load_corpus(tmp.path.string());
  REQUIRE(corpus.documents.size() == 2);
  CHECK(corpus.documents[0].doc_id == "earthquake1");
  CHECK(corpus.documents[1].doc_id == "earthquake2");
  REQUIRE(corpus.documents[0].sentences.size() == 3);
  CHECK(corpus.documents[0].sentences[0].tokens ==
        std::vector<std::string>{"a", "quake", "hit", "NAME", "on", "DATE"});
  CHECK(corpus.documents[0].sentences[2].tokens ==
        std::vector<std::string>{"mr", "NAME", "wept"});

  const std::string cache = (tmp.path / "cache.jsonl").string();
  save_corpus_jsonl(corpus, cache);
  Corpus reloaded = load_corpus(cache);
  REQUIRE(reloaded.documents.size() == corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const Document& x = corpus.documents[d];
    const Document& y = reloaded.documents[d];
    CHECK(x.doc_id == y.doc_id);
    REQUIRE(x.sentences.size() == y.sentences.size());
    for (std::size_t s = 0; s < x.sentences.size(); ++s) {
      CHECK(x.sentences[s].raw == y.sentences[s].raw);
      CHECK(x.sentences[s].tokens == y.sentences[s].tokens);
      CHECK(x.sentences[s].index == y.sentences[s].index);
    }
  }
  CHECK(reloaded.vocabulary.items() == corpus.vocabulary.items());

  // a leading provenance record is skipped
  {
    std::ifstream in(cache);
    std::stringstream buf;
    buf << in.rdbuf();
    std::ofstream out(tmp.path / "with_header.jsonl");
    out << "{\"manifest\": \"cache.manifest.json\"}\n" << buf.str();
  }
  Corpus with_header = load_corpus((tmp.path / "with_header.jsonl").string());
  CHECK(with_header.documents.size() == corpus.documents.size());
}

TEST_CASE("pre-split JSONL records run the tokenizer") {
  TempDir tmp;
  const std::string path = (tmp.path / "presplit.jsonl").string();
  {
    std::ofstream out(path);
    out << R"({"doc_id": "x", "sentences": ["A quake hit Peshawar.", "Dozens died."]})"
        << "\n";
    out << R"({"doc_id": "y", "sentences": ["Roads closed for 3 days."]})"
        << "\n";
  }
  Corpus corpus = load_corpus(path);
  REQUIRE(corpus.documents.size() == 2);
  CHECK(corpus.documents[0].sentences[0].tokens ==
        std::vector<std::string>{"a", "quake", "hit", "NAME"});
  CHECK(corpus.documents[0].sentences[0].raw == "A quake hit Peshawar.");
  CHECK(corpus.documents[1].sentences[0].tokens ==
        std::vector<std::string>{"roads", "closed", "for", "NUM", "days"});

  std::ofstream bad(tmp.path / "bad.jsonl");
  bad << R"({"doc_id": "z"})" << "\n";
  bad.close();
  CHECK_THROWS_AS(load_corpus((tmp.path / "bad.jsonl").string()),
                  std::runtime_error);
}

TEST_CASE("encode_corpus mirrors the vocabulary ids") {
  Document doc = doc_of({{"a", "b"}, {"c"}});
  Corpus corpus;
  corpus.documents = {doc};
  corpus.vocabulary = build_vocabulary(corpus.documents);
  auto encoded = encode_corpus(corpus);
  REQUIRE(encoded.size() == 1);
  REQUIRE(encoded[0].size() == 2);
  CHECK(encoded[0][0] == TokenSeq{corpus.vocabulary.id_of("a"),
                                  corpus.vocabulary.id_of("b")});
  CHECK(encoded[0][1] == TokenSeq{corpus.vocabulary.id_of("c")});
}
