#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace drift {

using TokenId = std::uint32_t;

// Reserved tokens. BOS never occurs inside a sentence; it is the implicit
// left context of every sentence-initial word.
inline constexpr const char* kNameToken = "NAME";
inline constexpr const char* kNumToken = "NUM";
inline constexpr const char* kDateToken = "DATE";
inline constexpr const char* kUnkToken = "UNK";
inline constexpr const char* kBosToken = "BOS";

struct Sentence {
  std::string doc_id;
  int index = 0;                    // 0-based position within the document
  std::string raw;                  // original text
  std::vector<std::string> tokens;  // masked, lowercased, non-empty
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;
};

// Token string <-> id mapping. Successor ids range over the vocabulary
// items; context ids additionally admit BOS. When BOS is one of the items
// (the normal case for built vocabularies) the two spaces coincide,
// otherwise BOS gets the one-past-the-end context id.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> items);

  std::size_t size() const { return items_.size(); }
  const std::vector<std::string>& items() const { return items_; }
  const std::string& token(TokenId id) const { return items_.at(id); }

  std::optional<TokenId> find(const std::string& token) const;
  TokenId id_of(const std::string& token) const;  // throws if absent

  // Unknown tokens map to UNK (which must then be present).
  TokenId encode_token(const std::string& token) const;
  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;

  bool has(const std::string& token) const { return find(token).has_value(); }

  TokenId bos_context() const;
  std::size_t context_count() const;

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, TokenId> index_;
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;

  std::size_t total_sentences() const;
};

struct CorpusStats {
  double avg_doc_length_sentences = 0.0;
  double stddev_length = 0.0;  // population standard deviation
  std::size_t vocab_size = 0;  // distinct tokens actually occurring
  double token_type_ratio = 0.0;
};

// Rule-based splitter: spans end at '.', '!' or '?' (optionally followed by
// closing quotes/brackets) before whitespace or end of text, except after a
// guarded abbreviation. Text after the last terminator is flushed as a
// final span. Whitespace-normalized concatenation of the result equals the
// whitespace-normalized input.
std::vector<std::string> split_sentences(const std::string& raw_text);

// Lowercased word tokens with masking, applied in order: NUM (digit runs),
// DATE (weekday names; month name followed by a number collapses to one
// token), NAME (runs of capitalized words not at sentence start). Outer
// punctuation is dropped. Literal NAME/NUM/DATE/UNK pass through unchanged.
// Throws std::invalid_argument("empty after tokenization") when nothing
// survives.
std::vector<std::string> tokenize_and_mask(const std::string& sentence);

// Distinct tokens of all documents plus the reserved tokens, sorted.
Vocabulary build_vocabulary(const std::vector<Document>& documents);

CorpusStats corpus_stats(const Corpus& corpus);

// Input: directory of UTF-8 .txt files (one document each, doc_id is the
// file stem) or a JSONL file. JSONL records are either the cache schema
// {"doc_id","index","raw","tokens":[...]} or the pre-split schema
// {"doc_id","sentences":[...]}, which runs the masking tokenizer.
Corpus load_corpus(const std::string& path);

void save_corpus_jsonl(const Corpus& corpus, std::ostream& out);
void save_corpus_jsonl(const Corpus& corpus, const std::string& path);

// Encoded view used by the model/training layers: documents[d][s] is the
// token-id sequence of sentence s of document d.
using TokenSeq = std::vector<TokenId>;
std::vector<std::vector<TokenSeq>> encode_corpus(const Corpus& corpus);

}  // namespace drift
