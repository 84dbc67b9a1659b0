#include "drift/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace drift {
namespace {

using json = nlohmann::json;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

std::string to_lower(std::string s) {
  for (char& c : s) {
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// Words whose trailing period does not end a sentence.
const std::set<std::string>& abbreviations() {
  static const std::set<std::string> abbrev = {
      "mr",  "mrs", "ms",  "dr",   "st",   "mt",  "no",  "u.s", "u.n",
      "u.k", "km",  "mi",  "ft",   "lt",   "gen", "col", "sen", "rep",
      "gov", "prof", "rev", "jr",  "sr",   "inc", "corp", "co", "ltd",
      "vs",  "etc", "e.g", "i.e",  "jan",  "feb", "mar", "apr", "aug",
      "sep", "sept", "oct", "nov", "dec",  "approx"};
  return abbrev;
}

const std::set<std::string>& month_names() {
  static const std::set<std::string> months = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  return months;
}

const std::set<std::string>& weekday_names() {
  static const std::set<std::string> days = {
      "monday", "tuesday", "wednesday", "thursday",
      "friday", "saturday", "sunday"};
  return days;
}

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

// The whitespace-delimited word ending just before position `dot`.
std::string word_before(const std::string& text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !is_space(text[start - 1])) --start;
  std::string word = text.substr(start, dot - start);
  while (!word.empty() && !is_alnum(word.front()) && word.front() != '.') {
    word.erase(word.begin());
  }
  return to_lower(word);
}

std::string strip_outer_punct(const std::string& word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && !is_alnum(word[b])) ++b;
  while (e > b && !is_alnum(word[e - 1])) --e;
  return word.substr(b, e - b);
}

bool is_reserved_mask(const std::string& core) {
  return core == kNameToken || core == kNumToken || core == kDateToken ||
         core == kUnkToken;
}

// Digits possibly joined by , . - / : as in "2,200", "6.1", "1997-98".
bool is_numeric(const std::string& core) {
  bool saw_digit = false;
  for (char c : core) {
    if (is_digit(c)) {
      saw_digit = true;
    } else if (c != ',' && c != '.' && c != '-' && c != '/' && c != ':') {
      return false;
    }
  }
  return saw_digit;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

void validate_sentence(const Sentence& sent) {
  if (sent.tokens.empty()) {
    throw std::runtime_error("sentence has no tokens: " + sent.doc_id + "#" +
                             std::to_string(sent.index));
  }
  for (const std::string& tok : sent.tokens) {
    if (tok.empty()) {
      throw std::runtime_error("empty token in " + sent.doc_id);
    }
    for (char c : tok) {
      if (is_space(c)) {
        throw std::runtime_error("whitespace inside token '" + tok + "' in " +
                                 sent.doc_id);
      }
    }
  }
}

Document document_from_text(const std::string& doc_id, const std::string& text) {
  Document doc;
  doc.doc_id = doc_id;
  for (const std::string& span : split_sentences(text)) {
    Sentence sent;
    sent.doc_id = doc_id;
    sent.index = static_cast<int>(doc.sentences.size());
    sent.raw = span;
    try {
      sent.tokens = tokenize_and_mask(span);
    } catch (const std::invalid_argument&) {
      std::cerr << "warning: dropping untokenizable span in " << doc_id
                << ": \"" << span << "\"\n";
      continue;
    }
    doc.sentences.push_back(std::move(sent));
  }
  if (doc.sentences.empty()) {
    throw std::runtime_error("document has no usable sentences: " + doc_id);
  }
  return doc;
}

Corpus finish_corpus(std::vector<Document> documents) {
  Corpus corpus;
  corpus.vocabulary = build_vocabulary(documents);
  corpus.documents = std::move(documents);
  for (const Document& doc : corpus.documents) {
    if (doc.sentences.empty()) {
      throw std::runtime_error("document has no sentences: " + doc.doc_id);
    }
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      const Sentence& sent = doc.sentences[i];
      validate_sentence(sent);
      if (sent.index != static_cast<int>(i)) {
        throw std::runtime_error("non-contiguous sentence indices in " +
                                 doc.doc_id);
      }
    }
  }
  return corpus;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> items) : items_(std::move(items)) {
  index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i], static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary item: " + items_[i]);
    }
  }
  if (items_.empty()) {
    throw std::invalid_argument("vocabulary must be non-empty");
  }
}

std::optional<TokenId> Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id_of(const std::string& token) const {
  auto id = find(token);
  if (!id) throw std::invalid_argument("token not in vocabulary: " + token);
  return *id;
}

TokenId Vocabulary::encode_token(const std::string& token) const {
  auto id = find(token);
  if (id) return *id;
  return id_of(kUnkToken);
}

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const std::string& tok : tokens) ids.push_back(encode_token(tok));
  return ids;
}

TokenId Vocabulary::bos_context() const {
  auto id = find(kBosToken);
  if (id) return *id;
  return static_cast<TokenId>(items_.size());
}

std::size_t Vocabulary::context_count() const {
  return items_.size() + (find(kBosToken) ? 0 : 1);
}

std::size_t Corpus::total_sentences() const {
  std::size_t n = 0;
  for (const Document& doc : documents) n += doc.sentences.size();
  return n;
}

std::vector<std::string> split_sentences(const std::string& raw_text) {
  std::vector<std::string> spans;
  std::size_t start = 0;
  const std::size_t n = raw_text.size();
  for (std::size_t i = 0; i < n; ++i) {
    char c = raw_text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (c == '.') {
      std::string word = word_before(raw_text, i);
      if (!word.empty()) {
        // Strip trailing interior dots ("u.s." looks like "u.s" here).
        if (abbreviations().count(word) > 0) continue;
        if (word.size() == 1 && is_alpha(word[0])) continue;  // initials
      }
    }
    std::size_t j = i + 1;
    while (j < n && is_closer(raw_text[j])) ++j;
    if (j < n && !is_space(raw_text[j])) continue;
    std::string span = trim(raw_text.substr(start, j - start));
    if (!span.empty()) spans.push_back(std::move(span));
    start = j;
    i = j > i ? j - 1 : i;
  }
  std::string tail = trim(raw_text.substr(start));
  if (!tail.empty()) spans.push_back(std::move(tail));
  return spans;
}

std::vector<std::string> tokenize_and_mask(const std::string& sentence) {
  struct Tok {
    std::string core;
    bool locked = false;  // reserved or already masked
  };
  std::vector<Tok> toks;
  std::istringstream stream(sentence);
  std::string word;
  while (stream >> word) {
    std::string core = strip_outer_punct(word);
    if (core.empty()) continue;
    Tok tok;
    tok.locked = is_reserved_mask(core);
    tok.core = std::move(core);
    toks.push_back(std::move(tok));
  }

  for (Tok& tok : toks) {
    if (!tok.locked && is_numeric(tok.core)) {
      tok.core = kNumToken;
      tok.locked = true;
    }
  }
  for (Tok& tok : toks) {
    if (!tok.locked && weekday_names().count(to_lower(tok.core)) > 0) {
      tok.core = kDateToken;
      tok.locked = true;
    }
  }
  // A month name directly followed by a number becomes a single DATE.
  std::vector<Tok> merged;
  merged.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!toks[i].locked && month_names().count(to_lower(toks[i].core)) > 0 &&
        i + 1 < toks.size() && toks[i + 1].locked &&
        toks[i + 1].core == kNumToken) {
      merged.push_back({kDateToken, true});
      ++i;
    } else {
      merged.push_back(std::move(toks[i]));
    }
  }

  std::vector<std::string> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size();) {
    const Tok& tok = merged[i];
    if (!tok.locked && i > 0 && is_upper(tok.core[0])) {
      // Collapse the maximal run of capitalized words.
      std::size_t j = i;
      while (j < merged.size() && !merged[j].locked &&
             is_upper(merged[j].core[0])) {
        ++j;
      }
      out.push_back(kNameToken);
      i = j;
    } else {
      out.push_back(tok.locked ? tok.core : to_lower(tok.core));
      ++i;
    }
  }
  if (out.empty()) {
    throw std::invalid_argument("empty after tokenization");
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<Document>& documents) {
  if (documents.empty()) {
    throw std::invalid_argument("build_vocabulary: no documents");
  }
  std::set<std::string> items = {kNameToken, kNumToken, kDateToken, kUnkToken,
                                 kBosToken};
  for (const Document& doc : documents) {
    for (const Sentence& sent : doc.sentences) {
      validate_sentence(sent);
      items.insert(sent.tokens.begin(), sent.tokens.end());
    }
  }
  return Vocabulary(std::vector<std::string>(items.begin(), items.end()));
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.documents.empty()) {
    throw std::invalid_argument("corpus_stats: empty corpus");
  }
  CorpusStats stats;
  double sum = 0.0;
  for (const Document& doc : corpus.documents) {
    sum += static_cast<double>(doc.sentences.size());
  }
  const double n = static_cast<double>(corpus.documents.size());
  stats.avg_doc_length_sentences = sum / n;
  double sq = 0.0;
  for (const Document& doc : corpus.documents) {
    double d = static_cast<double>(doc.sentences.size()) -
               stats.avg_doc_length_sentences;
    sq += d * d;
  }
  stats.stddev_length = std::sqrt(sq / n);

  std::set<std::string> types;
  std::size_t total = 0;
  for (const Document& doc : corpus.documents) {
    for (const Sentence& sent : doc.sentences) {
      types.insert(sent.tokens.begin(), sent.tokens.end());
      total += sent.tokens.size();
    }
  }
  stats.vocab_size = types.size();
  stats.token_type_ratio =
      types.empty() ? 0.0 : static_cast<double>(total) / types.size();
  return stats;
}

Corpus load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw std::runtime_error("no .txt files in directory: " + path);
    }
    std::vector<Document> docs;
    docs.reserve(files.size());
    for (const fs::path& file : files) {
      std::ifstream in(file);
      if (!in) throw std::runtime_error("cannot read " + file.string());
      std::stringstream buf;
      buf << in.rdbuf();
      docs.push_back(document_from_text(file.stem().string(), buf.str()));
    }
    return finish_corpus(std::move(docs));
  }

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> doc_index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
    if (!rec.contains("doc_id") && rec.contains("manifest")) {
      continue;  // provenance header written by the CLI
    }
    const std::string doc_id = rec.at("doc_id").get<std::string>();
    if (rec.contains("tokens")) {
      // Cache schema: one sentence per record.
      Sentence sent;
      sent.doc_id = doc_id;
      sent.index = rec.at("index").get<int>();
      sent.raw = rec.at("raw").get<std::string>();
      sent.tokens = rec.at("tokens").get<std::vector<std::string>>();
      auto it = doc_index.find(doc_id);
      if (it == doc_index.end()) {
        doc_index.emplace(doc_id, docs.size());
        docs.push_back(Document{doc_id, {}});
        it = doc_index.find(doc_id);
      }
      docs[it->second].sentences.push_back(std::move(sent));
    } else if (rec.contains("sentences")) {
      if (doc_index.count(doc_id) > 0) {
        throw std::runtime_error("duplicate doc_id " + doc_id + " in " + path);
      }
      doc_index.emplace(doc_id, docs.size());
      Document doc;
      doc.doc_id = doc_id;
      for (const auto& raw : rec.at("sentences")) {
        Sentence sent;
        sent.doc_id = doc_id;
        sent.index = static_cast<int>(doc.sentences.size());
        sent.raw = raw.get<std::string>();
        try {
          sent.tokens = tokenize_and_mask(sent.raw);
        } catch (const std::invalid_argument&) {
          std::cerr << "warning: dropping untokenizable sentence in " << doc_id
                    << "\n";
          continue;
        }
        doc.sentences.push_back(std::move(sent));
      }
      if (doc.sentences.empty()) {
        throw std::runtime_error("document has no usable sentences: " + doc_id);
      }
      docs.push_back(std::move(doc));
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": record has neither tokens nor sentences");
    }
  }
  if (docs.empty()) throw std::runtime_error("no documents in " + path);
  return finish_corpus(std::move(docs));
}

void save_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const Document& doc : corpus.documents) {
    for (const Sentence& sent : doc.sentences) {
      json rec;
      rec["doc_id"] = sent.doc_id;
      rec["index"] = sent.index;
      rec["raw"] = sent.raw;
      rec["tokens"] = sent.tokens;
      out << rec.dump() << "\n";
    }
  }
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_corpus_jsonl(corpus, out);
}

std::vector<std::vector<TokenSeq>> encode_corpus(const Corpus& corpus) {
  std::vector<std::vector<TokenSeq>> encoded;
  encoded.reserve(corpus.documents.size());
  for (const Document& doc : corpus.documents) {
    std::vector<TokenSeq> seqs;
    seqs.reserve(doc.sentences.size());
    for (const Sentence& sent : doc.sentences) {
      seqs.push_back(corpus.vocabulary.encode(sent.tokens));
    }
    encoded.push_back(std::move(seqs));
  }
  return encoded;
}

}  // namespace drift
