#include "drift/content_model.hpp"

#include "drift/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace drift {
namespace {

using json = nlohmann::json;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

}  // namespace

double StateLm::prob(TokenId context, TokenId next) const {
  if (next >= vocab_size_) {
    throw std::invalid_argument("StateLm::prob: successor outside vocabulary");
  }
  if (context >= context_capacity_) {
    throw std::invalid_argument("StateLm::prob: unknown context id");
  }
  if (kind_ == Kind::normal) {
    auto it = bigrams_.find(pack_bigram(context, next));
    double f = it == bigrams_.end() ? 0.0 : static_cast<double>(it->second);
    double ctx = static_cast<double>(context_counts_[context]);
    return (f + delta1_) / (ctx + delta1_ * static_cast<double>(vocab_size_));
  }
  auto it = max_seen_.find(pack_bigram(context, next));
  double max_p = it == max_seen_.end() ? default_max_[context] : it->second;
  return (1.0 - max_p) / denom_[context];
}

double StateLm::logprob(TokenId context, TokenId next) const {
  return std::log(prob(context, next));
}

double StateLm::sentence_logprob(std::span<const TokenId> tokens,
                                 TokenId bos) const {
  double total = 0.0;
  TokenId prev = bos;
  for (TokenId id : tokens) {
    total += logprob(prev, id);
    prev = id;
  }
  return total;
}

std::int64_t StateLm::bigram_count(TokenId context, TokenId next) const {
  auto it = bigrams_.find(pack_bigram(context, next));
  return it == bigrams_.end() ? 0 : it->second;
}

std::int64_t StateLm::context_count(TokenId context) const {
  return context < context_counts_.size() ? context_counts_[context] : 0;
}

std::vector<std::tuple<TokenId, TokenId, std::int64_t>> StateLm::bigram_counts()
    const {
  std::vector<std::tuple<TokenId, TokenId, std::int64_t>> out;
  out.reserve(bigrams_.size());
  for (const auto& [key, count] : bigrams_) {
    out.emplace_back(bigram_context(key), bigram_next(key), count);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StateLm estimate_emission(const std::vector<const TokenSeq*>& cluster,
                          double delta1, const Vocabulary& vocab) {
  if (delta1 <= 0.0) {
    throw std::invalid_argument("estimate_emission: delta1 must be > 0");
  }
  StateLm lm;
  lm.kind_ = StateLm::Kind::normal;
  lm.delta1_ = delta1;
  lm.vocab_size_ = vocab.size();
  lm.context_capacity_ = vocab.context_count();
  lm.context_counts_.assign(lm.context_capacity_, 0);
  const TokenId bos = vocab.bos_context();
  for (const TokenSeq* tokens : cluster) {
    TokenId prev = bos;
    for (TokenId id : *tokens) {
      if (id >= lm.vocab_size_) {
        throw std::invalid_argument("estimate_emission: token outside vocabulary");
      }
      lm.bigrams_[pack_bigram(prev, id)] += 1;
      lm.context_counts_[prev] += 1;
      prev = id;
    }
  }
  return lm;
}

StateLm estimate_emission(const std::vector<TokenSeq>& cluster, double delta1,
                          const Vocabulary& vocab) {
  std::vector<const TokenSeq*> view;
  view.reserve(cluster.size());
  for (const TokenSeq& seq : cluster) view.push_back(&seq);
  return estimate_emission(view, delta1, vocab);
}

StateLm estimate_insertion(const std::vector<StateLm>& other_states,
                           const Vocabulary& vocab) {
  if (other_states.empty()) {
    throw std::invalid_argument("estimate_insertion: no normal states");
  }
  for (const StateLm& lm : other_states) {
    if (lm.kind() != StateLm::Kind::normal) {
      throw std::invalid_argument("estimate_insertion: inputs must be normal");
    }
  }
  const std::size_t v = vocab.size();
  const std::size_t contexts = vocab.context_count();

  StateLm lm;
  lm.kind_ = StateLm::Kind::insertion;
  lm.delta1_ = other_states.front().delta1_;
  lm.vocab_size_ = v;
  lm.context_capacity_ = contexts;

  lm.default_max_.assign(contexts, 0.0);
  for (std::size_t w = 0; w < contexts; ++w) {
    double dmax = 0.0;
    for (const StateLm& s : other_states) {
      double ctx = static_cast<double>(s.context_counts_[w]);
      dmax = std::max(dmax, s.delta1_ / (ctx + s.delta1_ * static_cast<double>(v)));
    }
    lm.default_max_[w] = dmax;
  }

  // Max over states for every bigram seen anywhere, merged in sorted key
  // order so the float reductions below are reproducible.
  std::vector<std::pair<std::uint64_t, double>> seen;
  for (const StateLm& s : other_states) {
    for (const auto& [context, next, count] : s.bigram_counts()) {
      seen.emplace_back(pack_bigram(context, next), s.prob(context, next));
    }
  }
  std::sort(seen.begin(), seen.end());
  lm.max_seen_.reserve(seen.size());
  lm.denom_.assign(contexts, 0.0);
  std::vector<double> seen_sum(contexts, 0.0);
  std::vector<std::size_t> seen_count(contexts, 0);
  for (std::size_t i = 0; i < seen.size();) {
    std::size_t j = i;
    double mx = lm.default_max_[bigram_context(seen[i].first)];
    while (j < seen.size() && seen[j].first == seen[i].first) {
      mx = std::max(mx, seen[j].second);
      ++j;
    }
    TokenId w = bigram_context(seen[i].first);
    lm.max_seen_.emplace(seen[i].first, mx);
    seen_sum[w] += mx;
    seen_count[w] += 1;
    i = j;
  }
  for (std::size_t w = 0; w < contexts; ++w) {
    double covered = seen_sum[w] +
                     static_cast<double>(v - seen_count[w]) * lm.default_max_[w];
    lm.denom_[w] = static_cast<double>(v) - covered;
    if (!(lm.denom_[w] > 1e-12)) {
      throw std::runtime_error(
          "estimate_insertion: degenerate complement for context '" +
          (w < v ? vocab.token(static_cast<TokenId>(w)) : std::string(kBosToken)) +
          "'");
    }
  }
  return lm;
}

TransitionMatrix estimate_transitions(
    const std::vector<std::vector<int>>& doc_labels, int m, double delta2) {
  if (delta2 <= 0.0) {
    throw std::invalid_argument("estimate_transitions: delta2 must be > 0");
  }
  if (m < 1) throw std::invalid_argument("estimate_transitions: m must be >= 1");

  std::vector<std::int64_t> pair_docs(static_cast<std::size_t>(m) * m, 0);
  std::vector<std::int64_t> docs_with(m, 0);
  std::vector<std::int64_t> first_docs(m, 0);
  std::vector<std::int64_t> last_docs(m, 0);

  std::vector<bool> in_doc(m);
  std::vector<bool> pair_in_doc(static_cast<std::size_t>(m) * m);
  for (const std::vector<int>& labels : doc_labels) {
    if (labels.empty()) continue;
    for (int c : labels) {
      if (c < 0 || c >= m) {
        throw std::invalid_argument("estimate_transitions: label out of range");
      }
    }
    std::fill(in_doc.begin(), in_doc.end(), false);
    std::fill(pair_in_doc.begin(), pair_in_doc.end(), false);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      in_doc[labels[t]] = true;
      if (t + 1 < labels.size()) {
        pair_in_doc[static_cast<std::size_t>(labels[t]) * m + labels[t + 1]] =
            true;
      }
    }
    for (int c = 0; c < m; ++c) {
      if (in_doc[c]) docs_with[c] += 1;
    }
    for (std::size_t p = 0; p < pair_in_doc.size(); ++p) {
      if (pair_in_doc[p]) pair_docs[p] += 1;
    }
    first_docs[labels.front()] += 1;
    last_docs[labels.back()] += 1;
  }

  const double md = static_cast<double>(m);
  TransitionMatrix tm;
  tm.m = m;
  tm.delta2 = delta2;
  tm.probs.resize(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    double denom = static_cast<double>(docs_with[i]) + delta2 * md;
    double row_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      double p = (static_cast<double>(pair_docs[static_cast<std::size_t>(i) * m + j]) +
                  delta2) /
                 denom;
      tm.probs[static_cast<std::size_t>(i) * m + j] = p;
      row_sum += p;
    }
    for (int j = 0; j < m; ++j) {
      tm.probs[static_cast<std::size_t>(i) * m + j] /= row_sum;
    }
  }

  const double num_docs = static_cast<double>(doc_labels.size());
  tm.pi.resize(m);
  double pi_sum = 0.0;
  for (int j = 0; j < m; ++j) {
    tm.pi[j] = (static_cast<double>(first_docs[j]) + delta2) /
               (num_docs + delta2 * md);
    pi_sum += tm.pi[j];
  }
  for (int j = 0; j < m; ++j) tm.pi[j] /= pi_sum;

  tm.end.resize(m);
  for (int j = 0; j < m; ++j) {
    tm.end[j] = (static_cast<double>(last_docs[j]) + delta2) /
                (static_cast<double>(docs_with[j]) + delta2 * md);
  }
  return tm;
}

TransitionMatrix estimate_transitions(const Clustering& clustering,
                                      const std::vector<Document>& documents,
                                      double delta2) {
  std::vector<std::vector<int>> doc_labels;
  doc_labels.reserve(documents.size());
  std::size_t ordinal = 0;
  for (const Document& doc : documents) {
    std::vector<int> labels;
    labels.reserve(doc.sentences.size());
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      labels.push_back(clustering.assignments.at(ordinal++));
    }
    doc_labels.push_back(std::move(labels));
  }
  if (ordinal != clustering.assignments.size()) {
    throw std::invalid_argument(
        "estimate_transitions: clustering does not cover the documents");
  }
  return estimate_transitions(doc_labels, clustering.m, delta2);
}

ContentModel::ContentModel(Vocabulary vocab, std::vector<StateLm> normal_states,
                           TransitionMatrix transitions, Hyperparams hp,
                           std::string version)
    : vocab_(std::move(vocab)),
      transitions_(std::move(transitions)),
      hp_(hp),
      version_(std::move(version)) {
  if (normal_states.empty()) {
    throw std::invalid_argument("ContentModel: need at least one normal state");
  }
  for (const StateLm& s : normal_states) {
    if (s.kind() != StateLm::Kind::normal) {
      throw std::invalid_argument("ContentModel: states must be normal kind");
    }
  }
  states_ = std::move(normal_states);
  states_.push_back(estimate_insertion(states_, vocab_));
  const int m = num_states();
  if (transitions_.m != m) {
    throw std::invalid_argument("ContentModel: transition matrix is " +
                                std::to_string(transitions_.m) + "x" +
                                std::to_string(transitions_.m) + ", expected " +
                                std::to_string(m));
  }
  log_trans_.resize(static_cast<std::size_t>(m) * m);
  for (std::size_t i = 0; i < log_trans_.size(); ++i) {
    log_trans_[i] = std::log(transitions_.probs[i]);
  }
  log_pi_.resize(m);
  for (int j = 0; j < m; ++j) log_pi_[j] = std::log(transitions_.pi[j]);
  log_end_.resize(m);
  for (int j = 0; j < m; ++j) log_end_[j] = std::log(transitions_.end[j]);
}

double ContentModel::emission_logprob(int state,
                                      std::span<const TokenId> tokens) const {
  return states_.at(state).sentence_logprob(tokens, vocab_.bos_context());
}

std::vector<std::vector<double>> ContentModel::emission_matrix(
    const std::vector<TokenSeq>& sentences) const {
  const int m = num_states();
  std::vector<std::vector<double>> table(m);
  for (int j = 0; j < m; ++j) {
    table[j].resize(sentences.size());
    for (std::size_t t = 0; t < sentences.size(); ++t) {
      table[j][t] = emission_logprob(j, sentences[t]);
    }
  }
  return table;
}

double ContentModel::forward_logprob(
    const std::vector<std::vector<double>>& emissions,
    std::span<const int> order) const {
  const int m = num_states();
  const std::size_t n = order.size();
  if (n == 0) throw std::invalid_argument("forward_logprob: empty document");

  std::vector<double> alpha(m);
  std::vector<double> next(m);
  std::vector<double> terms(m);
  for (int j = 0; j < m; ++j) {
    alpha[j] = log_pi_[j] + emissions[j][order[0]];
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        terms[i] = alpha[i] + log_trans_[static_cast<std::size_t>(i) * m + j];
      }
      next[j] = log_sum_exp(terms) + emissions[j][order[t]];
    }
    alpha.swap(next);
  }
  if (hp_.use_end) {
    for (int j = 0; j < m; ++j) alpha[j] += log_end_[j];
  }
  return log_sum_exp(alpha);
}

double ContentModel::forward_logprob(const std::vector<TokenSeq>& sentences) const {
  std::vector<int> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  return forward_logprob(emission_matrix(sentences), order);
}

double ContentModel::forward_logprob(const Document& document) const {
  return forward_logprob(encode(document));
}

ViterbiResult ContentModel::viterbi_decode(
    const std::vector<std::vector<double>>& emissions) const {
  const int m = num_states();
  const std::size_t n = emissions.empty() ? 0 : emissions.front().size();
  if (n == 0) throw std::invalid_argument("viterbi_decode: empty document");

  std::vector<double> score(m);
  std::vector<double> next(m);
  std::vector<int> backptr(n * m, -1);
  for (int j = 0; j < m; ++j) score[j] = log_pi_[j] + emissions[j][0];
  for (std::size_t t = 1; t < n; ++t) {
    for (int j = 0; j < m; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < m; ++i) {
        double s = score[i] + log_trans_[static_cast<std::size_t>(i) * m + j];
        if (s > best) {
          best = s;
          arg = i;
        }
      }
      next[j] = best + emissions[j][t];
      backptr[t * m + j] = arg;
    }
    score.swap(next);
  }
  if (hp_.use_end) {
    for (int j = 0; j < m; ++j) score[j] += log_end_[j];
  }
  double best = kNegInf;
  int arg = 0;
  for (int j = 0; j < m; ++j) {
    if (score[j] > best) {
      best = score[j];
      arg = j;
    }
  }
  ViterbiResult result;
  result.log_score = best;
  result.states.resize(n);
  result.states[n - 1] = arg;
  for (std::size_t t = n - 1; t > 0; --t) {
    result.states[t - 1] = backptr[t * m + result.states[t]];
  }
  return result;
}

ViterbiResult ContentModel::viterbi_decode(
    const std::vector<TokenSeq>& sentences) const {
  return viterbi_decode(emission_matrix(sentences));
}

ViterbiResult ContentModel::viterbi_decode(const Document& document) const {
  return viterbi_decode(encode(document));
}

std::vector<TokenSeq> ContentModel::encode(const Document& document) const {
  std::vector<TokenSeq> seqs;
  seqs.reserve(document.sentences.size());
  for (const Sentence& sent : document.sentences) {
    seqs.push_back(vocab_.encode(sent.tokens));
  }
  return seqs;
}

std::string ContentModel::to_json() const {
  json j;
  j["version"] = version_;
  j["hyperparams"] = {{"k", hp_.k},
                      {"T", hp_.T},
                      {"delta1", hp_.delta1},
                      {"delta2", hp_.delta2},
                      {"use_end", hp_.use_end}};
  j["vocab"] = vocab_.items();
  json states = json::array();
  for (const StateLm& s : states_) {
    json state;
    state["kind"] = s.kind() == StateLm::Kind::normal ? "normal" : "insertion";
    json bigrams = json::array();
    json contexts = json::array();
    if (s.kind() == StateLm::Kind::normal) {
      for (const auto& [w, w2, c] : s.bigram_counts()) {
        bigrams.push_back({w, w2, c});
      }
      for (std::size_t w = 0; w < vocab_.context_count(); ++w) {
        std::int64_t c = s.context_count(static_cast<TokenId>(w));
        if (c > 0) contexts.push_back({w, c});
      }
    }
    state["bigram_counts"] = std::move(bigrams);
    state["context_counts"] = std::move(contexts);
    states.push_back(std::move(state));
  }
  j["states"] = std::move(states);
  const int m = num_states();
  json rows = json::array();
  for (int i = 0; i < m; ++i) {
    json row = json::array();
    for (int jj = 0; jj < m; ++jj) row.push_back(transitions_.at(i, jj));
    rows.push_back(std::move(row));
  }
  j["transitions"] = std::move(rows);
  j["pi"] = transitions_.pi;
  j["end"] = transitions_.end;
  return j.dump();
}

ContentModel ContentModel::from_json(const std::string& text) {
  json j = json::parse(text);
  Hyperparams hp;
  hp.k = j.at("hyperparams").at("k").get<int>();
  hp.T = j.at("hyperparams").at("T").get<int>();
  hp.delta1 = j.at("hyperparams").at("delta1").get<double>();
  hp.delta2 = j.at("hyperparams").at("delta2").get<double>();
  hp.use_end = j.at("hyperparams").at("use_end").get<bool>();
  Vocabulary vocab(j.at("vocab").get<std::vector<std::string>>());

  std::vector<StateLm> normal_states;
  for (const json& state : j.at("states")) {
    if (state.at("kind").get<std::string>() != "normal") continue;
    std::vector<TokenSeq> empty;
    StateLm lm = estimate_emission(empty, hp.delta1, vocab);
    for (const json& entry : state.at("bigram_counts")) {
      TokenId w = entry.at(0).get<TokenId>();
      TokenId w2 = entry.at(1).get<TokenId>();
      std::int64_t c = entry.at(2).get<std::int64_t>();
      lm.bigrams_[pack_bigram(w, w2)] = c;
    }
    for (const json& entry : state.at("context_counts")) {
      lm.context_counts_.at(entry.at(0).get<std::size_t>()) =
          entry.at(1).get<std::int64_t>();
    }
    normal_states.push_back(std::move(lm));
  }

  TransitionMatrix tm;
  tm.m = static_cast<int>(j.at("pi").size());
  tm.delta2 = hp.delta2;
  tm.pi = j.at("pi").get<std::vector<double>>();
  tm.end = j.at("end").get<std::vector<double>>();
  for (const json& row : j.at("transitions")) {
    for (const json& p : row) tm.probs.push_back(p.get<double>());
  }
  return ContentModel(std::move(vocab), std::move(normal_states), std::move(tm),
                      hp, j.at("version").get<std::string>());
}

void ContentModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << "\n";
}

ContentModel ContentModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace drift
