#include "drift/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "drift/parallel.hpp"
#include "drift/rng.hpp"

namespace drift {
namespace {

constexpr int kMaxStates = 24;     // prefixes 'a'..'x'; 'z' is the shared pool
constexpr int kMaxWordsPer = 676;  // two base-26 letters

std::string make_word(char prefix, int j) {
  return {prefix, static_cast<char>('a' + j / 26),
          static_cast<char>('a' + j % 26)};
}

void validate(const PlantedSpec& spec) {
  if (spec.num_states < 1 || spec.num_states > kMaxStates) {
    throw std::invalid_argument("PlantedSpec: num_states must be in [1, 24]");
  }
  if (spec.words_per_state < 1 || spec.words_per_state > kMaxWordsPer) {
    throw std::invalid_argument("PlantedSpec: words_per_state must be in [1, 676]");
  }
  if (spec.shared_words < 0 || spec.shared_words > kMaxWordsPer) {
    throw std::invalid_argument("PlantedSpec: shared_words must be in [0, 676]");
  }
  if (spec.overlap < 0.0 || spec.overlap >= 1.0) {
    throw std::invalid_argument("PlantedSpec: overlap must be in [0, 1)");
  }
  if (spec.overlap > 0.0 && spec.shared_words == 0) {
    throw std::invalid_argument("PlantedSpec: overlap > 0 needs shared_words > 0");
  }
  if (spec.num_docs < 1) throw std::invalid_argument("PlantedSpec: num_docs < 1");
  if (spec.min_sentences < 1 || spec.min_sentences > spec.max_sentences) {
    throw std::invalid_argument("PlantedSpec: bad sentence-count range");
  }
  if (spec.min_words < 1 || spec.min_words > spec.max_words) {
    throw std::invalid_argument("PlantedSpec: bad sentence-length range");
  }
  if (!spec.transitions.empty()) {
    const std::size_t m = spec.num_states;
    if (spec.transitions.size() != m * m) {
      throw std::invalid_argument("PlantedSpec: transitions must be m*m");
    }
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += spec.transitions[i * m + j];
      if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("PlantedSpec: transition row does not sum to 1");
      }
    }
  } else if (spec.num_states > 1 &&
             (spec.self_transition < 0.0 || spec.self_transition > 1.0)) {
    throw std::invalid_argument("PlantedSpec: self_transition must be in [0, 1]");
  }
  if (spec.summary_states.empty()) {
    throw std::invalid_argument("PlantedSpec: summary_states must be non-empty");
  }
  std::set<int> seen;
  for (int s : spec.summary_states) {
    if (s < 0 || s >= spec.num_states) {
      throw std::invalid_argument("PlantedSpec: summary state out of range");
    }
    if (!seen.insert(s).second) {
      throw std::invalid_argument("PlantedSpec: duplicate summary state");
    }
  }
}

// Per-state sampler: contexts are BOS then own words then shared words;
// successors are own words then shared words.
struct StateTables {
  std::vector<std::string> successors;
  std::vector<std::vector<double>> cdfs;  // one per context
};

StateTables build_state_tables(const PlantedSpec& spec, int state,
                               std::mt19937_64& rng) {
  StateTables tables;
  for (int j = 0; j < spec.words_per_state; ++j) {
    tables.successors.push_back(make_word(static_cast<char>('a' + state), j));
  }
  for (int j = 0; j < spec.shared_words; ++j) {
    tables.successors.push_back(make_word('z', j));
  }
  const std::size_t own = spec.words_per_state;
  const std::size_t total = tables.successors.size();
  const std::size_t shared = total - own;
  // A detour consumes one token slot and always returns to the tour, and
  // the opening word is never shared, so the per-stop detour mass must sit
  // above the overlap fraction for the realized token share to match it:
  // rate = (L-1)/L * mass/(1+mass) at mean sentence length L.
  double shared_mass = shared > 0 ? spec.overlap : 0.0;
  const double mean_len = (spec.min_words + spec.max_words) / 2.0;
  if (shared_mass > 0.0 && mean_len > 1.0) {
    const double target =
        std::min(shared_mass * mean_len / (mean_len - 1.0), 0.45);
    shared_mass = target / (1.0 - target);
  }

  // Each state's emissions follow a random tour of its vocabulary: a word
  // hands off to the next tour stop, sometimes via a detour through a
  // function word from the shared pool that then resumes the tour. The
  // detour word is fixed per stop, so sentences from one state keep
  // retracing the same short stretch of bigrams the way formulaic prose
  // does; flatter per-context multinomials would leave same-topic sentences
  // with few bigrams in common. Words beyond the reachable stretch form a
  // rambling region the opening word occasionally jumps into, giving each
  // state a thin tail of oddball sentences.
  std::vector<std::size_t> perm(own);
  for (std::size_t r = 0; r < own; ++r) perm[r] = r;
  for (std::size_t r = own; r > 1; --r) {
    std::swap(perm[r - 1], perm[rng() % r]);
  }
  const std::size_t far_start = std::min<std::size_t>(15, own);
  const std::size_t far_count = own - far_start;
  const double ramble = far_count > 0 ? 0.02 : 0.0;

  const std::size_t contexts = 1 + total;  // BOS first
  tables.cdfs.resize(contexts);
  std::vector<double> p(total);
  auto to_cdf = [&](std::vector<double>& cdf) {
    cdf.resize(total);
    double acc = 0.0;
    for (std::size_t u = 0; u < total; ++u) {
      acc += p[u];
      cdf[u] = acc;
    }
  };

  // Sentences open with the tour head, like the formulaic datelines that
  // open newswire leads.
  std::fill(p.begin(), p.end(), 0.0);
  p[perm[0]] = 1.0;
  to_cdf(tables.cdfs[0]);

  for (std::size_t r = 0; r < own; ++r) {
    std::fill(p.begin(), p.end(), 0.0);
    if (r >= far_start) {
      for (std::size_t f = far_start; f < own; ++f) {
        p[perm[f]] = 1.0 / static_cast<double>(far_count);
      }
    } else {
      double trunk = 1.0 - shared_mass;
      if (r == 0 && ramble > 0.0) {
        for (std::size_t f = far_start; f < own; ++f) {
          p[perm[f]] = trunk * ramble / static_cast<double>(far_count);
        }
        trunk *= 1.0 - ramble;
      }
      p[perm[(r + 1) % own]] += trunk;
      if (shared > 0) p[own + r % shared] += shared_mass;
    }
    to_cdf(tables.cdfs[1 + perm[r]]);
  }
  for (std::size_t k = 0; k < shared; ++k) {
    std::fill(p.begin(), p.end(), 0.0);
    p[perm[(k + 1) % own]] = 1.0;
    to_cdf(tables.cdfs[1 + own + k]);
  }
  return tables;
}

std::vector<std::vector<double>> transition_cdfs(const PlantedSpec& spec) {
  const int m = spec.num_states;
  std::vector<std::vector<double>> cdfs(m, std::vector<double>(m));
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      double p;
      if (!spec.transitions.empty()) {
        p = spec.transitions[static_cast<std::size_t>(i) * m + j];
      } else if (m == 1) {
        p = 1.0;
      } else {
        p = i == j ? spec.self_transition
                   : (1.0 - spec.self_transition) / (m - 1);
      }
      acc += p;
      cdfs[i][j] = acc;
    }
  }
  return cdfs;
}

std::string doc_name(int d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "synth-%04d", d);
  return buf;
}

}  // namespace

PlantedCorpus generate_corpus(const PlantedSpec& spec, int jobs) {
  validate(spec);

  std::mt19937_64 table_rng(derive_seed(spec.seed, 1));
  std::vector<StateTables> tables;
  tables.reserve(spec.num_states);
  for (int s = 0; s < spec.num_states; ++s) {
    tables.push_back(build_state_tables(spec, s, table_rng));
  }
  const auto trans = transition_cdfs(spec);

  PlantedCorpus out;
  out.corpus.documents.resize(spec.num_docs);
  out.labels.resize(spec.num_docs);
  out.gold_summaries.resize(spec.num_docs);

  std::vector<int> priority(spec.num_states, -1);
  for (std::size_t i = 0; i < spec.summary_states.size(); ++i) {
    priority[spec.summary_states[i]] = static_cast<int>(i);
  }

  parallel_for(spec.num_docs, jobs, [&](std::size_t d) {
    std::mt19937_64 rng(derive_seed(spec.seed, 1000 + d));
    Document doc;
    doc.doc_id = doc_name(static_cast<int>(d));
    std::vector<int>& labels = out.labels[d];

    const int n_sent = uniform_int(rng, spec.min_sentences, spec.max_sentences);
    int q = static_cast<int>(uniform_below(rng, spec.num_states));
    for (int t = 0; t < n_sent; ++t) {
      if (t > 0) q = static_cast<int>(sample_cdf(rng, trans[q]));
      labels.push_back(q);
      const StateTables& st = tables[q];
      const int len = uniform_int(rng, spec.min_words, spec.max_words);
      Sentence sent;
      sent.doc_id = doc.doc_id;
      sent.index = t;
      std::size_t context = 0;  // BOS
      for (int w = 0; w < len; ++w) {
        std::size_t u = sample_cdf(rng, st.cdfs[context]);
        sent.tokens.push_back(st.successors[u]);
        context = u + 1;
        if (w) sent.raw += ' ';
        sent.raw += st.successors[u];
      }
      sent.raw += '.';
      doc.sentences.push_back(std::move(sent));
    }

    std::vector<std::pair<int, int>> picks;  // (priority, position)
    for (int t = 0; t < n_sent; ++t) {
      if (priority[labels[t]] >= 0) picks.emplace_back(priority[labels[t]], t);
    }
    if (spec.summary_cap > 0 &&
        picks.size() > static_cast<std::size_t>(spec.summary_cap)) {
      std::sort(picks.begin(), picks.end());
      picks.resize(spec.summary_cap);
    }
    std::vector<int>& gold = out.gold_summaries[d];
    for (const auto& [p, pos] : picks) gold.push_back(pos);
    std::sort(gold.begin(), gold.end());

    out.corpus.documents[d] = std::move(doc);
  });

  out.corpus.vocabulary = build_vocabulary(out.corpus.documents);
  return out;
}

std::vector<Document> extract_summary_documents(const PlantedCorpus& planted) {
  std::vector<Document> out;
  for (std::size_t d = 0; d < planted.corpus.documents.size(); ++d) {
    const std::vector<int>& gold = planted.gold_summaries.at(d);
    if (gold.empty()) continue;
    const Document& full = planted.corpus.documents[d];
    Document summary;
    summary.doc_id = full.doc_id + "-sum";
    for (std::size_t i = 0; i < gold.size(); ++i) {
      Sentence sent = full.sentences.at(gold[i]);
      sent.doc_id = summary.doc_id;
      sent.index = static_cast<int>(i);
      summary.sentences.push_back(std::move(sent));
    }
    out.push_back(std::move(summary));
  }
  return out;
}

void save_sidecar_jsonl(const PlantedCorpus& planted, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t d = 0; d < planted.corpus.documents.size(); ++d) {
    nlohmann::json j;
    j["doc_id"] = planted.corpus.documents[d].doc_id;
    j["labels"] = planted.labels[d];
    j["gold_summary_indices"] = planted.gold_summaries[d];
    out << j.dump() << "\n";
  }
}

}  // namespace drift
