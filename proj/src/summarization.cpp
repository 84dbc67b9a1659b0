#include "drift/summarization.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "drift/features.hpp"
#include "drift/parallel.hpp"

namespace drift {
namespace {

std::set<int> states_present(const ContentModel& model, const Document& doc) {
  ViterbiResult vit = model.viterbi_decode(doc);
  return {vit.states.begin(), vit.states.end()};
}

}  // namespace

AlignedPair align_summary(const Document& full, const Document& summary,
                          double threshold) {
  if (full.sentences.empty() || summary.sentences.empty()) {
    throw std::invalid_argument("align_summary: empty document");
  }
  Vocabulary vocab = build_vocabulary({full, summary});
  std::vector<FeatureVector> full_feats;
  full_feats.reserve(full.sentences.size());
  for (const Sentence& sent : full.sentences) {
    full_feats.push_back(bigram_features(sent, vocab));
  }
  std::vector<FeatureVector> sum_feats;
  sum_feats.reserve(summary.sentences.size());
  for (const Sentence& sent : summary.sentences) {
    sum_feats.push_back(bigram_features(sent, vocab));
  }

  struct Candidate {
    double sim;
    int sum_idx;
    int full_idx;
  };
  std::vector<Candidate> candidates;
  for (std::size_t s = 0; s < sum_feats.size(); ++s) {
    for (std::size_t f = 0; f < full_feats.size(); ++f) {
      double sim = cosine(sum_feats[s], full_feats[f]);
      if (sim >= threshold) {
        candidates.push_back(
            {sim, static_cast<int>(s), static_cast<int>(f)});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::make_tuple(-a.sim, a.sum_idx, a.full_idx) <
                     std::make_tuple(-b.sim, b.sum_idx, b.full_idx);
            });

  std::vector<bool> sum_used(summary.sentences.size(), false);
  std::vector<bool> full_used(full.sentences.size(), false);
  std::vector<int> gold;
  for (const Candidate& c : candidates) {
    if (sum_used[c.sum_idx] || full_used[c.full_idx]) continue;
    sum_used[c.sum_idx] = true;
    full_used[c.full_idx] = true;
    gold.push_back(c.full_idx);
  }
  for (std::size_t s = 0; s < sum_used.size(); ++s) {
    if (!sum_used[s]) {
      std::cerr << "warning: summary sentence " << s << " of "
                << summary.doc_id << " has no alignment above " << threshold
                << ", dropped\n";
    }
  }
  if (gold.empty()) {
    throw std::runtime_error("align_summary: pair unusable (" + full.doc_id +
                             ")");
  }
  std::sort(gold.begin(), gold.end());
  return AlignedPair{full, summary, std::move(gold)};
}

SummaryModel train_summarizer(const ContentModel& model,
                              const std::vector<AlignedPair>& pairs,
                              int min_support) {
  if (pairs.empty()) {
    throw std::invalid_argument("train_summarizer: no aligned pairs");
  }
  if (min_support < 1) {
    throw std::invalid_argument("train_summarizer: min_support must be >= 1");
  }
  SummaryModel summ;
  summ.min_support = min_support;
  summ.states.resize(model.num_states());
  for (const AlignedPair& pair : pairs) {
    std::set<int> full_states = states_present(model, pair.full);
    std::set<int> summary_states = states_present(model, pair.summary);
    for (int s : full_states) {
      summ.states[s].support_docs += 1;
      if (summary_states.count(s)) summ.states[s].both_docs += 1;
    }
  }
  bool any = false;
  for (StateSummaryStats& st : summ.states) {
    st.eligible = st.support_docs >= min_support;
    if (st.eligible) {
      st.summary_prob =
          static_cast<double>(st.both_docs) / st.support_docs;
      any = true;
    }
  }
  if (!any) {
    throw std::runtime_error("train_summarizer: no eligible states");
  }
  return summ;
}

std::vector<int> summarize(const ContentModel& model, const SummaryModel& summ,
                           const Document& document, int ell) {
  if (ell < 1) throw std::invalid_argument("summarize: ell must be >= 1");
  if (document.sentences.empty()) {
    throw std::invalid_argument("summarize: empty document");
  }
  if (summ.states.size() != static_cast<std::size_t>(model.num_states())) {
    throw std::invalid_argument("summarize: summary model state count mismatch");
  }

  const std::vector<int> labels = model.viterbi_decode(document).states;
  const int n = static_cast<int>(labels.size());

  std::set<int> doc_states(labels.begin(), labels.end());
  std::vector<int> eligible;
  for (int s : doc_states) {
    if (summ.states[s].eligible) eligible.push_back(s);
  }
  std::sort(eligible.begin(), eligible.end(), [&](int a, int b) {
    if (summ.states[a].summary_prob != summ.states[b].summary_prob) {
      return summ.states[a].summary_prob > summ.states[b].summary_prob;
    }
    return a < b;
  });
  if (eligible.size() > static_cast<std::size_t>(ell)) eligible.resize(ell);
  std::set<int> selected(eligible.begin(), eligible.end());

  std::vector<int> chosen;
  for (int t = 0; t < n; ++t) {
    if (selected.count(labels[t])) chosen.push_back(t);
  }
  const std::size_t target = std::min<std::size_t>(ell, n);
  if (chosen.size() > static_cast<std::size_t>(ell)) {
    std::sort(chosen.begin(), chosen.end(), [&](int a, int b) {
      double pa = summ.states[labels[a]].summary_prob;
      double pb = summ.states[labels[b]].summary_prob;
      if (pa != pb) return pa > pb;
      return a < b;
    });
    chosen.resize(ell);
  } else if (chosen.size() < target) {
    std::set<int> have(chosen.begin(), chosen.end());
    for (int t = 0; t < n && chosen.size() < target; ++t) {
      if (!have.count(t)) chosen.push_back(t);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<int> lead_baseline(const Document& document, int ell) {
  if (ell < 1) throw std::invalid_argument("lead_baseline: ell must be >= 1");
  const int n = static_cast<int>(document.sentences.size());
  std::vector<int> out;
  for (int i = 0; i < std::min(ell, n); ++i) out.push_back(i);
  return out;
}

double extraction_accuracy(const std::vector<int>& predicted,
                           const std::vector<int>& gold) {
  if (predicted.empty()) {
    throw std::invalid_argument("extraction_accuracy: empty prediction");
  }
  std::set<int> gold_set(gold.begin(), gold.end());
  int hit = 0;
  for (int p : predicted) {
    if (gold_set.count(p)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(predicted.size());
}

SummarizationReport evaluate_summarization(const ContentModel& model,
                                           const SummaryModel& summ,
                                           const std::vector<AlignedPair>& pairs,
                                           int jobs) {
  if (pairs.empty()) {
    throw std::invalid_argument("evaluate_summarization: no pairs");
  }
  SummarizationReport report;
  report.system = "content_model";
  report.per_doc.resize(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    const AlignedPair& pair = pairs[i];
    SummaryEval& eval = report.per_doc[i];
    eval.doc_id = pair.full.doc_id;
    eval.gold = pair.gold_indices;
    eval.predicted = summarize(model, summ, pair.full,
                               static_cast<int>(pair.gold_indices.size()));
    eval.accuracy = extraction_accuracy(eval.predicted, eval.gold);
  });
  report.num_docs = static_cast<int>(report.per_doc.size());
  double sum = 0.0;
  for (const SummaryEval& eval : report.per_doc) sum += eval.accuracy;
  report.mean_accuracy = sum / report.num_docs;
  return report;
}

SummarizationReport evaluate_lead(const std::vector<AlignedPair>& pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("evaluate_lead: no pairs");
  }
  SummarizationReport report;
  report.system = "lead";
  for (const AlignedPair& pair : pairs) {
    SummaryEval eval;
    eval.doc_id = pair.full.doc_id;
    eval.gold = pair.gold_indices;
    eval.predicted = lead_baseline(pair.full,
                                   static_cast<int>(pair.gold_indices.size()));
    eval.accuracy = extraction_accuracy(eval.predicted, eval.gold);
    report.per_doc.push_back(std::move(eval));
  }
  report.num_docs = static_cast<int>(report.per_doc.size());
  double sum = 0.0;
  for (const SummaryEval& eval : report.per_doc) sum += eval.accuracy;
  report.mean_accuracy = sum / report.num_docs;
  return report;
}

std::string SummaryModel::to_json() const {
  nlohmann::json j;
  j["min_support"] = min_support;
  nlohmann::json arr = nlohmann::json::array();
  for (const StateSummaryStats& st : states) {
    arr.push_back({{"summary_prob", st.summary_prob},
                   {"support_docs", st.support_docs},
                   {"both_docs", st.both_docs},
                   {"eligible", st.eligible}});
  }
  j["states"] = std::move(arr);
  return j.dump();
}

SummaryModel SummaryModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SummaryModel summ;
  summ.min_support = j.at("min_support").get<int>();
  for (const nlohmann::json& st : j.at("states")) {
    StateSummaryStats stats;
    stats.summary_prob = st.at("summary_prob").get<double>();
    stats.support_docs = st.at("support_docs").get<int>();
    stats.both_docs = st.at("both_docs").get<int>();
    stats.eligible = st.at("eligible").get<bool>();
    summ.states.push_back(stats);
  }
  return summ;
}

void SummaryModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << "\n";
}

SummaryModel SummaryModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace drift
