#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drift/corpus.hpp"
#include "drift/ordering.hpp"
#include "drift/reports.hpp"
#include "drift/summarization.hpp"
#include "drift/synth.hpp"
#include "drift/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kToolVersion = "drift 0.1.0";

struct UsageError {
  std::string message;
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::uint64_t effective_seed(std::uint64_t flag_value) {
  if (const char* env = std::getenv("DRIFT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError{"DRIFT_SEED must be an unsigned integer"};
    }
  }
  return flag_value;
}

std::string domain_of(const std::string& path) {
  std::string trimmed = path;
  while (trimmed.size() > 1 && trimmed.back() == '/') trimmed.pop_back();
  fs::path p(trimmed);
  std::string stem = p.stem().string();
  return stem.empty() ? trimmed : stem;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

drift::RunManifest make_manifest(
    const std::string& command,
    std::vector<std::pair<std::string, std::string>> config,
    const std::vector<std::string>& input_paths, std::uint64_t seed) {
  drift::RunManifest manifest;
  manifest.command = command;
  manifest.config = std::move(config);
  for (const std::string& path : input_paths) {
    manifest.inputs.emplace_back(path, drift::hash_input_hex(path));
  }
  manifest.seed = seed;
  manifest.tool_version = kToolVersion;
  return manifest;
}

void write_with_manifest_key(const std::string& path, json j) {
  j["manifest"] = drift::manifest_name_for(path);
  drift::write_text_file(path, j.dump() + "\n");
}

void emit_report(const std::string& content, const std::string& path) {
  drift::write_text_file(path, content);
}

// Pair summaries with fulls either by an explicit {"full","summary"} JSONL
// mapping or by the "<doc_id>-sum" naming convention.
std::vector<std::pair<const drift::Document*, const drift::Document*>>
match_pairs(const drift::Corpus& fulls, const drift::Corpus& summaries,
            const std::string& pairs_path) {
  std::vector<std::pair<const drift::Document*, const drift::Document*>> out;
  auto find_doc = [](const drift::Corpus& corpus,
                     const std::string& id) -> const drift::Document* {
    for (const drift::Document& doc : corpus.documents) {
      if (doc.doc_id == id) return &doc;
    }
    return nullptr;
  };
  if (!pairs_path.empty()) {
    std::ifstream in(pairs_path);
    if (!in) throw std::runtime_error("cannot read " + pairs_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json rec = json::parse(line);
      if (!rec.contains("full")) continue;  // manifest or comment record
      const drift::Document* full =
          find_doc(fulls, rec.at("full").get<std::string>());
      const drift::Document* summary =
          find_doc(summaries, rec.at("summary").get<std::string>());
      if (!full || !summary) {
        throw std::runtime_error(pairs_path + ":" + std::to_string(lineno) +
                                 ": unknown doc_id in pair");
      }
      out.emplace_back(full, summary);
    }
  } else {
    for (const drift::Document& full : fulls.documents) {
      if (const drift::Document* summary =
              find_doc(summaries, full.doc_id + "-sum")) {
        out.emplace_back(&full, summary);
      }
    }
  }
  if (out.empty()) {
    throw std::runtime_error("no document-summary pairs matched");
  }
  return out;
}

std::vector<drift::AlignedPair> align_pairs(
    const std::vector<std::pair<const drift::Document*, const drift::Document*>>&
        matched,
    double threshold) {
  std::vector<drift::AlignedPair> pairs;
  for (const auto& [full, summary] : matched) {
    try {
      pairs.push_back(drift::align_summary(*full, *summary, threshold));
    } catch (const std::runtime_error& e) {
      std::cerr << "warning: skipping pair " << full->doc_id << ": " << e.what()
                << "\n";
    }
  }
  if (pairs.empty()) {
    throw std::runtime_error("every document-summary pair was unusable");
  }
  return pairs;
}

struct TrainFlags {
  int k = 40;
  int T = 4;
  double d1 = 1e-6;
  double d2 = 1e-2;
  int max_iters = 20;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--k", k, "initial cluster count");
    cmd->add_option("--T", T, "minimum cluster size");
    cmd->add_option("--d1", d1, "emission smoothing");
    cmd->add_option("--d2", d2, "transition smoothing");
    cmd->add_option("--max-iters", max_iters, "re-estimation cap");
  }

  drift::TrainConfig config() const {
    if (k < 2) throw UsageError{"k must be >= 2"};
    if (T < 1) throw UsageError{"T must be >= 1"};
    if (d1 <= 0.0) throw UsageError{"d1 must be > 0"};
    if (d2 <= 0.0) throw UsageError{"d2 must be > 0"};
    if (max_iters < 1) throw UsageError{"max-iters must be >= 1"};
    drift::TrainConfig cfg;
    cfg.k = k;
    cfg.T = T;
    cfg.delta1 = d1;
    cfg.delta2 = d2;
    cfg.max_iterations = max_iters;
    return cfg;
  }

  std::vector<std::pair<std::string, std::string>> snapshot() const {
    return {{"k", std::to_string(k)},
            {"T", std::to_string(T)},
            {"d1", fmt_double(d1)},
            {"d2", fmt_double(d2)},
            {"max-iters", std::to_string(max_iters)}};
  }
};

struct CapFlags {
  int max_exhaustive = 9;
  int sample_size = 2000;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--max-exhaustive", max_exhaustive,
                    "enumerate all permutations up to this many sentences");
    cmd->add_option("--sample-size", sample_size,
                    "sampled permutations for longer documents");
  }

  drift::PermutationCap cap(std::uint64_t seed) const {
    if (max_exhaustive < 2 || max_exhaustive > 12) {
      throw UsageError{"max-exhaustive must be in [2, 12]"};
    }
    if (sample_size < 1) throw UsageError{"sample-size must be >= 1"};
    return drift::PermutationCap{max_exhaustive, sample_size, seed};
  }
};

int cmd_ingest(const std::string& corpus_path, const std::string& out_path,
               const std::string& format_name, std::uint64_t seed) {
  Stopwatch watch;
  drift::ReportFormat format = drift::parse_format(format_name);
  drift::Corpus corpus = drift::load_corpus(corpus_path);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << json{{"manifest", drift::manifest_name_for(out_path)}}.dump() << "\n";
  drift::save_corpus_jsonl(corpus, out);
  out.close();

  std::cout << drift::format_corpus_report(
      domain_of(corpus_path), drift::corpus_stats(corpus), format,
      drift::manifest_name_for(out_path));

  auto manifest = make_manifest(
      "ingest", {{"corpus", corpus_path}, {"out", out_path}},
      {corpus_path}, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& out_path,
              const std::string& report_path, const TrainFlags& flags,
              const std::string& format_name, std::uint64_t seed, int jobs) {
  Stopwatch watch;
  drift::ReportFormat format = drift::parse_format(format_name);
  drift::TrainConfig config = flags.config();
  drift::Corpus corpus = drift::load_corpus(corpus_path);
  drift::TrainResult result = drift::build_content_model(corpus, config, jobs);
  if (!result.converged) {
    std::cerr << "warning: clustering did not stabilize within "
              << config.max_iterations << " iterations\n";
  }

  write_with_manifest_key(out_path, json::parse(result.model.to_json()));
  auto config_snapshot = flags.snapshot();
  config_snapshot.emplace_back("corpus", corpus_path);
  config_snapshot.emplace_back("out", out_path);
  auto manifest = make_manifest("train", config_snapshot, {corpus_path}, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);

  const std::string report_anchor =
      report_path.empty() ? out_path : report_path;
  std::string report = drift::format_training_report(
      domain_of(corpus_path), result, format,
      drift::manifest_name_for(report_anchor));
  if (report_path.empty()) {
    std::cout << report;
  } else {
    emit_report(report, report_path);
    drift::save_manifest(manifest, report_path);
  }
  return 0;
}

int cmd_tune(const std::string& corpus_path, const std::string& dev_path,
             const std::string& out_path, std::vector<int> k_values,
             std::vector<int> t_values, std::vector<double> d1_values,
             std::vector<double> d2_values, int max_iters,
             const CapFlags& cap_flags, const std::string& format_name,
             std::uint64_t seed, int jobs) {
  Stopwatch watch;
  drift::ReportFormat format = drift::parse_format(format_name);
  if (max_iters < 1) throw UsageError{"max-iters must be >= 1"};
  drift::GridSpec grid;
  if (!k_values.empty()) grid.k_values = std::move(k_values);
  if (!t_values.empty()) grid.t_values = std::move(t_values);
  if (!d1_values.empty()) grid.delta1_values = std::move(d1_values);
  if (!d2_values.empty()) grid.delta2_values = std::move(d2_values);
  for (int k : grid.k_values) {
    if (k < 2) throw UsageError{"k must be >= 2"};
  }
  grid.max_iterations = max_iters;
  grid.cap = cap_flags.cap(seed);

  drift::Corpus train = drift::load_corpus(corpus_path);
  drift::Corpus dev = drift::load_corpus(dev_path);
  drift::TuneResult result = drift::tune_parameters(train, dev, grid, jobs);

  emit_report(drift::format_tune_report(domain_of(corpus_path), result, format,
                                        drift::manifest_name_for(out_path)),
              out_path);
  std::cout << "best: k=" << result.best.k << " T=" << result.best.T
            << " d1=" << fmt_double(result.best.delta1)
            << " d2=" << fmt_double(result.best.delta2) << "\n";

  auto manifest = make_manifest(
      "tune",
      {{"corpus", corpus_path}, {"dev", dev_path}, {"out", out_path}},
      {corpus_path, dev_path}, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);
  return 0;
}

int cmd_order_eval(const std::string& model_path, const std::string& test_path,
                   const std::string& train_path, const std::string& out_path,
                   const CapFlags& cap_flags, const std::string& format_name,
                   std::uint64_t seed, int jobs) {
  Stopwatch watch;
  drift::ReportFormat format = drift::parse_format(format_name);
  drift::PermutationCap cap = cap_flags.cap(seed);
  drift::ContentModel model = drift::ContentModel::load(model_path);
  drift::Corpus test = drift::load_corpus(test_path);

  std::vector<drift::OrderingReport> systems;
  drift::ContentModelScorer scorer(model);
  systems.push_back(drift::evaluate_ordering(scorer, test, cap, jobs));
  std::optional<drift::BigramBaseline> baseline;
  if (!train_path.empty()) {
    drift::Corpus train = drift::load_corpus(train_path);
    baseline = drift::train_bigram_baseline(train, model.hyperparams().delta1);
    drift::BigramBaselineScorer bigram(*baseline, drift::BaselineMode::chain);
    systems.push_back(drift::evaluate_ordering(bigram, test, cap, jobs));
  }

  emit_report(
      drift::format_ordering_report(domain_of(test_path), systems, format,
                                    drift::manifest_name_for(out_path)),
      out_path);

  std::vector<std::string> inputs{model_path, test_path};
  if (!train_path.empty()) inputs.push_back(train_path);
  auto manifest = make_manifest(
      "order-eval",
      {{"model", model_path},
       {"test", test_path},
       {"out", out_path},
       {"max-exhaustive", std::to_string(cap.exhaustive_max)},
       {"sample-size", std::to_string(cap.sample_size)}},
      inputs, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);
  return 0;
}

int cmd_summarize_train(const std::string& model_path,
                        const std::string& corpus_path,
                        const std::string& summaries_path,
                        const std::string& pairs_path,
                        const std::string& out_path, int min_support,
                        double align_threshold, std::uint64_t seed) {
  Stopwatch watch;
  if (min_support < 1) throw UsageError{"min-support must be >= 1"};
  if (align_threshold < 0.0 || align_threshold > 1.0) {
    throw UsageError{"align-threshold must be in [0, 1]"};
  }
  drift::ContentModel model = drift::ContentModel::load(model_path);
  drift::Corpus fulls = drift::load_corpus(corpus_path);
  drift::Corpus summaries = drift::load_corpus(summaries_path);
  auto matched = match_pairs(fulls, summaries, pairs_path);
  auto pairs = align_pairs(matched, align_threshold);
  drift::SummaryModel summ = drift::train_summarizer(model, pairs, min_support);

  write_with_manifest_key(out_path, json::parse(summ.to_json()));
  for (std::size_t s = 0; s < summ.states.size(); ++s) {
    const drift::StateSummaryStats& st = summ.states[s];
    if (!st.eligible) continue;
    std::cout << "state " << s << ": summary_prob=" << fmt_double(st.summary_prob)
              << " support=" << st.support_docs << "\n";
  }

  std::vector<std::string> inputs{model_path, corpus_path, summaries_path};
  if (!pairs_path.empty()) inputs.push_back(pairs_path);
  auto manifest = make_manifest(
      "summarize-train",
      {{"model", model_path},
       {"corpus", corpus_path},
       {"summaries", summaries_path},
       {"min-support", std::to_string(min_support)},
       {"align-threshold", fmt_double(align_threshold)},
       {"out", out_path}},
      inputs, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);
  return 0;
}

int cmd_summarize(const std::string& model_path, const std::string& summ_path,
                  const std::string& corpus_path, const std::string& test_path,
                  const std::string& summaries_path,
                  const std::string& pairs_path, const std::string& out_path,
                  int ell, double align_threshold,
                  const std::string& format_name, std::uint64_t seed,
                  int jobs) {
  Stopwatch watch;
  drift::ReportFormat format = drift::parse_format(format_name);
  if (ell < 1) throw UsageError{"ell must be >= 1"};
  if ((corpus_path.empty()) == (test_path.empty())) {
    throw UsageError{"need exactly one of --corpus (extract) or --test (evaluate)"};
  }
  drift::ContentModel model = drift::ContentModel::load(model_path);
  drift::SummaryModel summ = drift::SummaryModel::load(summ_path);

  std::vector<std::string> inputs{model_path, summ_path};
  std::vector<std::pair<std::string, std::string>> config{
      {"model", model_path},
      {"summary-model", summ_path},
      {"ell", std::to_string(ell)},
      {"out", out_path}};

  if (!corpus_path.empty()) {
    drift::Corpus corpus = drift::load_corpus(corpus_path);
    json docs = json::array();
    for (const drift::Document& doc : corpus.documents) {
      std::vector<int> indices = drift::summarize(model, summ, doc, ell);
      json sentences = json::array();
      for (int idx : indices) sentences.push_back(doc.sentences[idx].raw);
      docs.push_back(json{{"doc_id", doc.doc_id},
                          {"indices", indices},
                          {"sentences", std::move(sentences)}});
    }
    write_with_manifest_key(out_path, json{{"documents", std::move(docs)}});
    inputs.push_back(corpus_path);
    config.emplace_back("corpus", corpus_path);
  } else {
    if (summaries_path.empty()) {
      throw UsageError{"--test needs --summaries with the gold summaries"};
    }
    drift::Corpus fulls = drift::load_corpus(test_path);
    drift::Corpus summaries = drift::load_corpus(summaries_path);
    auto matched = match_pairs(fulls, summaries, pairs_path);
    auto pairs = align_pairs(matched, align_threshold);
    std::vector<drift::SummarizationReport> systems;
    systems.push_back(drift::evaluate_summarization(model, summ, pairs, jobs));
    systems.push_back(drift::evaluate_lead(pairs));
    emit_report(drift::format_summarization_report(
                    domain_of(test_path), systems, format,
                    drift::manifest_name_for(out_path)),
                out_path);
    inputs.push_back(test_path);
    inputs.push_back(summaries_path);
    if (!pairs_path.empty()) inputs.push_back(pairs_path);
    config.emplace_back("test", test_path);
    config.emplace_back("summaries", summaries_path);
  }

  auto manifest = make_manifest("summarize", config, inputs, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);
  return 0;
}

int cmd_synth(const std::string& out_dir, const drift::PlantedSpec& spec,
              int jobs) {
  Stopwatch watch;
  fs::create_directories(out_dir);
  drift::PlantedCorpus planted = drift::generate_corpus(spec, jobs);

  const std::string corpus_path = (fs::path(out_dir) / "corpus.jsonl").string();
  {
    std::ofstream out(corpus_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + corpus_path);
    out << json{{"manifest", drift::manifest_name_for(corpus_path)}}.dump()
        << "\n";
    drift::save_corpus_jsonl(planted.corpus, out);
  }
  {
    drift::Corpus summaries;
    summaries.documents = drift::extract_summary_documents(planted);
    const std::string path = (fs::path(out_dir) / "summaries.jsonl").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    drift::save_corpus_jsonl(summaries, out);
  }
  drift::save_sidecar_jsonl(planted,
                            (fs::path(out_dir) / "sidecar.jsonl").string());
  {
    json j;
    j["num_states"] = spec.num_states;
    j["words_per_state"] = spec.words_per_state;
    j["shared_words"] = spec.shared_words;
    j["overlap"] = spec.overlap;
    j["self_transition"] = spec.self_transition;
    j["transitions"] = spec.transitions;
    j["num_docs"] = spec.num_docs;
    j["min_sentences"] = spec.min_sentences;
    j["max_sentences"] = spec.max_sentences;
    j["min_words"] = spec.min_words;
    j["max_words"] = spec.max_words;
    j["summary_states"] = spec.summary_states;
    j["summary_cap"] = spec.summary_cap;
    j["seed"] = spec.seed;
    drift::write_text_file((fs::path(out_dir) / "spec.json").string(),
                           j.dump(2) + "\n");
  }

  std::cout << "generated " << planted.corpus.documents.size()
            << " documents, " << planted.corpus.total_sentences()
            << " sentences, vocabulary "
            << planted.corpus.vocabulary.size() << "\n";

  auto manifest = make_manifest(
      "synth",
      {{"states", std::to_string(spec.num_states)},
       {"words-per-state", std::to_string(spec.words_per_state)},
       {"shared-words", std::to_string(spec.shared_words)},
       {"overlap", fmt_double(spec.overlap)},
       {"self", fmt_double(spec.self_transition)},
       {"docs", std::to_string(spec.num_docs)},
       {"out", out_dir}},
      {}, spec.seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, corpus_path);
  return 0;
}

int cmd_size_sweep(const std::string& corpus_path, const std::string& test_path,
                   const std::string& summaries_path,
                   const std::string& pairs_path, const std::string& out_path,
                   const std::vector<int>& sizes, const TrainFlags& flags,
                   const CapFlags& cap_flags, int min_support,
                   double align_threshold, const std::string& format_name,
                   std::uint64_t seed, int jobs) {
  Stopwatch watch;
  drift::ReportFormat format = drift::parse_format(format_name);
  if (sizes.empty()) throw UsageError{"--sizes is required"};
  drift::TrainConfig config = flags.config();
  drift::PermutationCap cap = cap_flags.cap(seed);

  drift::Corpus train = drift::load_corpus(corpus_path);
  drift::Corpus test = drift::load_corpus(test_path);
  auto entries = drift::size_sweep(train, config, sizes, test, cap, jobs);
  if (entries.size() < sizes.size()) {
    std::set<int> trained;
    for (const auto& entry : entries) trained.insert(entry.m_target);
    for (int size : sizes) {
      if (!trained.count(size)) {
        std::cerr << "warning: skipped m=" << size
                  << " (more states than the clustering yields; raise --k or"
                     " lower --T)\n";
      }
    }
  }

  std::optional<drift::Corpus> summaries;
  if (!summaries_path.empty()) {
    summaries = drift::load_corpus(summaries_path);
  }

  std::vector<drift::SizeSweepRow> rows;
  for (const drift::SizeSweepEntry& entry : entries) {
    drift::SizeSweepRow row;
    row.m = entry.m_target;
    row.oso_pred_rate = entry.ordering.oso_prediction_rate;
    if (summaries) {
      try {
        auto train_pairs = align_pairs(
            match_pairs(train, *summaries, pairs_path), align_threshold);
        auto test_pairs = align_pairs(
            match_pairs(test, *summaries, pairs_path), align_threshold);
        drift::SummaryModel summ =
            drift::train_summarizer(entry.result.model, train_pairs, min_support);
        row.extraction_accuracy =
            drift::evaluate_summarization(entry.result.model, summ, test_pairs,
                                          jobs)
                .mean_accuracy;
        row.has_extraction = true;
      } catch (const std::exception& e) {
        std::cerr << "warning: no extraction accuracy for m=" << row.m << ": "
                  << e.what() << "\n";
      }
    }
    rows.push_back(row);
  }

  emit_report(drift::format_size_sweep(domain_of(corpus_path), rows, format,
                                       drift::manifest_name_for(out_path)),
              out_path);

  std::vector<std::string> inputs{corpus_path, test_path};
  if (!summaries_path.empty()) inputs.push_back(summaries_path);
  if (!pairs_path.empty()) inputs.push_back(pairs_path);
  auto config_snapshot = flags.snapshot();
  config_snapshot.emplace_back("corpus", corpus_path);
  config_snapshot.emplace_back("test", test_path);
  config_snapshot.emplace_back("out", out_path);
  auto manifest = make_manifest("size-sweep", config_snapshot, inputs, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);
  return 0;
}

int cmd_learning_curve(const std::string& corpus_path,
                       const std::string& test_path,
                       const std::string& out_path,
                       const std::vector<int>& sizes, const TrainFlags& flags,
                       const CapFlags& cap_flags,
                       const std::string& format_name, std::uint64_t seed,
                       int jobs) {
  Stopwatch watch;
  drift::ReportFormat format = drift::parse_format(format_name);
  if (sizes.empty()) throw UsageError{"--sizes is required"};
  drift::TrainConfig config = flags.config();
  drift::PermutationCap cap = cap_flags.cap(seed);

  drift::Corpus train = drift::load_corpus(corpus_path);
  drift::Corpus test = drift::load_corpus(test_path);
  auto points =
      drift::learning_curve(train, config, sizes, test, cap, seed, jobs);

  emit_report(
      drift::format_learning_curve(domain_of(corpus_path), points, format,
                                   drift::manifest_name_for(out_path)),
      out_path);

  auto config_snapshot = flags.snapshot();
  config_snapshot.emplace_back("corpus", corpus_path);
  config_snapshot.emplace_back("test", test_path);
  config_snapshot.emplace_back("out", out_path);
  auto manifest = make_manifest("learning-curve", config_snapshot,
                                {corpus_path, test_path}, seed);
  manifest.wall_time_seconds = watch.seconds();
  drift::save_manifest(manifest, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"content models: sentence ordering and extractive summarization"};
  app.require_subcommand(1);

  std::string corpus_path, test_path, dev_path, model_path, out_path;
  std::string report_path, summaries_path, pairs_path, summary_model_path;
  std::string format_name = "text";
  std::uint64_t seed = 0;
  int jobs = 1;
  int ell = 3;
  int min_support = 3;
  double align_threshold = 0.5;
  TrainFlags train_flags;
  CapFlags cap_flags;
  std::vector<int> sizes;
  std::vector<int> grid_k, grid_t;
  std::vector<double> grid_d1, grid_d2;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "rng seed (DRIFT_SEED overrides)");
    cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));
    cmd->add_option("--format", format_name, "text, csv or json");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "split, mask and cache a corpus");
  ingest->add_option("--corpus", corpus_path)->required();
  ingest->add_option("--out", out_path)->required();
  add_common(ingest);

  CLI::App* train = app.add_subcommand("train", "build a content model");
  train->add_option("--corpus", corpus_path)->required();
  train->add_option("--out", out_path)->required();
  train->add_option("--report", report_path, "write the training report here");
  train_flags.add_to(train);
  add_common(train);

  CLI::App* tune = app.add_subcommand("tune", "grid-search hyperparameters");
  tune->add_option("--corpus", corpus_path)->required();
  tune->add_option("--dev", dev_path)->required();
  tune->add_option("--out", out_path)->required();
  tune->add_option("--k", grid_k, "candidate cluster counts");
  tune->add_option("--T", grid_t, "candidate minimum sizes");
  tune->add_option("--d1", grid_d1, "candidate emission smoothings");
  tune->add_option("--d2", grid_d2, "candidate transition smoothings");
  tune->add_option("--max-iters", train_flags.max_iters);
  cap_flags.add_to(tune);
  add_common(tune);

  CLI::App* order_eval =
      app.add_subcommand("order-eval", "rank original orderings");
  order_eval->add_option("--model", model_path)->required();
  order_eval->add_option("--test", test_path)->required();
  order_eval->add_option("--corpus", corpus_path,
                         "training corpus for the bigram baseline row");
  order_eval->add_option("--out,--report", out_path)->required();
  cap_flags.add_to(order_eval);
  add_common(order_eval);

  CLI::App* summarize_train =
      app.add_subcommand("summarize-train", "fit per-state summary probabilities");
  summarize_train->add_option("--model", model_path)->required();
  summarize_train->add_option("--corpus", corpus_path)->required();
  summarize_train->add_option("--summaries", summaries_path)->required();
  summarize_train->add_option("--pairs", pairs_path,
                              "JSONL {\"full\",\"summary\"} doc_id mapping");
  summarize_train->add_option("--out", out_path)->required();
  summarize_train->add_option("--min-support", min_support);
  summarize_train->add_option("--align-threshold", align_threshold);
  add_common(summarize_train);

  CLI::App* summarize = app.add_subcommand("summarize", "extract or evaluate summaries");
  summarize->add_option("--model", model_path)->required();
  summarize->add_option("--summary-model", summary_model_path)->required();
  summarize->add_option("--corpus", corpus_path, "documents to summarize");
  summarize->add_option("--test", test_path, "fulls with gold summaries");
  summarize->add_option("--summaries", summaries_path);
  summarize->add_option("--pairs", pairs_path);
  summarize->add_option("--out", out_path)->required();
  summarize->add_option("--ell", ell, "summary length");
  summarize->add_option("--align-threshold", align_threshold);
  add_common(summarize);

  CLI::App* synth = app.add_subcommand("synth", "generate a planted-HMM corpus");
  drift::PlantedSpec spec;
  synth->add_option("--out", out_path)->required();
  synth->add_option("--states", spec.num_states);
  synth->add_option("--words-per-state", spec.words_per_state);
  synth->add_option("--shared-words", spec.shared_words);
  synth->add_option("--overlap", spec.overlap);
  synth->add_option("--self", spec.self_transition);
  synth->add_option("--docs", spec.num_docs);
  synth->add_option("--min-sentences", spec.min_sentences);
  synth->add_option("--max-sentences", spec.max_sentences);
  synth->add_option("--min-words", spec.min_words);
  synth->add_option("--max-words", spec.max_words);
  synth->add_option("--summary-states", spec.summary_states);
  synth->add_option("--summary-cap", spec.summary_cap);
  add_common(synth);

  CLI::App* size_sweep = app.add_subcommand("size-sweep", "force model sizes");
  size_sweep->add_option("--corpus", corpus_path)->required();
  size_sweep->add_option("--test", test_path)->required();
  size_sweep->add_option("--summaries", summaries_path,
                         "gold summaries for the extraction column");
  size_sweep->add_option("--pairs", pairs_path);
  size_sweep->add_option("--out", out_path)->required();
  size_sweep->add_option("--sizes", sizes, "state counts to force")->required();
  size_sweep->add_option("--min-support", min_support);
  size_sweep->add_option("--align-threshold", align_threshold);
  train_flags.add_to(size_sweep);
  cap_flags.add_to(size_sweep);
  add_common(size_sweep);

  CLI::App* learning_curve =
      app.add_subcommand("learning-curve", "vary the training-set size");
  learning_curve->add_option("--corpus", corpus_path)->required();
  learning_curve->add_option("--test", test_path)->required();
  learning_curve->add_option("--out", out_path)->required();
  learning_curve->add_option("--sizes", sizes, "training-set sizes")->required();
  train_flags.add_to(learning_curve);
  cap_flags.add_to(learning_curve);
  add_common(learning_curve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 1;
  }

  try {
    seed = effective_seed(seed);
    if (app.got_subcommand(ingest)) {
      return cmd_ingest(corpus_path, out_path, format_name, seed);
    }
    if (app.got_subcommand(train)) {
      return cmd_train(corpus_path, out_path, report_path, train_flags,
                       format_name, seed, jobs);
    }
    if (app.got_subcommand(tune)) {
      return cmd_tune(corpus_path, dev_path, out_path, grid_k, grid_t, grid_d1,
                      grid_d2, train_flags.max_iters, cap_flags, format_name,
                      seed, jobs);
    }
    if (app.got_subcommand(order_eval)) {
      return cmd_order_eval(model_path, test_path, corpus_path, out_path,
                            cap_flags, format_name, seed, jobs);
    }
    if (app.got_subcommand(summarize_train)) {
      return cmd_summarize_train(model_path, corpus_path, summaries_path,
                                 pairs_path, out_path, min_support,
                                 align_threshold, seed);
    }
    if (app.got_subcommand(summarize)) {
      return cmd_summarize(model_path, summary_model_path, corpus_path,
                           test_path, summaries_path, pairs_path, out_path, ell,
                           align_threshold, format_name, seed, jobs);
    }
    if (app.got_subcommand(synth)) {
      if (synth->count("--seed") > 0 || std::getenv("DRIFT_SEED")) {
        spec.seed = seed;
      }
      return cmd_synth(out_path, spec, jobs);
    }
    if (app.got_subcommand(size_sweep)) {
      return cmd_size_sweep(corpus_path, test_path, summaries_path, pairs_path,
                            out_path, sizes, train_flags, cap_flags,
                            min_support, align_threshold, format_name, seed,
                            jobs);
    }
    if (app.got_subcommand(learning_curve)) {
      return cmd_learning_curve(corpus_path, test_path, out_path, sizes,
                                train_flags, cap_flags, format_name, seed,
                                jobs);
    }
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << e.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
