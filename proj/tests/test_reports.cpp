#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"

#include "drift/reports.hpp"

using namespace drift;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("drift_reports_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

OrderingReport sample_ordering(const std::string& system) {
  OrderingReport report;
  report.system = system;
  report.num_docs = 3;
  report.num_skipped = 1;
  report.mean_rank = 2.5;
  report.oso_prediction_rate = 2.0 / 3.0;
  report.mean_tau = 0.81;
  report.bin_rank_0_4 = 2;
  report.bin_rank_5_10 = 1;
  report.bin_rank_gt_10 = 0;
  OrderingResult r;
  r.doc_id = "doc0";
  r.n = 4;
  r.oso_rank = 0;
  r.oso_predicted = true;
  r.best_perm = {0, 1, 2, 3};
  r.tau_of_best = 1.0;
  r.num_permutations_scored = 24;
  report.per_doc.push_back(r);
  return report;
}

}  // namespace

TEST_CASE("format names parse or fail loudly") {
  CHECK(parse_format("text") == ReportFormat::text);
  CHECK(parse_format("csv") == ReportFormat::csv);
  CHECK(parse_format("json") == ReportFormat::json);
  CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
}

TEST_CASE("ordering report carries both csv tables and the manifest") {
  std::vector<OrderingReport> systems = {sample_ordering("content_model"),
                                         sample_ordering("bigram_chain")};
  const std::string csv =
      format_ordering_report("quake", systems, ReportFormat::csv, "r.manifest.json");
  auto lines = lines_of(csv);
  REQUIRE(lines.size() >= 8);
  CHECK(lines[0] == "# manifest: r.manifest.json");
  CHECK(lines[1] == "domain,system,mean_rank,oso_pred_rate,mean_tau");
  CHECK(lines[2].rfind("quake,content_model,", 0) == 0);
  CHECK(lines[3].rfind("quake,bigram_chain,", 0) == 0);
  CHECK(lines[4].empty());
  CHECK(lines[5] == "domain,system,rank_0_4,rank_5_10,rank_gt_10");
  CHECK(lines[6] == "quake,content_model,2,1,0");

  const std::string text =
      format_ordering_report("quake", systems, ReportFormat::text, "r.manifest.json");
  CHECK(text.find("Ordering results") != std::string::npos);
  CHECK(text.find("content_model") != std::string::npos);
  CHECK(text.find("r.manifest.json") != std::string::npos);

  const std::string jtext =
      format_ordering_report("quake", systems, ReportFormat::json, "r.manifest.json");
  auto j = nlohmann::json::parse(jtext);
  CHECK(j.at("manifest") == "r.manifest.json");
  CHECK(j.at("domain") == "quake");
  REQUIRE(j.at("systems").size() == 2);
  CHECK(j.at("systems")[0].at("per_doc").size() == 1);
}

TEST_CASE("corpus, summarization, sweep and curve csv schemas are stable") {
  CorpusStats stats;
  stats.avg_doc_length_sentences = 10.4;
  stats.stddev_length = 3.1;
  stats.vocab_size = 1200;
  stats.token_type_ratio = 13.2;
  auto lines = lines_of(
      format_corpus_report("quake", stats, ReportFormat::csv, "m.json"));
  REQUIRE(lines.size() == 3);
  CHECK(lines[1] ==
        "domain,avg_doc_length_sentences,stddev_length,vocab_size,"
        "token_type_ratio");
  CHECK(lines[2] == "quake,10.4,3.1,1200,13.2");

  SummarizationReport summ;
  summ.system = "content_model";
  summ.num_docs = 10;
  summ.mean_accuracy = 0.88;
  SummarizationReport lead;
  lead.system = "lead";
  lead.num_docs = 10;
  lead.mean_accuracy = 0.69;
  auto summ_lines = lines_of(format_summarization_report(
      "quake", {summ, lead}, ReportFormat::csv, "m.json"));
  CHECK(summ_lines[1] == "system,extraction_accuracy");
  CHECK(summ_lines[2] == "content_model,0.88");
  CHECK(summ_lines[3] == "lead,0.69");

  std::vector<SizeSweepRow> rows(2);
  rows[0] = {10, 0.72, true, 0.88};
  rows[1] = {20, 0.64, false, 0.0};
  auto sweep_lines =
      lines_of(format_size_sweep("quake", rows, ReportFormat::csv, "m.json"));
  CHECK(sweep_lines[1] == "m,oso_pred_rate,extraction_accuracy");
  CHECK(sweep_lines[2] == "10,0.72,0.88");
  CHECK(sweep_lines[3].rfind("20,0.64", 0) == 0);  // missing metric stays blank

  std::vector<CurvePoint> points(1);
  points[0].train_size = 40;
  points[0].oso_prediction_rate = 0.5;
  points[0].mean_rank = 12.5;
  points[0].mean_tau = 0.44;
  auto curve_lines = lines_of(
      format_learning_curve("quake", points, ReportFormat::csv, "m.json"));
  CHECK(curve_lines[1] == "train_size,oso_prediction_rate,mean_rank,mean_tau");
  CHECK(curve_lines[2] == "40,0.5,12.5,0.44");
}

TEST_CASE("training and tune reports mention their key facts") {
  // a minimal but real training result
  Corpus corpus;
  for (int d = 0; d < 4; ++d) {
    Document doc;
    doc.doc_id = "d" + std::to_string(d);
    doc.sentences.push_back(
        Sentence{doc.doc_id, 0, "quake hit", {"quake", "hit"}});
    doc.sentences.push_back(
        Sentence{doc.doc_id, 1, "aid came", {"aid", "came"}});
    corpus.documents.push_back(doc);
  }
  corpus.vocabulary = build_vocabulary(corpus.documents);
  TrainConfig config;
  config.k = 2;
  config.T = 1;
  config.delta1 = 1e-4;
  TrainResult result = build_content_model(corpus, config);

  const std::string text =
      format_training_report("quake", result, ReportFormat::text, "m.json");
  CHECK(text.find("states") != std::string::npos);
  CHECK(text.find("m.json") != std::string::npos);
  auto j = nlohmann::json::parse(
      format_training_report("quake", result, ReportFormat::json, "m.json"));
  CHECK(j.at("num_states").get<int>() == result.model.num_states());
  CHECK(j.at("converged").get<bool>() == result.converged);

  TuneResult tune;
  GridCell cell;
  cell.config = config;
  cell.oso_prediction_rate = 0.7;
  cell.num_states = 3;
  tune.cells.push_back(cell);
  GridCell failed;
  failed.config = config;
  failed.config.k = 4;
  failed.failed = true;
  failed.error = "cluster too small";
  tune.cells.push_back(failed);
  tune.best = config;
  auto tune_lines =
      lines_of(format_tune_report("quake", tune, ReportFormat::csv, "m.json"));
  CHECK(tune_lines[1].rfind("domain,k,T,delta1,delta2,oso_pred_rate", 0) == 0);
  CHECK(tune_lines.size() == 4);
}

TEST_CASE("input hashing distinguishes contents and covers directories") {
  TempDir tmp;
  const std::string a = (tmp.path / "a.txt").string();
  const std::string b = (tmp.path / "b.txt").string();
  {
    std::ofstream(a) << "alpha\n";
    std::ofstream(b) << "beta\n";
  }
  const std::string ha = hash_input_hex(a);
  CHECK(ha.size() == 16);
  CHECK(ha == hash_input_hex(a));
  CHECK(ha != hash_input_hex(b));

  const std::string hdir = hash_input_hex(tmp.path.string());
  CHECK(hdir.size() == 16);
  {
    std::ofstream(b) << "beta2\n";
  }
  CHECK(hash_input_hex(tmp.path.string()) != hdir);
}

TEST_CASE("manifests land next to the output file") {
  TempDir tmp;
  CHECK(manifest_name_for("/x/y/report.csv") == "report.csv.manifest.json");

  RunManifest manifest;
  manifest.command = "train";
  manifest.config = {{"k", "40"}};
  manifest.inputs = {{"corpus.jsonl", "0123456789abcdef"}};
  manifest.seed = 42;
  manifest.tool_version = "drift 0.1.0";
  manifest.wall_time_seconds = 1.25;

  const std::string out = (tmp.path / "model.json").string();
  std::ofstream(out) << "{}\n";
  save_manifest(manifest, out);

  const std::string mpath = (tmp.path / "model.json.manifest.json").string();
  std::ifstream in(mpath);
  REQUIRE(in.good());
  auto j = nlohmann::json::parse(in);
  CHECK(j.at("command") == "train");
  CHECK(j.at("seed") == 42);
  CHECK(j.at("tool_version") == "drift 0.1.0");
  CHECK(j.at("inputs").contains("corpus.jsonl"));
}

TEST_CASE("write_text_file reports unwritable paths") {
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/report.txt", "x"),
                  std::runtime_error);
}
