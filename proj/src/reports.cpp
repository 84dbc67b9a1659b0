#include "drift/reports.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "drift/rng.hpp"

namespace drift {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string pct(double fraction) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

std::string fixed2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

void row(std::ostringstream& out, const std::vector<std::string>& cells,
         const std::vector<int>& widths) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << "  ";
    out << std::left << std::setw(widths[i]) << cells[i];
  }
  out << "\n";
}

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

json ordering_result_json(const OrderingResult& r) {
  return json{{"doc_id", r.doc_id},
              {"n", r.n},
              {"oso_rank", r.oso_rank},
              {"oso_rank_pessimistic", r.oso_rank_pessimistic},
              {"oso_predicted", r.oso_predicted},
              {"estimated_rank", r.estimated_rank},
              {"sampled", r.sampled},
              {"num_permutations_scored", r.num_permutations_scored},
              {"tau_of_best", r.tau_of_best},
              {"best_perm", r.best_perm},
              {"oso_score", r.oso_score},
              {"best_score", r.best_score}};
}

}  // namespace

ReportFormat parse_format(const std::string& name) {
  if (name == "text") return ReportFormat::text;
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown format: " + name +
                              " (expected text, csv or json)");
}

std::string hash_input_hex(const std::string& path) {
  fs::path p(path);
  std::error_code ec;
  if (fs::is_directory(p, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const fs::path& file : files) {
      acc += file.filename().string();
      acc += ':';
      acc += hash_input_hex(file.string());
      acc += '\n';
    }
    return hex64(fnv1a64(acc));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return hex64(fnv1a64(buf.str()));
}

std::string manifest_name_for(const std::string& output_path) {
  return fs::path(output_path).filename().string() + ".manifest.json";
}

void save_manifest(const RunManifest& manifest, const std::string& output_path) {
  json j;
  j["command"] = manifest.command;
  json config = json::object();
  for (const auto& [flag, value] : manifest.config) config[flag] = value;
  j["config"] = std::move(config);
  json inputs = json::object();
  for (const auto& [path, hash] : manifest.inputs) inputs[path] = hash;
  j["inputs"] = std::move(inputs);
  j["seed"] = manifest.seed;
  j["tool_version"] = manifest.tool_version;
  j["wall_time_seconds"] = manifest.wall_time_seconds;

  fs::path out_path = fs::path(output_path).parent_path() /
                      manifest_name_for(output_path);
  write_text_file(out_path.string(), j.dump(2) + "\n");
}

std::string format_corpus_report(const std::string& domain,
                                 const CorpusStats& stats, ReportFormat format,
                                 const std::string& manifest) {
  switch (format) {
    case ReportFormat::json: {
      json j;
      j["manifest"] = manifest;
      j["domain"] = domain;
      j["avg_doc_length_sentences"] = stats.avg_doc_length_sentences;
      j["stddev_length"] = stats.stddev_length;
      j["vocab_size"] = stats.vocab_size;
      j["token_type_ratio"] = stats.token_type_ratio;
      return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out = "# manifest: " + manifest + "\n";
      out += "domain,avg_doc_length_sentences,stddev_length,vocab_size,"
             "token_type_ratio\n";
      out += csv_escape(domain) + "," + fmt(stats.avg_doc_length_sentences) +
             "," + fmt(stats.stddev_length) + "," +
             std::to_string(stats.vocab_size) + "," +
             fmt(stats.token_type_ratio) + "\n";
      return out;
    }
    case ReportFormat::text: {
      std::ostringstream out;
      out << "Corpus statistics\n";
      const std::vector<int> w{16, 22, 12, 16};
      row(out, {"Domain", "Avg. length (sents)", "Vocabulary", "Token/type"},
          w);
      row(out,
          {domain,
           fixed2(stats.avg_doc_length_sentences) + " +/- " +
               fixed2(stats.stddev_length),
           std::to_string(stats.vocab_size), fixed2(stats.token_type_ratio)},
          w);
      out << "manifest: " << manifest << "\n";
      return out.str();
    }
  }
  throw std::logic_error("unreachable");
}

std::string format_training_report(const std::string& domain,
                                   const TrainResult& result,
                                   ReportFormat format,
                                   const std::string& manifest) {
  const int states = result.model.num_states();
  switch (format) {
    case ReportFormat::json: {
      json j;
      j["manifest"] = manifest;
      j["domain"] = domain;
      j["num_states"] = states;
      j["iterations"] = result.iterations;
      j["converged"] = result.converged;
      j["loglik_per_iteration"] = result.loglik_per_iteration;
      j["cluster_sizes"] = result.clustering.cluster_sizes();
      j["hyperparams"] = {{"k", result.model.hyperparams().k},
                          {"T", result.model.hyperparams().T},
                          {"delta1", result.model.hyperparams().delta1},
                          {"delta2", result.model.hyperparams().delta2},
                          {"use_end", result.model.hyperparams().use_end}};
      return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out = "# manifest: " + manifest + "\n";
      out += "domain,num_states,iterations,converged,final_loglik\n";
      out += csv_escape(domain) + "," + std::to_string(states) + "," +
             std::to_string(result.iterations) + "," +
             (result.converged ? "1" : "0") + "," +
             fmt(result.loglik_per_iteration.empty()
                     ? 0.0
                     : result.loglik_per_iteration.back()) +
             "\n";
      return out;
    }
    case ReportFormat::text: {
      std::ostringstream out;
      out << "Training report, domain: " << domain << "\n";
      out << "states: " << states << " (including the insertion state)\n";
      out << "iterations: " << result.iterations
          << (result.converged ? " (stabilized)" : " (max iterations reached)")
          << "\n";
      out << "log-likelihood per pass:";
      for (double ll : result.loglik_per_iteration) out << " " << fixed2(ll);
      out << "\n";
      out << "cluster sizes:";
      for (int size : result.clustering.cluster_sizes()) out << " " << size;
      out << "\n";
      out << "manifest: " << manifest << "\n";
      return out.str();
    }
  }
  throw std::logic_error("unreachable");
}

std::string format_ordering_report(const std::string& domain,
                                   const std::vector<OrderingReport>& systems,
                                   ReportFormat format,
                                   const std::string& manifest) {
  switch (format) {
    case ReportFormat::json: {
      json j;
      j["manifest"] = manifest;
      j["domain"] = domain;
      json arr = json::array();
      for (const OrderingReport& r : systems) {
        json sys;
        sys["system"] = r.system;
        sys["num_docs"] = r.num_docs;
        sys["num_skipped"] = r.num_skipped;
        sys["mean_rank"] = r.mean_rank;
        sys["oso_pred_rate"] = r.oso_prediction_rate;
        sys["mean_tau"] = r.mean_tau;
        sys["rank_bins"] = {{"0_4", r.bin_rank_0_4},
                            {"5_10", r.bin_rank_5_10},
                            {"gt_10", r.bin_rank_gt_10}};
        json docs = json::array();
        for (const OrderingResult& d : r.per_doc) {
          docs.push_back(ordering_result_json(d));
        }
        sys["per_doc"] = std::move(docs);
        arr.push_back(std::move(sys));
      }
      j["systems"] = std::move(arr);
      return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out = "# manifest: " + manifest + "\n";
      out += "domain,system,mean_rank,oso_pred_rate,mean_tau\n";
      for (const OrderingReport& r : systems) {
        out += csv_escape(domain) + "," + csv_escape(r.system) + "," +
               fmt(r.mean_rank) + "," + fmt(r.oso_prediction_rate) + "," +
               fmt(r.mean_tau) + "\n";
      }
      out += "\ndomain,system,rank_0_4,rank_5_10,rank_gt_10\n";
      for (const OrderingReport& r : systems) {
        out += csv_escape(domain) + "," + csv_escape(r.system) + "," +
               std::to_string(r.bin_rank_0_4) + "," +
               std::to_string(r.bin_rank_5_10) + "," +
               std::to_string(r.bin_rank_gt_10) + "\n";
      }
      return out;
    }
    case ReportFormat::text: {
      std::ostringstream out;
      out << "Ordering results (averages over the test cases), domain: "
          << domain << "\n";
      const std::vector<int> w{16, 10, 10, 12};
      row(out, {"System", "Rank", "OSO pred.", "Kendall tau"}, w);
      for (const OrderingReport& r : systems) {
        row(out,
            {r.system, fixed2(r.mean_rank), pct(r.oso_prediction_rate),
             fixed2(r.mean_tau)},
            w);
      }
      out << "\nRank of the original ordering within a given range\n";
      const std::vector<int> w2{16, 8, 8, 8};
      row(out, {"System", "[0-4]", "[5-10]", ">10"}, w2);
      for (const OrderingReport& r : systems) {
        row(out,
            {r.system, std::to_string(r.bin_rank_0_4),
             std::to_string(r.bin_rank_5_10),
             std::to_string(r.bin_rank_gt_10)},
            w2);
      }
      if (!systems.empty()) {
        out << "\ndocuments scored: " << systems.front().num_docs
            << ", skipped (fewer than 2 sentences): "
            << systems.front().num_skipped << "\n";
      }
      out << "manifest: " << manifest << "\n";
      return out.str();
    }
  }
  throw std::logic_error("unreachable");
}

std::string format_tune_report(const std::string& domain,
                               const TuneResult& result, ReportFormat format,
                               const std::string& manifest) {
  const auto is_best = [&](const GridCell& cell) {
    return !cell.failed && cell.config.k == result.best.k &&
           cell.config.T == result.best.T &&
           cell.config.delta1 == result.best.delta1 &&
           cell.config.delta2 == result.best.delta2;
  };
  switch (format) {
    case ReportFormat::json: {
      json j;
      j["manifest"] = manifest;
      j["domain"] = domain;
      j["best"] = {{"k", result.best.k},
                   {"T", result.best.T},
                   {"delta1", result.best.delta1},
                   {"delta2", result.best.delta2}};
      json cells = json::array();
      for (const GridCell& cell : result.cells) {
        json c;
        c["k"] = cell.config.k;
        c["T"] = cell.config.T;
        c["delta1"] = cell.config.delta1;
        c["delta2"] = cell.config.delta2;
        c["failed"] = cell.failed;
        if (cell.failed) {
          c["error"] = cell.error;
        } else {
          c["oso_pred_rate"] = cell.oso_prediction_rate;
          c["mean_rank"] = cell.mean_rank;
          c["mean_tau"] = cell.mean_tau;
          c["num_states"] = cell.num_states;
        }
        c["best"] = is_best(cell);
        cells.push_back(std::move(c));
      }
      j["cells"] = std::move(cells);
      return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out = "# manifest: " + manifest + "\n";
      out += "domain,k,T,delta1,delta2,oso_pred_rate,mean_rank,mean_tau,"
             "num_states,failed,best\n";
      for (const GridCell& cell : result.cells) {
        out += csv_escape(domain) + "," + std::to_string(cell.config.k) + "," +
               std::to_string(cell.config.T) + "," + fmt(cell.config.delta1) +
               "," + fmt(cell.config.delta2) + ",";
        if (cell.failed) {
          out += ",,,";
        } else {
          out += fmt(cell.oso_prediction_rate) + "," + fmt(cell.mean_rank) +
                 "," + fmt(cell.mean_tau) + ",";
        }
        out += cell.failed ? "" : std::to_string(cell.num_states);
        out += std::string(",") + (cell.failed ? "1" : "0") + "," +
               (is_best(cell) ? "1" : "0") + "\n";
      }
      return out;
    }
    case ReportFormat::text: {
      std::ostringstream out;
      out << "Grid search, domain: " << domain << "\n";
      const std::vector<int> w{6, 4, 10, 10, 12, 10, 10, 8, 6};
      row(out,
          {"k", "T", "delta1", "delta2", "OSO pred.", "Rank", "tau", "states",
           "best"},
          w);
      for (const GridCell& cell : result.cells) {
        if (cell.failed) {
          row(out,
              {std::to_string(cell.config.k), std::to_string(cell.config.T),
               fmt(cell.config.delta1), fmt(cell.config.delta2),
               "failed: " + cell.error, "", "", "", ""},
              w);
          continue;
        }
        row(out,
            {std::to_string(cell.config.k), std::to_string(cell.config.T),
             fmt(cell.config.delta1), fmt(cell.config.delta2),
             pct(cell.oso_prediction_rate), fixed2(cell.mean_rank),
             fixed2(cell.mean_tau), std::to_string(cell.num_states),
             is_best(cell) ? "*" : ""},
            w);
      }
      out << "manifest: " << manifest << "\n";
      return out.str();
    }
  }
  throw std::logic_error("unreachable");
}

std::string format_summarization_report(
    const std::string& domain,
    const std::vector<SummarizationReport>& systems, ReportFormat format,
    const std::string& manifest) {
  switch (format) {
    case ReportFormat::json: {
      json j;
      j["manifest"] = manifest;
      j["domain"] = domain;
      json arr = json::array();
      for (const SummarizationReport& r : systems) {
        json sys;
        sys["system"] = r.system;
        sys["num_docs"] = r.num_docs;
        sys["extraction_accuracy"] = r.mean_accuracy;
        json docs = json::array();
        for (const SummaryEval& d : r.per_doc) {
          docs.push_back(json{{"doc_id", d.doc_id},
                              {"predicted", d.predicted},
                              {"gold", d.gold},
                              {"accuracy", d.accuracy}});
        }
        sys["per_doc"] = std::move(docs);
        arr.push_back(std::move(sys));
      }
      j["systems"] = std::move(arr);
      return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out = "# manifest: " + manifest + "\n";
      out += "system,extraction_accuracy\n";
      for (const SummarizationReport& r : systems) {
        out += csv_escape(r.system) + "," + fmt(r.mean_accuracy) + "\n";
      }
      return out;
    }
    case ReportFormat::text: {
      std::ostringstream out;
      out << "Summarization-task results, domain: " << domain << "\n";
      const std::vector<int> w{16, 20};
      row(out, {"System", "Extraction accuracy"}, w);
      for (const SummarizationReport& r : systems) {
        row(out, {r.system, pct(r.mean_accuracy)}, w);
      }
      out << "manifest: " << manifest << "\n";
      return out.str();
    }
  }
  throw std::logic_error("unreachable");
}

std::string format_size_sweep(const std::string& domain,
                              const std::vector<SizeSweepRow>& rows,
                              ReportFormat format,
                              const std::string& manifest) {
  switch (format) {
    case ReportFormat::json: {
      json j;
      j["manifest"] = manifest;
      j["domain"] = domain;
      json arr = json::array();
      for (const SizeSweepRow& r : rows) {
        json row_json;
        row_json["m"] = r.m;
        row_json["oso_pred_rate"] = r.oso_pred_rate;
        if (r.has_extraction) {
          row_json["extraction_accuracy"] = r.extraction_accuracy;
        }
        arr.push_back(std::move(row_json));
      }
      j["rows"] = std::move(arr);
      return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out = "# manifest: " + manifest + "\n";
      out += "m,oso_pred_rate,extraction_accuracy\n";
      for (const SizeSweepRow& r : rows) {
        out += std::to_string(r.m) + "," + fmt(r.oso_pred_rate) + "," +
               (r.has_extraction ? fmt(r.extraction_accuracy) : "") + "\n";
      }
      return out;
    }
    case ReportFormat::text: {
      std::ostringstream out;
      out << "Performance as a function of model size, domain: " << domain
          << "\n";
      const std::vector<int> w{6, 10, 16};
      row(out, {"m", "OSO pred.", "Extraction acc."}, w);
      for (const SizeSweepRow& r : rows) {
        row(out,
            {std::to_string(r.m), pct(r.oso_pred_rate),
             r.has_extraction ? pct(r.extraction_accuracy) : "-"},
            w);
      }
      out << "manifest: " << manifest << "\n";
      return out.str();
    }
  }
  throw std::logic_error("unreachable");
}

std::string format_learning_curve(const std::string& domain,
                                  const std::vector<CurvePoint>& points,
                                  ReportFormat format,
                                  const std::string& manifest) {
  switch (format) {
    case ReportFormat::json: {
      json j;
      j["manifest"] = manifest;
      j["domain"] = domain;
      json arr = json::array();
      for (const CurvePoint& p : points) {
        arr.push_back(json{{"train_size", p.train_size},
                           {"oso_prediction_rate", p.oso_prediction_rate},
                           {"mean_rank", p.mean_rank},
                           {"mean_tau", p.mean_tau}});
      }
      j["points"] = std::move(arr);
      return j.dump(2) + "\n";
    }
    case ReportFormat::csv: {
      std::string out = "# manifest: " + manifest + "\n";
      out += "train_size,oso_prediction_rate,mean_rank,mean_tau\n";
      for (const CurvePoint& p : points) {
        out += std::to_string(p.train_size) + "," +
               fmt(p.oso_prediction_rate) + "," + fmt(p.mean_rank) + "," +
               fmt(p.mean_tau) + "\n";
      }
      return out;
    }
    case ReportFormat::text: {
      std::ostringstream out;
      out << "Ordering as a function of training-set size, domain: " << domain
          << "\n";
      const std::vector<int> w{12, 10, 10, 10};
      row(out, {"Train size", "OSO pred.", "Rank", "tau"}, w);
      for (const CurvePoint& p : points) {
        row(out,
            {std::to_string(p.train_size), pct(p.oso_prediction_rate),
             fixed2(p.mean_rank), fixed2(p.mean_tau)},
            w);
      }
      out << "manifest: " << manifest << "\n";
      return out.str();
    }
  }
  throw std::logic_error("unreachable");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace drift
