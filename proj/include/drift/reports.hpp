#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drift/corpus.hpp"
#include "drift/ordering.hpp"
#include "drift/summarization.hpp"
#include "drift/training.hpp"

namespace drift {

enum class ReportFormat { text, csv, json };

ReportFormat parse_format(const std::string& name);  // "text" | "csv" | "json"

// Provenance record written next to every output file. Wall time lives
// only here so the outputs themselves stay byte-identical across runs.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;  // flag, value
  std::vector<std::pair<std::string, std::string>> inputs;  // path, hash
  std::uint64_t seed = 0;
  std::string tool_version;
  double wall_time_seconds = 0.0;
};

// FNV-1a 64 hex digest of a file, or of (name, digest) pairs for a
// directory's files in sorted order.
std::string hash_input_hex(const std::string& path);

std::string manifest_name_for(const std::string& output_path);
void save_manifest(const RunManifest& manifest, const std::string& output_path);

// Every formatter embeds the manifest reference: a "manifest" key in JSON,
// a "# manifest: ..." first line in CSV, a trailer line in text.

std::string format_corpus_report(const std::string& domain,
                                 const CorpusStats& stats, ReportFormat format,
                                 const std::string& manifest);

std::string format_training_report(const std::string& domain,
                                   const TrainResult& result,
                                   ReportFormat format,
                                   const std::string& manifest);

std::string format_ordering_report(const std::string& domain,
                                   const std::vector<OrderingReport>& systems,
                                   ReportFormat format,
                                   const std::string& manifest);

std::string format_tune_report(const std::string& domain,
                               const TuneResult& result, ReportFormat format,
                               const std::string& manifest);

std::string format_summarization_report(
    const std::string& domain,
    const std::vector<SummarizationReport>& systems, ReportFormat format,
    const std::string& manifest);

struct SizeSweepRow {
  int m = 0;  // forced model size (states including insertion)
  double oso_pred_rate = 0.0;
  bool has_extraction = false;
  double extraction_accuracy = 0.0;
};

std::string format_size_sweep(const std::string& domain,
                              const std::vector<SizeSweepRow>& rows,
                              ReportFormat format, const std::string& manifest);

std::string format_learning_curve(const std::string& domain,
                                  const std::vector<CurvePoint>& points,
                                  ReportFormat format,
                                  const std::string& manifest);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace drift
