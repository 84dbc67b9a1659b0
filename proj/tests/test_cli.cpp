#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() {
  const char* path = std::getenv("DRIFT_CLI");
  REQUIRE_MESSAGE(path != nullptr, "DRIFT_CLI must point at the built binary");
  return path;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "drift-cli-XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// Runs through /bin/sh, returns the exit code (-1 if the child was killed).
int run(const std::string& command) {
  int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), ("missing file: " + path));
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("synth, train, order-eval round trip on one temp dir") {
  TempDir dir;
  const std::string synth_dir = dir.file("synth");
  const std::string quiet = " > " + dir.file("stdout.txt") + " 2> " + dir.file("stderr.txt");

  int rc = run(cli() + " synth --out " + synth_dir +
               " --states 3 --words-per-state 12 --shared-words 4" +
               " --overlap 0.15 --docs 14 --min-sentences 3 --max-sentences 5" +
               " --min-words 3 --max-words 6 --seed 7" + quiet);
  REQUIRE(rc == 0);
  const std::string corpus = synth_dir + "/corpus.jsonl";
  CHECK(fs::exists(corpus));
  CHECK(fs::exists(synth_dir + "/summaries.jsonl"));
  CHECK(fs::exists(synth_dir + "/sidecar.jsonl"));
  CHECK(fs::exists(synth_dir + "/spec.json"));
  CHECK(fs::exists(synth_dir + "/corpus.jsonl.manifest.json"));
  CHECK(slurp(dir.file("stdout.txt")).find("generated 14 documents") !=
        std::string::npos);

  // The cached corpus leads with a manifest pointer record.
  {
    std::ifstream in(corpus);
    std::string first_line;
    std::getline(in, first_line);
    json header = json::parse(first_line);
    CHECK(header.at("manifest") == "corpus.jsonl.manifest.json");
  }

  const std::string model = dir.file("model.json");
  rc = run(cli() + " train --corpus " + corpus + " --out " + model +
           " --report " + dir.file("train.txt") +
           " --k 5 --T 2 --max-iters 6" + quiet);
  REQUIRE(rc == 0);
  json model_json = slurp_json(model);
  CHECK(model_json.at("manifest") == "model.json.manifest.json");
  CHECK(model_json.contains("states"));
  json manifest = slurp_json(model + ".manifest.json");
  CHECK(manifest.at("command") == "train");
  CHECK(manifest.at("tool_version") == "drift 0.1.0");
  CHECK(manifest.contains("inputs"));
  CHECK(slurp(dir.file("train.txt")).find("Training report") !=
        std::string::npos);

  const std::string report = dir.file("order.csv");
  rc = run(cli() + " order-eval --model " + model + " --test " + corpus +
           " --corpus " + corpus + " --report " + report +
           " --format csv --max-exhaustive 5 --sample-size 40" + quiet);
  REQUIRE(rc == 0);
  std::string csv = slurp(report);
  CHECK(csv.rfind("# manifest: order.csv.manifest.json", 0) == 0);
  CHECK(csv.find("content_model") != std::string::npos);
  CHECK(csv.find("bigram_chain") != std::string::npos);
  CHECK(fs::exists(report + ".manifest.json"));
}

TEST_CASE("identical train runs produce byte-identical model files") {
  TempDir dir;
  const std::string quiet = " > /dev/null 2> " + dir.file("stderr.txt");
  REQUIRE(run(cli() + " synth --out " + dir.file("a") +
              " --states 3 --words-per-state 10 --shared-words 3" +
              " --docs 10 --min-sentences 3 --max-sentences 4" +
              " --min-words 3 --max-words 5 --seed 11" + quiet) == 0);
  const std::string corpus = dir.file("a") + "/corpus.jsonl";
  for (const char* sub : {"r1", "r2"}) {
    fs::create_directories(dir.file(sub));
    REQUIRE(run(cli() + " train --corpus " + corpus + " --out " +
                dir.file(sub) + "/model.json --k 4 --T 1 --max-iters 4" +
                quiet) == 0);
  }
  CHECK(slurp(dir.file("r1") + "/model.json") ==
        slurp(dir.file("r2") + "/model.json"));
}

TEST_CASE("DRIFT_SEED overrides the --seed flag") {
  TempDir dir;
  const std::string quiet = " > /dev/null 2>&1";
  const std::string base = " --states 3 --words-per-state 10 --shared-words 3"
                           " --docs 8 --min-sentences 3 --max-sentences 4"
                           " --min-words 3 --max-words 5";
  REQUIRE(run(cli() + " synth --out " + dir.file("flag") + base + " --seed 5" +
              quiet) == 0);
  REQUIRE(run("DRIFT_SEED=5 " + cli() + " synth --out " + dir.file("env") +
              base + quiet) == 0);
  REQUIRE(run("DRIFT_SEED=6 " + cli() + " synth --out " + dir.file("other") +
              base + " --seed 5" + quiet) == 0);
  CHECK(slurp(dir.file("flag") + "/corpus.jsonl") ==
        slurp(dir.file("env") + "/corpus.jsonl"));
  CHECK(slurp(dir.file("flag") + "/corpus.jsonl") !=
        slurp(dir.file("other") + "/corpus.jsonl"));
}

TEST_CASE("ingest caches a raw directory corpus") {
  TempDir dir;
  fs::create_directories(dir.file("raw"));
  write(dir.file("raw") + "/one.txt",
        "A strong earthquake struck the city on March 3. Dozens of people "
        "were hurt. Rescue crews searched the rubble. Officials promised "
        "relief funds.\n");
  write(dir.file("raw") + "/two.txt",
        "The quake damaged twelve bridges. Hospitals treated the injured "
        "overnight. Aid agencies arrived within days. Reconstruction may "
        "take years.\n");
  const std::string cache = dir.file("cache.jsonl");
  int rc = run(cli() + " ingest --corpus " + dir.file("raw") + " --out " +
               cache + " > " + dir.file("report.txt") + " 2> /dev/null");
  REQUIRE(rc == 0);
  CHECK(fs::exists(cache + ".manifest.json"));
  CHECK(slurp(dir.file("report.txt")).find("Corpus statistics") !=
        std::string::npos);

  // The cache is itself loadable: train straight from it.
  rc = run(cli() + " train --corpus " + cache + " --out " +
           dir.file("model.json") + " --k 2 --T 1 --max-iters 3" +
           " > /dev/null 2> /dev/null");
  CHECK(rc == 0);
}

TEST_CASE("exit codes distinguish usage errors from data errors") {
  TempDir dir;
  const std::string err = dir.file("stderr.txt");

  SUBCASE("bad hyperparameter is a usage error") {
    int rc = run(cli() + " train --corpus missing.jsonl --out " +
                 dir.file("m.json") + " --k 1 > /dev/null 2> " + err);
    CHECK(rc == 1);
    CHECK(slurp(err).find("k must be >= 2") != std::string::npos);
  }
  SUBCASE("unknown flag is a usage error") {
    CHECK(run(cli() + " train --bogus > /dev/null 2> /dev/null") == 1);
  }
  SUBCASE("missing subcommand is a usage error") {
    CHECK(run(cli() + " > /dev/null 2> /dev/null") == 1);
  }
  SUBCASE("bad DRIFT_SEED is a usage error") {
    CHECK(run("DRIFT_SEED=banana " + cli() + " synth --out " + dir.file("s") +
              " > /dev/null 2> " + err) == 1);
    CHECK(slurp(err).find("DRIFT_SEED") != std::string::npos);
  }
  SUBCASE("missing input file is a data error") {
    int rc = run(cli() + " train --corpus " + dir.file("nope.jsonl") +
                 " --out " + dir.file("m.json") + " --k 4 > /dev/null 2> " +
                 err);
    CHECK(rc == 2);
    CHECK(slurp(err).find("error:") != std::string::npos);
  }
  SUBCASE("help exits zero") {
    CHECK(run(cli() + " --help > /dev/null 2> /dev/null") == 0);
    CHECK(run(cli() + " train --help > /dev/null 2> /dev/null") == 0);
  }
}
