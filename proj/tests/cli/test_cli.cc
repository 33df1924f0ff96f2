#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mlal/csv.h"
#include "tempdir.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MLAL_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<mlal::CsvRow> csv(const fs::path& p) {
  std::ifstream in(p);
  return mlal::read_csv(in, p.string());
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Synthetic corpus with a fast training schedule.
fs::path make_corpus(const fs::path& dir, int languages, const std::string& extra = "",
                     const std::function<void(json&)>& edit = {}) {
  const int rc = cli("synth --out " + q(dir) + " --languages " + std::to_string(languages) +
                          " --train-size 200 --test-size 30 --budget 45 " + extra,
                      dir.parent_path() / (dir.filename().string() + ".synth.log"));
  REQUIRE(rc == 0);
  auto config = json::parse(slurp(dir / "config.json"));
  config["training"] = {{"learning_rates", {3.0}}, {"max_epochs", 5}, {"patience", 2}};
  config["features"] = {{"hash_bits", 12}};
  if (edit) edit(config);
  std::ofstream(dir / "config.json") << config.dump(2);
  return dir / "config.json";
}

// Every regular file under dir keyed by relative path, except the manifest
// and the resolved config, which record timestamps and the output path.
std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto name = e.path().filename();
    if (!e.is_regular_file() || name == "manifest.json" || name == "config.json") continue;
    out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("validate exit codes") {
  TempDir dir("cli");
  const auto config = make_corpus(dir.path() / "c", 2);
  const auto log = dir.path() / "log";
  CHECK(cli("validate --config " + q(config), log) == 0);
  CHECK(json::parse(slurp(log)).at("budget").at("rounds") == 4);

  auto j = json::parse(slurp(config));
  j["foo"] = true;
  std::ofstream(dir.path() / "c" / "bad.json") << j.dump();
  CHECK(cli("validate --config " + q(dir.path() / "c" / "bad.json"), log) == 1);
  CHECK(slurp(log).find("foo") != std::string::npos);
  CHECK(cli("validate --config " + q(dir.path() / "nothing.json"), log) == 1);
  CHECK(cli("frobnicate", log) == 1);
  CHECK(cli("synth --out " + q(dir.path() / "x") + " --overlap 2", log) == 1);
}

TEST_CASE("run failures") {
  TempDir dir("cli");
  const auto config = make_corpus(dir.path() / "c", 2);
  const auto log = dir.path() / "log";

  // malformed training data is invalid input
  std::ofstream(dir.path() / "c" / "l1" / "train.tsv", std::ios::app) << "pos\tl1\n";
  CHECK(cli("run --config " + q(config) + " --out " + q(dir.path() / "r1"), log) == 1);

  // an output location that cannot be created is a runtime failure
  const auto good = make_corpus(dir.path() / "d", 2);
  std::ofstream(dir.path() / "blocker") << "file";
  CHECK(cli("run --config " + q(good) + " --out " + q(dir.path() / "blocker" / "out"), log) == 2);

  // reusing a results directory with a different configuration is refused
  CHECK(cli("run --config " + q(good) + " --out " + q(dir.path() / "r2"), log) == 0);
  CHECK(cli("run --config " + q(good) + " --seed 5 --out " + q(dir.path() / "r2"), log) == 1);

  CHECK(cli("report " + q(dir.path() / "empty"), log) == 1);
}

TEST_CASE("three-language run, determinism and resume") {
  TempDir dir("cli");
  const auto config = make_corpus(dir.path() / "c", 3);
  const auto log = dir.path() / "log";
  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  const auto c = dir.path() / "c_resumed";

  REQUIRE(cli("run --config " + q(config) + " --jobs 1 --out " + q(a), log) == 0);
  const auto summary = csv(a / "summary.csv");
  REQUIRE(summary.size() == 4);
  CHECK(summary[0][0] == "setting");
  CHECK(summary[1][0] == "MonoA-l0");
  CHECK(summary[2][0] == "MMA");
  CHECK(summary[3][0] == "SMA");
  CHECK(summary[0] == mlal::CsvRow{"setting", "accuracy_al_mean", "accuracy_al_std", "accuracy_noal_mean",
                                   "accuracy_noal_std"});

  REQUIRE(cli("run --config " + q(config) + " --jobs 4 --out " + q(b), log) == 0);
  CHECK(slurp(a / "results.jsonl") == slurp(b / "results.jsonl"));
  CHECK(tree_contents(a) == tree_contents(b));

  CHECK(cli("run --config " + q(config) + " --jobs 2 --stop-after 2 --out " + q(c), log) == 2);
  const auto partial = json::parse(slurp(c / "manifest.json"));
  CHECK(partial.at("complete") == false);
  int done = 0;
  for (const auto& [unit, state] : partial.at("units").items()) done += state.at("status") == "complete";
  CHECK(done >= 2);
  CHECK(done < 6);
  REQUIRE(cli("run --config " + q(config) + " --jobs 2 --out " + q(c), log) == 0);
  CHECK(slurp(log).find(std::to_string(done) + " of 6 units already complete") != std::string::npos);
  CHECK(json::parse(slurp(c / "manifest.json")).at("complete") == true);
  CHECK(slurp(a / "results.jsonl") == slurp(c / "results.jsonl"));
}

TEST_CASE("report and curriculum outputs") {
  TempDir dir("cli");
  const auto config = make_corpus(dir.path() / "c", 2, "--replicates 2", [](json& j) {
    j["settings"] = json::array({{{"kind", "SMA"}}});
    j["al"] = {true};
  });
  const auto log = dir.path() / "log";
  const auto out = dir.path() / "run";
  REQUIRE(cli("run --config " + q(config) + " --out " + q(out), log) == 0);
  REQUIRE(cli("report " + q(out), log) == 0);

  const auto rounds = csv(out / "report" / "rounds.csv");
  REQUIRE(rounds.size() > 1);
  CHECK(rounds[0] == mlal::CsvRow{"setting", "al_flag", "round", "language", "metric", "mean", "stddev"});
  std::map<std::string, int> per_metric;
  for (std::size_t i = 1; i < rounds.size(); ++i) ++per_metric[rounds[i][4]];
  CHECK(per_metric == std::map<std::string, int>{{"accuracy", 8}});

  const auto curriculum = csv(out / "report" / "curriculum.csv");
  REQUIRE(curriculum.size() == 1 + 2 * 3 * 2);  // replicates x rounds x languages
  std::map<std::string, double> alpha_sum;
  for (std::size_t i = 1; i < curriculum.size(); ++i) {
    const auto& r = curriculum[i];
    CHECK(std::abs(mlal::parse_double(r[9]) - mlal::parse_double(r[10])) < 1e-9);
    alpha_sum[r[2] + "/" + r[3]] += mlal::parse_double(r[5]);
  }
  for (const auto& [key, total] : alpha_sum) CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // the curriculum subcommand agrees with the report file
  const auto file = dir.path() / "curriculum.csv";
  REQUIRE(cli("curriculum --out " + q(out) + " --file " + q(file), log) == 0);
  CHECK(slurp(file) == slurp(out / "report" / "curriculum.csv"));

  // aggregate means equal the run summary and the replicate mean of rounds.csv
  const auto aggregate = csv(out / "report" / "aggregate.csv");
  const auto summary = csv(out / "summary.csv");
  REQUIRE(aggregate.size() == 2);
  CHECK(aggregate[0] == mlal::CsvRow{"setting", "al_flag", "metric", "mean", "stddev", "replicates"});
  CHECK(aggregate[1][0] == "SMA");
  CHECK(aggregate[1][5] == "2");
  CHECK(mlal::parse_double(aggregate[1][3]) == mlal::parse_double(summary[1][1]));
  double from_rounds = 0.0;
  for (std::size_t i = 1; i < rounds.size(); ++i) from_rounds += mlal::parse_double(rounds[i][5]) / 8;
  CHECK(mlal::parse_double(aggregate[1][3]) == doctest::Approx(from_rounds).epsilon(1e-12));
}
