#include "mlal/commands.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "mlal/config.h"
#include "mlal/csv.h"
#include "mlal/error.h"
#include "mlal/results_io.h"

namespace mlal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Unit {
  CellSpec cell;
  int replicate = 0;
  std::string name() const { return cell.name() + "_r" + std::to_string(replicate); }
};

fs::path results_file(const fs::path& dir, const std::string& unit) { return dir / "results" / (unit + ".jsonl"); }
fs::path acquisitions_file(const fs::path& dir, const std::string& unit) { return dir / "acquisitions" / (unit + ".csv"); }
fs::path meta_file(const fs::path& dir, const std::string& unit) { return dir / "cells" / (unit + ".meta.json"); }

// Manifest updates from worker threads, each written atomically.
class Manifest {
 public:
  Manifest(fs::path path, json state) : path_(std::move(path)), state_(std::move(state)) {}

  bool complete(const std::string& unit) const {
    std::lock_guard lock(mu_);
    return state_["units"].contains(unit) && state_["units"][unit]["status"] == "complete";
  }

  void set(const std::string& unit, const std::string& status, const std::string& error = "") {
    std::lock_guard lock(mu_);
    json entry = {{"status", status}};
    if (!error.empty()) entry["error"] = error;
    state_["units"][unit] = entry;
    flush_locked();
  }

  void finish(bool complete) {
    std::lock_guard lock(mu_);
    state_["complete"] = complete;
    flush_locked();
  }

 private:
  void flush_locked() {
    state_["updated"] = utc_timestamp();
    write_file_atomic(path_, state_.dump(2) + "\n");
  }

  fs::path path_;
  json state_;
  mutable std::mutex mu_;
};

std::vector<ResultLine> read_results_dir(const fs::path& dir) {
  const auto path = dir / "results.jsonl";
  if (!fs::is_regular_file(path)) throw ConfigError("no results.jsonl in " + dir.string());
  std::ifstream in(path);
  auto lines = read_result_lines(in, path.string());
  if (lines.empty()) throw ConfigError(path.string() + " is empty");
  return lines;
}

// (setting, al) pairs in order of first appearance.
std::vector<std::pair<std::string, bool>> cell_order(std::span<const ResultLine> lines) {
  std::vector<std::pair<std::string, bool>> out;
  for (const auto& l : lines) {
    std::pair key{l.setting, l.with_al};
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
  }
  return out;
}

std::vector<AggregateCell> aggregate_results(std::span<const ResultLine> lines) {
  std::vector<AggregateCell> out;
  for (const auto& [setting, al] : cell_order(lines)) {
    std::map<int, std::vector<RoundResult>> by_replicate;
    for (const auto& l : lines) {
      if (l.setting == setting && l.with_al == al) by_replicate[l.replicate].push_back(l.result);
    }
    std::vector<std::vector<RoundResult>> replicates;
    for (auto& [k, rounds] : by_replicate) replicates.push_back(std::move(rounds));
    for (const auto& metric : report_metrics(lines.front().task)) {
      out.push_back(aggregate(setting, al, metric, replicates));
    }
  }
  return out;
}

const char* al_name(bool with_al) { return with_al ? "al" : "noal"; }

std::string summary_csv(std::span<const AggregateCell> cells, std::span<const std::string> settings,
                        const std::vector<bool>& flags, std::span<const std::string> metrics) {
  std::ostringstream os;
  CsvRow header{"setting"};
  for (const auto& m : metrics) {
    for (bool al : flags) {
      header.push_back(m + "_" + al_name(al) + "_mean");
      header.push_back(m + "_" + al_name(al) + "_std");
    }
  }
  write_csv_row(os, header);
  for (const auto& s : settings) {
    CsvRow row{s};
    for (const auto& m : metrics) {
      for (bool al : flags) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const AggregateCell& c) {
          return c.setting == s && c.with_al == al && c.metric == m;
        });
        row.push_back(it == cells.end() ? "" : format_double(it->mean));
        row.push_back(it == cells.end() ? "" : format_double(it->stddev));
      }
    }
    write_csv_row(os, row);
  }
  return os.str();
}

std::string curriculum_csv(const fs::path& dir, std::span<const ResultLine> lines) {
  std::ostringstream os;
  write_csv_row(os, {"setting", "al_flag", "replicate", "round", "language", "alpha", "acquired", "cumulative",
                     "relative", "weighted_sum", "spend_ratio"});
  std::vector<std::pair<std::string, int>> units;
  std::map<std::string, const ResultLine*> first_line;
  for (const auto& l : lines) {
    const std::string unit = l.cell + "_r" + std::to_string(l.replicate);
    if (!first_line.count(unit)) {
      first_line[unit] = &l;
      units.push_back({unit, l.replicate});
    }
  }
  for (const auto& [unit, replicate] : units) {
    const ResultLine& l = *first_line[unit];
    const CellMeta meta = cell_meta_from_json(json::parse(read_file(meta_file(dir, unit))));
    std::ifstream in(acquisitions_file(dir, unit));
    if (!in) throw ConfigError("missing acquisition log for " + unit);
    const auto log = read_acquisition_log(in, acquisitions_file(dir, unit).string());
    const CurriculumReport report = curriculum(log, meta.alpha, meta.per_round_budget, meta.rounds - 1);
    if (report.max_identity_error() > 1e-9) {
      throw NumericalError("curriculum identity violated for " + unit + " by " +
                           format_double(report.max_identity_error()));
    }
    for (const auto& row : report.rows) {
      const std::size_t i = static_cast<std::size_t>(row.round - 1);
      write_csv_row(os, {l.setting, al_name(l.with_al), std::to_string(replicate), std::to_string(row.round),
                         row.language.str(), format_double(row.alpha), std::to_string(row.acquired),
                         std::to_string(row.cumulative), format_double(row.relative),
                         format_double(report.weighted_sum[i]), format_double(report.spend_ratio[i])});
    }
  }
  return os.str();
}

std::string rounds_csv(std::span<const ResultLine> lines) {
  std::ostringstream os;
  write_csv_row(os, {"setting", "al_flag", "round", "language", "metric", "mean", "stddev"});
  for (const auto& [setting, al] : cell_order(lines)) {
    // (round, language, metric) -> replicate values
    std::map<std::tuple<int, LanguageTag, std::string>, std::vector<double>> values;
    for (const auto& l : lines) {
      if (l.setting != setting || l.with_al != al) continue;
      for (const auto& [lang, m] : l.result.metrics) {
        for (const auto& [metric, v] : m.values) values[{l.result.round, lang, metric}].push_back(v);
      }
    }
    for (const auto& [key, xs] : values) {
      const auto& [round, lang, metric] = key;
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double sd = 0.0;
      if (xs.size() > 1) {
        for (double x : xs) sd += (x - mean) * (x - mean);
        sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
      }
      write_csv_row(os, {setting, al_name(al), std::to_string(round), lang.str(), metric, format_double(mean),
                         format_double(sd)});
    }
  }
  return os.str();
}

std::string aggregate_csv(std::span<const AggregateCell> cells) {
  std::ostringstream os;
  write_csv_row(os, {"setting", "al_flag", "metric", "mean", "stddev", "replicates"});
  for (const auto& c : cells) {
    write_csv_row(os, {c.setting, al_name(c.with_al), c.metric, format_double(c.mean), format_double(c.stddev),
                       std::to_string(c.replicate_values.size())});
  }
  return os.str();
}

void run_unit(const Unit& unit, const ExperimentData& data, const ExperimentConfig& cfg, const fs::path& dir) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(unit.replicate);
  const RunOutput run = run_cell(data, cfg.options(), unit.cell, seed);
  const std::string name = unit.name();

  std::vector<ResultLine> lines;
  for (const auto& r : run.rounds) {
    lines.push_back({unit.cell.name(), unit.cell.setting.label(), unit.cell.with_al,
                     unit.cell.with_al ? cfg.strategy : StrategyKind::kRandom, cfg.task, unit.replicate, seed, r});
  }
  std::ostringstream results;
  write_result_lines(results, lines);
  std::ostringstream log;
  write_acquisition_log(log, run.log);
  const CellMeta meta{unit.cell.name(), unit.replicate, run.plan.rounds, run.plan.per_round_budget(), run.alpha,
                      run.plan.models};

  write_file_atomic(acquisitions_file(dir, name), log.str());
  write_file_atomic(meta_file(dir, name), cell_meta_to_json(meta).dump(2) + "\n");
  write_file_atomic(results_file(dir, name), results.str());
}

json baselines_to_json(const BaselineReport& b) {
  auto side = [](const std::map<LanguageTag, LanguageMetrics>& m) {
    json j = json::object();
    for (const auto& [lang, lm] : m) j[lang.str()] = {{"values", lm.values}, {"counts", lm.counts}};
    return j;
  };
  return {{"single_model", side(b.single_model)}, {"multi_model", side(b.multi_model)}};
}

}  // namespace

int cmd_validate(const fs::path& config, std::ostream& out, std::ostream& err) {
  const ConfigCheck check = validate_config(config);
  if (!check.ok()) {
    for (const auto& e : check.errors) err << "error: " << e << '\n';
    return kExitInvalid;
  }
  out << config_to_json(*check.config).dump(2) << '\n';
  return kExitOk;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  if (options.jobs < 1) {
    err << "error: --jobs must be at least 1\n";
    return kExitInvalid;
  }
  ConfigCheck check = validate_config(options.config);
  if (!check.ok()) {
    for (const auto& e : check.errors) err << "error: " << e << '\n';
    return kExitInvalid;
  }
  ExperimentConfig cfg = *check.config;
  if (options.out) cfg.output_dir = fs::absolute(*options.out).lexically_normal();
  if (options.seed) cfg.seed = *options.seed;
  const fs::path dir = cfg.output_dir;

  ExperimentData data;
  try {
    data = load_experiment_data(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  json hashed = config_to_json(cfg);
  hashed.erase("output_dir");
  const std::string hash = content_hash(hashed.dump());

  std::vector<Unit> units;
  for (const auto& cell : cfg.cells()) {
    for (int k = 0; k < cfg.replicates; ++k) units.push_back({cell, k});
  }

  std::unique_ptr<Manifest> manifest;
  try {
    fs::create_directories(dir);
    json state;
    const auto manifest_path = dir / "manifest.json";
    if (fs::exists(manifest_path)) {
      state = json::parse(read_file(manifest_path));
      if (state.value("config_hash", "") != hash) {
        err << "error: " << dir.string() << " holds results of a different configuration\n";
        return kExitInvalid;
      }
    } else {
      state = {{"config_hash", hash}, {"created", utc_timestamp()}, {"units", json::object()}, {"complete", false}};
    }
    for (const auto& u : units) {
      const auto name = u.name();
      const bool done = state["units"].contains(name) && state["units"][name]["status"] == "complete" &&
                        fs::exists(results_file(dir, name)) && fs::exists(acquisitions_file(dir, name)) &&
                        fs::exists(meta_file(dir, name));
      if (!done) state["units"][name] = {{"status", "pending"}};
    }
    state["complete"] = false;
    write_file_atomic(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
    manifest = std::make_unique<Manifest>(manifest_path, state);
    manifest->finish(false);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  std::vector<const Unit*> pending;
  for (const auto& u : units) {
    if (!manifest->complete(u.name())) pending.push_back(&u);
  }
  out << units.size() - pending.size() << " of " << units.size() << " units already complete\n";

  std::atomic<std::size_t> next{0};
  std::atomic<int> finished{0};
  std::atomic<bool> stop{false};
  std::atomic<bool> failed{false};
  std::mutex out_mu;
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const Unit& u = *pending[i];
      try {
        run_unit(u, data, cfg, dir);
        manifest->set(u.name(), "complete");
        std::lock_guard lock(out_mu);
        out << "completed " << u.name() << '\n';
      } catch (const std::exception& e) {
        failed = true;
        manifest->set(u.name(), "failed", e.what());
        std::lock_guard lock(out_mu);
        err << "error: " << u.name() << ": " << e.what() << '\n';
      }
      if (options.stop_after >= 0 && ++finished >= options.stop_after) stop = true;
    }
  };
  const int threads = std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (failed) {
    err << "error: some units failed; see " << (dir / "manifest.json").string() << '\n';
    return kExitFailure;
  }
  if (next.load() < pending.size()) {
    err << "stopped before all units ran; rerun to resume\n";
    return kExitFailure;
  }

  try {
    std::string combined;
    for (const auto& u : units) combined += read_file(results_file(dir, u.name()));
    write_file_atomic(dir / "results.jsonl", combined);
    std::istringstream in(combined);
    const auto lines = read_result_lines(in, "results.jsonl");
    const auto cells = aggregate_results(lines);
    std::vector<std::string> settings;
    for (const auto& s : cfg.settings) settings.push_back(s.label());
    write_file_atomic(dir / "summary.csv",
                      summary_csv(cells, settings, cfg.al_flags, report_metrics(cfg.task)));
    if (cfg.baselines) {
      write_file_atomic(dir / "baselines.json",
                        baselines_to_json(run_full_data_baselines(data, cfg.options(), cfg.seed)).dump(2) + "\n");
    }
    manifest->finish(true);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  out << "results in " << dir.string() << '\n';
  return kExitOk;
}

int cmd_report(const fs::path& results_dir, std::ostream& out, std::ostream& err) {
  std::vector<ResultLine> lines;
  try {
    lines = read_results_dir(results_dir);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  try {
    const auto report = results_dir / "report";
    write_file_atomic(report / "rounds.csv", rounds_csv(lines));
    write_file_atomic(report / "curriculum.csv", curriculum_csv(results_dir, lines));
    const auto cells = aggregate_results(lines);
    write_file_atomic(report / "aggregate.csv", aggregate_csv(cells));
    out << "report written to " << report.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_curriculum(const fs::path& results_dir, const std::optional<fs::path>& out_file, std::ostream& out,
                   std::ostream& err) {
  std::vector<ResultLine> lines;
  try {
    lines = read_results_dir(results_dir);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  try {
    const std::string csv = curriculum_csv(results_dir, lines);
    if (out_file) {
      write_file_atomic(*out_file, csv);
    } else {
      out << csv;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err) {
  try {
    options.params.validate();
    if (options.budget < 1) throw ConfigError("budget must be positive");
    if (options.replicates < 1) throw ConfigError("replicates must be at least 1");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  try {
    const auto files = write_synthetic(options.params, options.out);
    const auto langs = synth_languages(options.params.languages);
    json data = json::object();
    std::vector<std::string> names;
    for (const auto& [lang, f] : files) {
      data[lang.str()] = {{"train", fs::relative(f.train, options.out).string()},
                          {"test", fs::relative(f.test, options.out).string()}};
    }
    for (const auto& l : langs) names.push_back(l.str());
    const json config = {
        {"task", std::string(task_name(options.params.task))},
        {"languages", names},
        {"data", data},
        {"settings", json::array({{{"kind", "MonoA"}, {"source", names.front()}}, {{"kind", "MMA"}}, {{"kind", "SMA"}}})},
        {"budget", {{"seed", options.budget}, {"acquisition", options.budget}, {"validation", options.budget}}},
        {"replicates", options.replicates},
        {"seed", options.params.seed},
        {"output_dir", "results"}};
    write_file_atomic(options.out / "config.json", config.dump(2) + "\n");
    out << "wrote " << files.size() << " languages to " << options.out.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace mlal
