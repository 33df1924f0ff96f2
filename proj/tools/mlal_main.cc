#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlal/commands.h"
#include "mlal/error.h"

int main(int argc, char** argv) {
  using namespace mlal;
  CLI::App app{"Multilingual active-learning budget allocation simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::string results_dir;
  RunOptions run;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "Check a configuration and print it fully resolved");
  validate->add_option("--config", config, "Experiment configuration (JSON)")->required();

  auto* run_cmd = app.add_subcommand("run", "Run every setting x AL cell for all replicates");
  run_cmd->add_option("--config", config, "Experiment configuration (JSON)")->required();
  run_cmd->add_option("--jobs", run.jobs, "Units to run in parallel")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run_cmd->add_option("--seed", seed, "Base seed (overrides seed)");
  run_cmd->add_option("--stop-after", run.stop_after)->group("");

  auto* report = app.add_subcommand("report", "Write per-round, curriculum and aggregate CSVs");
  report->add_option("--out,results_dir", results_dir, "Results directory of a run")->required();

  auto* curriculum = app.add_subcommand("curriculum", "Print the acquisition curriculum CSV");
  std::string curriculum_out;
  curriculum->add_option("--config", config, "Configuration whose output_dir holds the results");
  curriculum->add_option("--out", results_dir, "Results directory of a run");
  curriculum->add_option("--file", curriculum_out, "Write the CSV here instead of stdout");

  SynthOptions synth;
  std::string task = "classification";
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic multilingual corpus and config");
  synth_cmd->add_option("--out", out_dir, "Destination directory")->required();
  synth_cmd->add_option("--task", task, "classification | tagging | parsing");
  synth_cmd->add_option("--languages", synth.params.languages, "Number of languages");
  synth_cmd->add_option("--train-size", synth.params.train_size, "Training sentences per language");
  synth_cmd->add_option("--test-size", synth.params.test_size, "Test sentences per language");
  synth_cmd->add_option("--overlap", synth.params.overlap, "Shared-vocabulary probability in [0, 1]");
  synth_cmd->add_option("--noise", synth.params.noise, "Base annotation noise");
  synth_cmd->add_option("--concepts", synth.params.concepts, "Latent concept count");
  synth_cmd->add_option("--seed", synth.params.seed, "Generator seed");
  synth_cmd->add_option("--budget", synth.budget, "Seed = acquisition = validation budget in the config");
  synth_cmd->add_option("--replicates", synth.replicates, "Replicates in the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*validate) return cmd_validate(config, std::cout, std::cerr);
    if (*run_cmd) {
      run.config = config;
      if (!out_dir.empty()) run.out = out_dir;
      if (run_cmd->count("--seed")) run.seed = seed;
      return cmd_run(run, std::cout, std::cerr);
    }
    if (*report) return cmd_report(results_dir, std::cout, std::cerr);
    if (*curriculum) {
      if (results_dir.empty() && config.empty()) {
        std::cerr << "error: curriculum needs --out or --config\n";
        return kExitInvalid;
      }
      if (results_dir.empty()) {
        // Resolve output_dir through the config.
        std::ostringstream resolved;
        std::ostringstream errors;
        if (cmd_validate(config, resolved, errors) != kExitOk) {
          std::cerr << errors.str();
          return kExitInvalid;
        }
        results_dir = nlohmann::json::parse(resolved.str()).at("output_dir").get<std::string>();
      }
      std::optional<std::filesystem::path> file;
      if (!curriculum_out.empty()) file = curriculum_out;
      return cmd_curriculum(results_dir, file, std::cout, std::cerr);
    }
    if (*synth_cmd) {
      try {
        synth.params.task = parse_task(task);
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
      }
      synth.out = out_dir;
      return cmd_synth(synth, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInvalid;
}
