#ifndef MLAL_COMMANDS_H_
#define MLAL_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "mlal/synth.h"

namespace mlal {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitFailure = 2;

// Prints the resolved configuration as JSON, or every violation.
int cmd_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

struct RunOptions {
  std::filesystem::path config;
  int jobs = 1;
  std::optional<std::filesystem::path> out;  // overrides output_dir
  std::optional<std::uint64_t> seed;         // overrides seed
  int stop_after = -1;  // stop dispatching after this many units (testing aid)
};

// Output directory layout:
//   config.json                  resolved configuration
//   manifest.json                config hash, timestamps, status per unit
//   results/<unit>.jsonl         one RoundResult per line
//   acquisitions/<unit>.csv      acquisition log
//   cells/<unit>.meta.json       pool composition and budgets for curriculum
//   results.jsonl                all units, in setting / AL flag / replicate order
//   summary.csv                  per setting, metric mean and stddev per AL flag
//   baselines.json               only when baselines are enabled
// A unit is one cell (setting x AL flag) for one replicate, named
// "<cell>_r<replicate>". Units already complete in the manifest are skipped.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

// Writes report/rounds.csv, report/curriculum.csv and report/aggregate.csv
// under the results directory.
int cmd_report(const std::filesystem::path& results_dir, std::ostream& out, std::ostream& err);

// Curriculum CSV for a results directory, to `out_file` or stdout.
int cmd_curriculum(const std::filesystem::path& results_dir,
                   const std::optional<std::filesystem::path>& out_file, std::ostream& out,
                   std::ostream& err);

struct SynthOptions {
  SynthParams params;
  std::filesystem::path out;
  Cost budget = 300;  // seed = acquisition = validation
  int replicates = 1;
};

// Writes the corpus plus a ready-to-run config.json into `out`.
int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err);

}  // namespace mlal

#endif  // MLAL_COMMANDS_H_
