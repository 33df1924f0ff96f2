#ifndef MLAL_RESULTS_IO_H_
#define MLAL_RESULTS_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mlal/experiment.h"

namespace mlal {

// One line of results.jsonl: a RoundResult plus the cell and replicate it
// belongs to.
struct ResultLine {
  std::string cell;
  std::string setting;
  bool with_al = true;
  StrategyKind strategy = StrategyKind::kLC;
  TaskKind task = TaskKind::kClassification;
  int replicate = 0;
  std::uint64_t seed = 0;
  RoundResult result;

  bool operator==(const ResultLine&) const = default;
};

nlohmann::json round_to_json(const RoundResult& result);
RoundResult round_from_json(const nlohmann::json& j);

nlohmann::json result_line_to_json(const ResultLine& line);
ResultLine result_line_from_json(const nlohmann::json& j);

void write_result_lines(std::ostream& out, std::span<const ResultLine> lines);
// Throws ParseError naming the offending line.
std::vector<ResultLine> read_result_lines(std::istream& in, const std::string& source);

// Per-run data the curriculum report needs besides the acquisition log.
struct CellMeta {
  std::string cell;
  int replicate = 0;
  int rounds = 0;
  Cost per_round_budget = 0;
  std::map<LanguageTag, double> alpha;
  std::vector<ModelPlan> models;

  bool operator==(const CellMeta&) const = default;
};

nlohmann::json cell_meta_to_json(const CellMeta& meta);
CellMeta cell_meta_from_json(const nlohmann::json& j);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);  // throws ConfigError

// 64-bit FNV-1a as 16 hex digits.
std::string content_hash(std::string_view content);

}  // namespace mlal

#endif  // MLAL_RESULTS_IO_H_
