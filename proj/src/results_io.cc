#include "mlal/results_io.h"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mlal/error.h"

namespace mlal {

using nlohmann::json;

namespace {

template <class V>
json language_map(const std::map<LanguageTag, V>& m) {
  json j = json::object();
  for (const auto& [lang, v] : m) j[lang.str()] = v;
  return j;
}

json plan_to_json(const ModelPlan& m) {
  std::vector<std::string> scope;
  for (const auto& l : m.scope) scope.push_back(l.str());
  return {{"scope", scope}, {"seed", m.seed}, {"acquisition", m.acquisition},
          {"validation", m.validation}, {"per_round", m.per_round}};
}

ModelPlan plan_from_json(const json& j) {
  ModelPlan m;
  for (const auto& l : j.at("scope")) m.scope.emplace_back(l.get<std::string>());
  m.seed = j.at("seed").get<Cost>();
  m.acquisition = j.at("acquisition").get<Cost>();
  m.validation = j.at("validation").get<Cost>();
  m.per_round = j.at("per_round").get<Cost>();
  return m;
}

}  // namespace

json round_to_json(const RoundResult& r) {
  json metrics = json::object();
  for (const auto& [lang, m] : r.metrics) metrics[lang.str()] = {{"values", m.values}, {"counts", m.counts}};
  json models = json::array();
  for (const auto& m : r.models) {
    models.push_back({{"scope", m.scope},
                      {"validation_score", m.validation_score},
                      {"learning_rate", m.learning_rate},
                      {"best_epoch", m.best_epoch},
                      {"epochs_run", m.epochs_run}});
  }
  return {{"round", r.round}, {"metrics", metrics}, {"spend", language_map(r.spend)},
          {"models", models}, {"warnings", r.warnings}};
}

RoundResult round_from_json(const json& j) {
  RoundResult r;
  r.round = j.at("round").get<int>();
  for (const auto& [lang, m] : j.at("metrics").items()) {
    LanguageMetrics lm;
    lm.values = m.at("values").get<std::map<std::string, double>>();
    lm.counts = m.at("counts").get<std::map<std::string, std::int64_t>>();
    r.metrics[LanguageTag(lang)] = std::move(lm);
  }
  for (const auto& [lang, c] : j.at("spend").items()) r.spend[LanguageTag(lang)] = c.get<Cost>();
  for (const auto& m : j.at("models")) {
    r.models.push_back({m.at("scope").get<std::string>(), m.at("validation_score").get<double>(),
                        m.at("learning_rate").get<double>(), m.at("best_epoch").get<int>(),
                        m.at("epochs_run").get<int>()});
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

json result_line_to_json(const ResultLine& line) {
  json j = round_to_json(line.result);
  j["cell"] = line.cell;
  j["setting"] = line.setting;
  j["al"] = line.with_al;
  j["strategy"] = std::string(strategy_name(line.strategy));
  j["task"] = std::string(task_name(line.task));
  j["replicate"] = line.replicate;
  j["seed"] = line.seed;
  return j;
}

ResultLine result_line_from_json(const json& j) {
  ResultLine line;
  line.cell = j.at("cell").get<std::string>();
  line.setting = j.at("setting").get<std::string>();
  line.with_al = j.at("al").get<bool>();
  line.strategy = parse_strategy(j.at("strategy").get<std::string>());
  line.task = parse_task(j.at("task").get<std::string>());
  line.replicate = j.at("replicate").get<int>();
  line.seed = j.at("seed").get<std::uint64_t>();
  line.result = round_from_json(j);
  return line;
}

void write_result_lines(std::ostream& out, std::span<const ResultLine> lines) {
  for (const auto& l : lines) out << result_line_to_json(l).dump() << '\n';
}

std::vector<ResultLine> read_result_lines(std::istream& in, const std::string& source) {
  std::vector<ResultLine> out;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    try {
      out.push_back(result_line_from_json(json::parse(text)));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return out;
}

json cell_meta_to_json(const CellMeta& meta) {
  json models = json::array();
  for (const auto& m : meta.models) models.push_back(plan_to_json(m));
  return {{"cell", meta.cell},
          {"replicate", meta.replicate},
          {"rounds", meta.rounds},
          {"per_round_budget", meta.per_round_budget},
          {"alpha", language_map(meta.alpha)},
          {"models", models}};
}

CellMeta cell_meta_from_json(const json& j) {
  try {
    CellMeta meta;
    meta.cell = j.at("cell").get<std::string>();
    meta.replicate = j.at("replicate").get<int>();
    meta.rounds = j.at("rounds").get<int>();
    meta.per_round_budget = j.at("per_round_budget").get<Cost>();
    for (const auto& [lang, a] : j.at("alpha").items()) meta.alpha[LanguageTag(lang)] = a.get<double>();
    for (const auto& m : j.at("models")) meta.models.push_back(plan_from_json(m));
    return meta;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed cell metadata: ") + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string content_hash(std::string_view content) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : content) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mlal
