#include "mlal/config.h"

#include <fstream>
#include <set>

#include "mlal/error.h"

namespace mlal {

using nlohmann::json;

namespace {

class Checker {
 public:
  std::vector<std::string> errors;

  void error(const std::string& where, const std::string& message) {
    errors.push_back(where.empty() ? message : where + ": " + message);
  }

  // False (and an error) unless j is an object; reports unknown keys.
  bool object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      error(where, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) error(where, "unknown key \"" + key + "\"");
    }
    return true;
  }

  template <class T>
  std::optional<T> get(const json& obj, const char* key, const std::string& where, bool required) {
    const std::string at = where.empty() ? key : where + "." + key;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(at, "missing required key");
      return std::nullopt;
    }
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("expected a string");
      }
      return it->get<T>();
    } catch (const std::exception& e) {
      error(at, e.what());
      return std::nullopt;
    }
  }
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

}  // namespace

ExperimentOptions ExperimentConfig::options() const { return {budget, training, features, strategy}; }

std::vector<CellSpec> ExperimentConfig::cells() const {
  std::vector<CellSpec> out;
  for (const auto& s : settings) {
    for (bool al : al_flags) out.push_back({s, al});
  }
  return out;
}

ConfigCheck check_config(const json& j, const std::filesystem::path& base_dir) {
  Checker c;
  ExperimentConfig cfg;
  const auto base = std::filesystem::absolute(base_dir);
  if (!c.object(j, "", {"task", "languages", "data", "settings", "strategy", "al", "budget", "training",
                        "features", "preprocess", "baselines", "replicates", "seed", "output_dir"})) {
    return {std::nullopt, c.errors};
  }

  bool task_ok = false;
  if (auto t = c.get<std::string>(j, "task", "", true)) {
    try {
      cfg.task = parse_task(*t);
      task_ok = true;
    } catch (const Error& e) {
      c.error("task", e.what());
    }
  }
  cfg.budget.unit = budget_unit(cfg.task);
  cfg.max_tokens = cfg.task == TaskKind::kClassification ? 256 : 175;

  if (!j.contains("languages")) {
    c.error("languages", "missing required key");
  } else if (!j["languages"].is_array() || j["languages"].empty()) {
    c.error("languages", "expected a non-empty array of language codes");
  } else {
    std::set<LanguageTag> seen;
    for (const auto& l : j["languages"]) {
      try {
        LanguageTag tag(l.get<std::string>());
        if (!seen.insert(tag).second) {
          c.error("languages", "duplicate language \"" + tag.str() + "\"");
        } else {
          cfg.languages.push_back(tag);
        }
      } catch (const std::exception& e) {
        c.error("languages", e.what());
      }
    }
  }

  if (!j.contains("data")) {
    c.error("data", "missing required key");
  } else if (j["data"].is_object()) {
    for (const auto& lang : cfg.languages) {
      if (!j["data"].contains(lang.str())) c.error("data", "no files for language \"" + lang.str() + "\"");
    }
    for (const auto& [key, files] : j["data"].items()) {
      const std::string where = "data." + key;
      if (std::find_if(cfg.languages.begin(), cfg.languages.end(),
                       [&](const LanguageTag& l) { return l.str() == key; }) == cfg.languages.end()) {
        c.error("data", "unknown key \"" + key + "\" (not in languages)");
        continue;
      }
      if (!c.object(files, where, {"train", "test"})) continue;
      DataFiles df;
      if (auto p = c.get<std::string>(files, "train", where, true)) df.train = resolve(base, *p);
      if (auto p = c.get<std::string>(files, "test", where, true)) df.test = resolve(base, *p);
      for (const auto& [name, path] : {std::pair{"train", df.train}, std::pair{"test", df.test}}) {
        if (!path.empty() && !std::filesystem::is_regular_file(path)) {
          c.error(where + "." + name, "file not found: " + path.string());
        }
      }
      cfg.data[LanguageTag(key)] = df;
    }
  } else {
    c.error("data", "expected an object");
  }

  if (j.contains("settings")) {
    if (!j["settings"].is_array() || j["settings"].empty()) {
      c.error("settings", "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < j["settings"].size(); ++i) {
        const auto& s = j["settings"][i];
        const std::string where = "settings[" + std::to_string(i) + "]";
        if (!c.object(s, where, {"kind", "source"})) continue;
        auto kind = c.get<std::string>(s, "kind", where, true);
        if (!kind) continue;
        Setting setting;
        try {
          setting.kind = parse_setting_kind(*kind);
        } catch (const Error& e) {
          c.error(where + ".kind", e.what());
          continue;
        }
        auto source = c.get<std::string>(s, "source", where, setting.kind == SettingKind::kMonoA);
        if (source && setting.kind != SettingKind::kMonoA) {
          c.error(where + ".source", "only MonoA takes a source language");
        } else if (source) {
          try {
            setting.source = LanguageTag(*source);
          } catch (const Error& e) {
            c.error(where + ".source", e.what());
            continue;
          }
        } else if (setting.kind == SettingKind::kMonoA) {
          continue;
        }
        if (std::find(cfg.settings.begin(), cfg.settings.end(), setting) != cfg.settings.end()) {
          c.error(where, "duplicate setting " + setting.label());
          continue;
        }
        cfg.settings.push_back(setting);
      }
    }
  } else if (!cfg.languages.empty()) {
    cfg.settings = {{SettingKind::kMonoA, cfg.languages.front()}, {SettingKind::kMMA, {}}, {SettingKind::kSMA, {}}};
  }

  cfg.strategy = default_strategy(cfg.task);
  if (auto s = c.get<std::string>(j, "strategy", "", false)) {
    try {
      cfg.strategy = parse_strategy(*s);
      if (task_ok && !strategy_compatible(cfg.strategy, cfg.task)) {
        c.error("strategy", *s + " does not apply to the " + std::string(task_name(cfg.task)) + " task");
      }
    } catch (const Error& e) {
      c.error("strategy", e.what());
    }
  }

  if (j.contains("al")) {
    if (!j["al"].is_array() || j["al"].empty()) {
      c.error("al", "expected a non-empty array of booleans");
    } else {
      cfg.al_flags.clear();
      for (const auto& f : j["al"]) {
        if (!f.is_boolean()) {
          c.error("al", "expected booleans");
        } else if (std::find(cfg.al_flags.begin(), cfg.al_flags.end(), f.get<bool>()) != cfg.al_flags.end()) {
          c.error("al", "duplicate flag");
        } else {
          cfg.al_flags.push_back(f.get<bool>());
        }
      }
    }
  }

  bool budget_ok = false;
  if (!j.contains("budget")) {
    c.error("budget", "missing required key");
  } else if (c.object(j["budget"], "budget", {"seed", "acquisition", "validation", "rounds"})) {
    const auto& b = j["budget"];
    const std::size_t before = c.errors.size();
    if (auto v = c.get<Cost>(b, "seed", "budget", true)) cfg.budget.seed = *v;
    cfg.budget.acquisition = c.get<Cost>(b, "acquisition", "budget", false).value_or(cfg.budget.seed);
    cfg.budget.validation = c.get<Cost>(b, "validation", "budget", false).value_or(cfg.budget.seed);
    cfg.budget.rounds = c.get<int>(b, "rounds", "budget", false).value_or(4);
    if (c.errors.size() == before) {
      try {
        cfg.budget.validate();
        budget_ok = true;
      } catch (const Error& e) {
        c.error("budget", e.what());
      }
    }
  }

  if (j.contains("training") && c.object(j["training"], "training",
                                         {"learning_rates", "batch_size", "max_epochs", "patience", "l2"})) {
    const auto& t = j["training"];
    const std::size_t before = c.errors.size();
    if (auto v = c.get<std::vector<double>>(t, "learning_rates", "training", false)) cfg.training.learning_rates = *v;
    if (auto v = c.get<int>(t, "batch_size", "training", false)) cfg.training.batch_size = *v;
    if (auto v = c.get<int>(t, "max_epochs", "training", false)) cfg.training.max_epochs = *v;
    if (auto v = c.get<int>(t, "patience", "training", false)) cfg.training.patience = *v;
    if (auto v = c.get<double>(t, "l2", "training", false)) cfg.training.l2 = *v;
    if (c.errors.size() == before) {
      try {
        cfg.training.validate();
      } catch (const Error& e) {
        c.error("training", e.what());
      }
    }
  }

  if (j.contains("features") && c.object(j["features"], "features", {"hash_bits", "ngram_min", "ngram_max"})) {
    const auto& f = j["features"];
    const std::size_t before = c.errors.size();
    if (auto v = c.get<int>(f, "hash_bits", "features", false)) {
      if (*v < 10 || *v > 24) {
        c.error("features.hash_bits", "must lie in 10..24");
      } else {
        cfg.features.hash_dimension = 1u << *v;
      }
    }
    if (auto v = c.get<int>(f, "ngram_min", "features", false)) cfg.features.ngram_min = *v;
    if (auto v = c.get<int>(f, "ngram_max", "features", false)) cfg.features.ngram_max = *v;
    if (c.errors.size() == before) {
      try {
        cfg.features.validate();
      } catch (const Error& e) {
        c.error("features", e.what());
      }
    }
  }

  if (j.contains("preprocess") && c.object(j["preprocess"], "preprocess", {"max_tokens", "dedup"})) {
    const auto& p = j["preprocess"];
    if (auto v = c.get<std::int64_t>(p, "max_tokens", "preprocess", false)) {
      if (*v < 1) {
        c.error("preprocess.max_tokens", "must be positive");
      } else {
        cfg.max_tokens = static_cast<std::size_t>(*v);
      }
    }
    if (auto v = c.get<bool>(p, "dedup", "preprocess", false)) cfg.dedup = *v;
  }

  if (auto v = c.get<bool>(j, "baselines", "", false)) cfg.baselines = *v;
  if (auto v = c.get<int>(j, "replicates", "", false)) {
    if (*v < 1) {
      c.error("replicates", "must be at least 1");
    } else {
      cfg.replicates = *v;
    }
  }
  if (auto v = c.get<std::uint64_t>(j, "seed", "", false)) cfg.seed = *v;
  cfg.output_dir = resolve(base, c.get<std::string>(j, "output_dir", "", false).value_or("results"));

  // Allocation-stage checks, so that an impossible setting fails validation
  // rather than a run.
  if (budget_ok && !cfg.languages.empty()) {
    for (const auto& s : cfg.settings) {
      try {
        allocate(s, cfg.budget, cfg.languages);
      } catch (const ConfigError& e) {
        c.error("settings", s.label() + ": " + e.what());
      }
    }
  }

  if (!c.errors.empty()) return {std::nullopt, c.errors};
  return {cfg, {}};
}

ConfigCheck validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {std::nullopt, {"cannot read " + path.string()}};
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    return {std::nullopt, {path.string() + ": " + e.what()}};
  }
  return check_config(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["task"] = std::string(task_name(cfg.task));
  std::vector<std::string> langs;
  for (const auto& l : cfg.languages) langs.push_back(l.str());
  j["languages"] = langs;
  json data = json::object();
  for (const auto& [lang, files] : cfg.data) {
    data[lang.str()] = {{"train", files.train.string()}, {"test", files.test.string()}};
  }
  j["data"] = data;
  json settings = json::array();
  for (const auto& s : cfg.settings) {
    json sj = {{"kind", std::string(setting_kind_name(s.kind))}};
    if (s.kind == SettingKind::kMonoA) sj["source"] = s.source.str();
    settings.push_back(sj);
  }
  j["settings"] = settings;
  j["strategy"] = std::string(strategy_name(cfg.strategy));
  j["al"] = cfg.al_flags;
  j["budget"] = {{"seed", cfg.budget.seed},
                 {"acquisition", cfg.budget.acquisition},
                 {"validation", cfg.budget.validation},
                 {"rounds", cfg.budget.rounds}};
  j["training"] = {{"learning_rates", cfg.training.learning_rates},
                   {"batch_size", cfg.training.batch_size},
                   {"max_epochs", cfg.training.max_epochs},
                   {"patience", cfg.training.patience},
                   {"l2", cfg.training.l2}};
  int bits = 0;
  while ((1u << bits) < cfg.features.hash_dimension) ++bits;
  j["features"] = {{"hash_bits", bits}, {"ngram_min", cfg.features.ngram_min}, {"ngram_max", cfg.features.ngram_max}};
  j["preprocess"] = {{"max_tokens", cfg.max_tokens}, {"dedup", cfg.dedup}};
  j["baselines"] = cfg.baselines;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();
  return j;
}

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  auto read = [&](const std::filesystem::path& path, const LanguageTag& lang, InstanceId first) {
    std::vector<Instance> items;
    switch (cfg.task) {
      case TaskKind::kClassification:
        items = ingest_tsv_classification(path, first);
        for (const auto& inst : items) {
          if (inst.language != lang) {
            throw ValidationError(path.string() + ": instance " + std::to_string(inst.id) + " has language " +
                                  inst.language.str() + ", expected " + lang.str());
          }
        }
        break;
      case TaskKind::kSequenceTagging: items = ingest_conll_ner(path, lang, first); break;
      case TaskKind::kDependencyParsing: items = ingest_conllu(path, lang, first); break;
    }
    return items;
  };

  ExperimentData data;
  data.task = cfg.task;
  data.languages = cfg.languages;
  InstanceId next = 0;
  for (const auto& lang : cfg.languages) {
    auto items = read(cfg.data.at(lang).train, lang, next);
    next += static_cast<InstanceId>(items.size());
    if (cfg.dedup) items = dedup(items);
    items = length_filter(items, cfg.max_tokens);
    data.train.insert(data.train.end(), items.begin(), items.end());
  }
  for (const auto& lang : cfg.languages) {
    auto items = read(cfg.data.at(lang).test, lang, next);
    next += static_cast<InstanceId>(items.size());
    if (cfg.task == TaskKind::kClassification) items = length_filter(items, cfg.max_tokens);
    data.test.insert(data.test.end(), items.begin(), items.end());
  }
  return data;
}

}  // namespace mlal
