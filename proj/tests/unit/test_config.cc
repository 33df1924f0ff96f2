#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "mlal/config.h"
#include "mlal/error.h"
#include "mlal/synth.h"
#include "tempdir.h"

using namespace mlal;
using nlohmann::json;

namespace {

// Two-language classification corpus plus the matching minimal config.
json minimal(const TempDir& dir) {
  SynthParams p;
  p.languages = 2;
  p.train_size = 60;
  p.test_size = 10;
  write_synthetic(p, dir.path() / "data");
  return {{"task", "classification"},
          {"languages", {"l0", "l1"}},
          {"data",
           {{"l0", {{"train", "data/l0/train.tsv"}, {"test", "data/l0/test.tsv"}}},
            {"l1", {{"train", "data/l1/train.tsv"}, {"test", "data/l1/test.tsv"}}}}},
          {"budget", {{"seed", 10}}}};
}

bool mentions(const ConfigCheck& c, const std::string& needle) {
  for (const auto& e : c.errors) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal config fills in defaults") {
    TempDir dir("cfg");
    const auto check = check_config(minimal(dir), dir.path());
    REQUIRE(check.ok());
    const auto& c = *check.config;
    CHECK(c.budget.rounds == 4);
    CHECK(c.budget.acquisition == 10);
    CHECK(c.budget.validation == 10);
    CHECK(c.training.patience == 25);
    CHECK(c.training.max_epochs == 75);
    CHECK(c.max_tokens == 256);
    CHECK(c.strategy == StrategyKind::kLC);
    CHECK(c.settings.size() == 3);
    CHECK(c.settings[0].label() == "MonoA-l0");
    CHECK(c.cells().size() == 6);
    CHECK(c.data.at(LanguageTag("l0")).train.is_absolute());
  }

  TEST_CASE("unknown keys are named") {
    TempDir dir("cfg");
    auto j = minimal(dir);
    j["foo"] = 1;
    j["training"]["bar"] = 2;
    const auto check = check_config(j, dir.path());
    CHECK_FALSE(check.ok());
    CHECK(mentions(check, "foo"));
    CHECK(mentions(check, "bar"));
  }

  TEST_CASE("allocation errors surface at validation") {
    TempDir dir("cfg");
    auto j = minimal(dir);
    j["budget"] = {{"seed", 1}};
    j["settings"] = {{{"kind", "MMA"}}};
    const auto check = check_config(j, dir.path());
    CHECK_FALSE(check.ok());
    CHECK_FALSE(check.config.has_value());
  }

  TEST_CASE("every problem is reported") {
    TempDir dir("cfg");
    auto j = minimal(dir);
    j["task"] = "translation";
    j["replicates"] = 0;
    j["data"]["l1"]["test"] = "missing.tsv";
    const auto check = check_config(j, dir.path());
    CHECK(check.errors.size() >= 3);
    CHECK(mentions(check, "translation"));
    CHECK(mentions(check, "missing.tsv"));
  }

  TEST_CASE("strategy must fit the task") {
    TempDir dir("cfg");
    auto j = minimal(dir);
    j["strategy"] = "MNLP";
    CHECK_FALSE(check_config(j, dir.path()).ok());
  }

  TEST_CASE("round trip through json") {
    TempDir dir("cfg");
    auto j = minimal(dir);
    j["settings"] = {{{"kind", "MonoA"}, {"source", "l1"}}, {{"kind", "SMA"}}};
    j["training"] = {{"learning_rates", {0.5, 2.0}}, {"patience", 5}};
    j["replicates"] = 3;
    const auto first = check_config(j, dir.path());
    REQUIRE(first.ok());
    const auto again = check_config(config_to_json(*first.config), "/nonexistent");
    REQUIRE(again.ok());
    CHECK(*again.config == *first.config);
  }

  TEST_CASE("validate from a file") {
    TempDir dir("cfg");
    std::ofstream(dir.path() / "c.json") << minimal(dir).dump();
    CHECK(validate_config(dir.path() / "c.json").ok());
    CHECK_FALSE(validate_config(dir.path() / "absent.json").ok());
    std::ofstream(dir.path() / "bad.json") << "{ not json";
    CHECK_FALSE(validate_config(dir.path() / "bad.json").ok());
  }

  TEST_CASE("loading data") {
    TempDir dir("cfg");
    const auto check = check_config(minimal(dir), dir.path());
    REQUIRE(check.ok());
    const auto data = load_experiment_data(*check.config);
    CHECK(data.languages.size() == 2);
    CHECK(data.test.size() == 20);
    CHECK(data.train.size() <= 120);
    std::set<InstanceId> ids;
    for (const auto& i : data.train) CHECK(ids.insert(i.id).second);
    for (const auto& i : data.test) CHECK(ids.insert(i.id).second);
  }
}
