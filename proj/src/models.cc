#include "mlal/models.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mlal/error.h"
#include "mlal/random.h"

namespace mlal {

void TrainingConfig::validate() const {
  if (learning_rates.empty()) throw ConfigError("learning rate search set is empty");
  for (double lr : learning_rates) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rates must be positive");
    if (lr * l2 >= 1.0) throw ConfigError("learning_rate * l2 must be below 1");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (patience < 1) throw ConfigError("patience must be positive");
  if (patience > max_epochs) throw ConfigError("patience must not exceed max_epochs");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be non-negative");
}

bool EarlyStopping::observe(double score) {
  ++epochs_;
  if (epochs_ == 1 || score > best_score_) {
    best_score_ = score;
    best_epoch_ = epochs_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

void softmax(std::vector<double>& scores) {
  if (scores.empty()) return;
  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    z += s;
  }
  for (double& s : scores) s /= z;
}

TaskModel::TaskModel(TaskKind task, FeatureSpace space) : task_(task), space_(space) {
  space_.validate();
}

void TaskModel::initialize(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.empty()) throw ConfigError("empty label vocabulary");
  labels_ = std::move(labels);
  matrices_.clear();
  for (std::size_t rows : matrix_rows()) matrices_.emplace_back(rows, space_.hash_dimension);
}

void TaskModel::require_initialized() const {
  if (!initialized()) throw StateError("model has no label vocabulary; initialize or train it first");
}

int TaskModel::label_index(const std::string& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return -1;
  return static_cast<int>(it - labels_.begin());
}

void TaskModel::flush() {
  for (auto& m : matrices_) m.flush();
}

std::vector<PreparedExample> TaskModel::prepare(std::span<const Instance> data, bool require_gold) const {
  require_initialized();
  std::vector<PreparedExample> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i].source = &data[i];
    prepare_one(data[i], out[i]);
    if (require_gold) {
      if (out[i].gold.empty()) {
        throw StateError("instance " + std::to_string(data[i].id) + " has no gold annotation");
      }
      if (std::find(out[i].gold.begin(), out[i].gold.end(), -1) != out[i].gold.end()) {
        throw StateError("instance " + std::to_string(data[i].id) +
                         " carries a label outside the model vocabulary");
      }
    }
  }
  return out;
}

TrainResult TaskModel::train(std::span<const Instance> labeled, std::span<const Instance> validation,
                             const TrainingConfig& config) {
  config.validate();
  if (labeled.empty()) throw ConfigError("training set is empty");
  if (validation.empty()) throw ConfigError("validation set is empty");
  if (!initialized()) {
    std::vector<Instance> all(labeled.begin(), labeled.end());
    all.insert(all.end(), validation.begin(), validation.end());
    initialize(label_vocabulary(all));
  }

  const auto train_set = prepare(labeled, true);
  const auto val_set = prepare(validation, false);
  const std::string metric(primary_metric(task_));
  auto score_validation = [&] {
    std::map<std::string, std::int64_t> counts;
    for (const auto& ex : val_set) accumulate_counts(ex, counts);
    return metrics_from_counts(task_, counts).values.at(metric);
  };

  std::vector<double> rates = config.learning_rates;
  std::sort(rates.begin(), rates.end());

  const std::size_t n = train_set.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::vector<GradientTerm> terms;

  bool have_best = false;
  TrainResult best;
  std::vector<WeightMatrix> best_weights;

  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double lr = rates[k];
    for (auto& m : matrices_) m = WeightMatrix(m.rows(), m.dimension());
    Rng rng(derive_seed(config.rng_seed, {k}));
    std::iota(order.begin(), order.end(), std::size_t{0});
    EarlyStopping stopping(config.patience);
    std::vector<WeightMatrix> lr_best;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
      rng.shuffle(std::span<std::size_t>(order));
      for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t end = std::min(n, start + batch);
        terms.clear();
        for (std::size_t i = start; i < end; ++i) example_gradient(train_set[order[i]], terms);
        if (config.l2 > 0) {
          for (auto& m : matrices_) m.decay(1.0 - lr * config.l2);
        }
        const double step = lr / static_cast<double>(end - start);
        for (const auto& t : terms) matrices_[t.matrix].add(t.row, *t.x, step * t.coeff);
      }
      if (stopping.observe(score_validation())) lr_best = matrices_;
      if (stopping.should_stop()) break;
    }
    if (!have_best || stopping.best_score() > best.best_score) {
      best = TrainResult{stopping.best_score(), lr, stopping.best_epoch(), stopping.epochs()};
      best_weights = std::move(lr_best);
      have_best = true;
    }
  }
  matrices_ = std::move(best_weights);
  flush();
  return best;
}

LanguageMetrics TaskModel::evaluate(std::span<const Instance> instances) const {
  const auto prepared = prepare(instances, false);
  std::map<std::string, std::int64_t> counts;
  for (const auto& ex : prepared) accumulate_counts(ex, counts);
  return metrics_from_counts(task_, counts);
}

double TaskModel::validation_score(std::span<const Instance> instances) const {
  return evaluate(instances).values.at(std::string(primary_metric(task_)));
}

double TaskModel::objective(std::span<const Instance> data, double l2) {
  flush();
  const auto prepared = prepare(data, true);
  std::vector<GradientTerm> terms;
  double total = 0.0;
  for (const auto& ex : prepared) {
    terms.clear();
    total += example_gradient(ex, terms);
  }
  double norm = 0.0;
  for (const auto& m : matrices_) {
    for (double w : m.values()) norm += w * w;
  }
  return total / static_cast<double>(prepared.size()) - 0.5 * l2 * norm;
}

std::vector<double> TaskModel::gradient(std::span<const Instance> data, double l2) {
  flush();
  const auto prepared = prepare(data, true);
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (const auto& m : matrices_) {
    offset.push_back(total);
    total += m.values().size();
  }
  std::vector<double> grad(total, 0.0);
  std::vector<GradientTerm> terms;
  for (const auto& ex : prepared) example_gradient(ex, terms);
  const double inv_n = 1.0 / static_cast<double>(prepared.size());
  for (const auto& t : terms) {
    const std::size_t base = offset[t.matrix] + t.row * matrices_[t.matrix].dimension();
    for (const auto& f : *t.x) grad[base + f.index] += inv_n * t.coeff * f.value;
  }
  for (std::size_t m = 0; m < matrices_.size(); ++m) {
    const auto& v = matrices_[m].values();
    for (std::size_t i = 0; i < v.size(); ++i) grad[offset[m] + i] -= l2 * v[i];
  }
  return grad;
}

std::size_t TaskModel::num_parameters() const {
  std::size_t total = 0;
  for (const auto& m : matrices_) total += m.values().size();
  return total;
}

double TaskModel::parameter(std::size_t i) {
  flush();
  for (auto& m : matrices_) {
    if (i < m.values().size()) return m.values()[i];
    i -= m.values().size();
  }
  throw StateError("parameter index out of range");
}

void TaskModel::set_parameter(std::size_t i, double value) {
  flush();
  for (auto& m : matrices_) {
    if (i < m.values().size()) {
      m.values()[i] = value;
      return;
    }
    i -= m.values().size();
  }
  throw StateError("parameter index out of range");
}

nlohmann::json TaskModel::to_json() const {
  require_initialized();
  nlohmann::json j;
  j["format"] = "mlal-model";
  j["version"] = 1;
  j["task"] = std::string(task_name(task_));
  j["feature_space"] = {{"hash_dimension", space_.hash_dimension},
                        {"ngram_min", space_.ngram_min},
                        {"ngram_max", space_.ngram_max}};
  j["labels"] = labels_;
  auto mats = nlohmann::json::array();
  for (const auto& m : matrices_) {
    auto weights = nlohmann::json::array();
    const auto& v = m.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double w = v[i] * m.scale();
      if (w != 0.0) weights.push_back({i, w});
    }
    mats.push_back({{"rows", m.rows()}, {"weights", std::move(weights)}});
  }
  j["matrices"] = std::move(mats);
  return j;
}

std::unique_ptr<TaskModel> make_model(TaskKind task, const FeatureSpace& space) {
  switch (task) {
    case TaskKind::kClassification: return std::make_unique<Classifier>(space);
    case TaskKind::kSequenceTagging: return std::make_unique<Tagger>(space);
    case TaskKind::kDependencyParsing: return std::make_unique<ArcParser>(space);
  }
  throw ConfigError("unknown task");
}

std::unique_ptr<TaskModel> model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "mlal-model") throw ConfigError("not a model checkpoint");
    if (j.at("version").get<int>() != 1) {
      throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
    }
    FeatureSpace space;
    const auto& fs = j.at("feature_space");
    space.hash_dimension = fs.at("hash_dimension").get<std::uint32_t>();
    space.ngram_min = fs.at("ngram_min").get<int>();
    space.ngram_max = fs.at("ngram_max").get<int>();
    auto model = make_model(parse_task(j.at("task").get<std::string>()), space);
    model->initialize(j.at("labels").get<std::vector<std::string>>());
    const auto& mats = j.at("matrices");
    if (mats.size() != model->matrices_.size()) throw ConfigError("checkpoint matrix count mismatch");
    for (std::size_t m = 0; m < mats.size(); ++m) {
      auto& target = model->matrices_[m];
      if (mats[m].at("rows").get<std::size_t>() != target.rows()) {
        throw ConfigError("checkpoint matrix shape mismatch");
      }
      for (const auto& entry : mats[m].at("weights")) {
        const auto idx = entry.at(0).get<std::size_t>();
        if (idx >= target.values().size()) throw ConfigError("checkpoint weight index out of range");
        target.values()[idx] = entry.at(1).get<double>();
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_model(const TaskModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << model.to_json().dump() << '\n';
}

std::unique_ptr<TaskModel> load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace mlal
