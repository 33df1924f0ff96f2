#ifndef MLAL_MODELS_H_
#define MLAL_MODELS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlal/corpus.h"
#include "mlal/features.h"
#include "mlal/graph.h"
#include "mlal/tasks.h"

namespace mlal {

struct TrainingConfig {
  std::vector<double> learning_rates{1.0, 3.0, 10.0};
  int batch_size = 32;
  int max_epochs = 75;
  int patience = 25;
  double l2 = 1e-4;
  std::uint64_t rng_seed = 0;

  void validate() const;  // throws ConfigError
  bool operator==(const TrainingConfig&) const = default;
};

// Patience-based early stopping on a score that should increase.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Records the next epoch's score; true when it is a new best.
  bool observe(double score);
  bool should_stop() const { return since_best_ >= patience_; }

  int epochs() const { return epochs_; }
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }

 private:
  int patience_;
  int epochs_ = 0;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_score_ = 0.0;
};

struct TrainResult {
  double best_score = 0.0;
  double learning_rate = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;  // for the selected learning rate
};

// Features and gold indices of one instance, computed once per training call.
// vectors: classification 1, tagging one per token, parsing one per arc
// (index head * n + dep - 1). gold: class; tag per token; parsing heads then
// relation labels. -1 marks a gold value outside the label vocabulary.
struct PreparedExample {
  const Instance* source = nullptr;
  std::size_t n = 0;
  std::vector<SparseVector> vectors;
  std::vector<int> gold;
};

// coeff * x added to one row of one weight matrix.
struct GradientTerm {
  std::uint32_t matrix;
  std::uint32_t row;
  const SparseVector* x;
  double coeff;
};

// Log-linear model over the shared hashed feature space. Subclasses define
// the likelihood; this class owns weights, the training loop and the flat
// parameter view used by gradient checks.
class TaskModel {
 public:
  TaskModel(TaskKind task, FeatureSpace space);
  virtual ~TaskModel() = default;

  TaskKind task() const { return task_; }
  const FeatureSpace& feature_space() const { return space_; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool initialized() const { return !matrices_.empty(); }

  // Fixes the output vocabulary (sorted, deduplicated) and zeroes all weights.
  void initialize(std::vector<std::string> labels);

  // Mini-batch gradient ascent on the mean gold log-likelihood with L2
  // penalty, once per learning rate from zero weights, early-stopped on the
  // validation metric. Keeps the best epoch of the best learning rate.
  TrainResult train(std::span<const Instance> labeled, std::span<const Instance> validation,
                    const TrainingConfig& config);

  LanguageMetrics evaluate(std::span<const Instance> instances) const;
  double validation_score(std::span<const Instance> instances) const;

  // Mean gold log-likelihood minus (l2 / 2) * ||w||^2, and its gradient.
  double objective(std::span<const Instance> data, double l2);
  std::vector<double> gradient(std::span<const Instance> data, double l2);

  std::size_t num_parameters() const;
  double parameter(std::size_t i);
  void set_parameter(std::size_t i, double value);

  nlohmann::json to_json() const;

  std::vector<PreparedExample> prepare(std::span<const Instance> data, bool require_gold) const;

 protected:
  virtual std::vector<std::size_t> matrix_rows() const = 0;
  virtual void prepare_one(const Instance& instance, PreparedExample& out) const = 0;
  // Appends the example's log-likelihood gradient terms; returns the log-likelihood.
  virtual double example_gradient(const PreparedExample& example,
                                  std::vector<GradientTerm>& terms) const = 0;
  virtual void accumulate_counts(const PreparedExample& example,
                                 std::map<std::string, std::int64_t>& counts) const = 0;

  int label_index(const std::string& label) const;
  void require_initialized() const;
  void flush();

  std::vector<WeightMatrix> matrices_;

 private:
  friend std::unique_ptr<TaskModel> model_from_json(const nlohmann::json& j);

  TaskKind task_;
  FeatureSpace space_;
  std::vector<std::string> labels_;
};

std::unique_ptr<TaskModel> make_model(TaskKind task, const FeatureSpace& space);

// Checkpoint container: {"format": "mlal-model", "version": 1, "task",
// "feature_space", "labels", "matrices": [{"rows", "weights": [[index, value]...]}]}
// with only non-zero weights listed.
std::unique_ptr<TaskModel> model_from_json(const nlohmann::json& j);
void save_model(const TaskModel& model, const std::filesystem::path& path);
std::unique_ptr<TaskModel> load_model(const std::filesystem::path& path);

// softmax in place, max-shifted.
void softmax(std::vector<double>& scores);

class Classifier : public TaskModel {
 public:
  explicit Classifier(FeatureSpace space) : TaskModel(TaskKind::kClassification, space) {}

  // Distribution over labels() for the instance's text.
  std::vector<double> predict_class_proba(const Instance& instance) const;
  std::string predict(const Instance& instance) const;

  std::vector<double> class_proba(const SparseVector& x) const;

 protected:
  std::vector<std::size_t> matrix_rows() const override;
  void prepare_one(const Instance& instance, PreparedExample& out) const override;
  double example_gradient(const PreparedExample& example,
                          std::vector<GradientTerm>& terms) const override;
  void accumulate_counts(const PreparedExample& example,
                         std::map<std::string, std::int64_t>& counts) const override;
};

// Independent per-token softmax over BIO tags.
class Tagger : public TaskModel {
 public:
  explicit Tagger(FeatureSpace space) : TaskModel(TaskKind::kSequenceTagging, space) {}

  std::vector<std::vector<double>> predict_tag_probas(const Instance& instance) const;
  std::vector<std::string> predict_tags(const Instance& instance) const;

  std::vector<double> tag_proba(const SparseVector& x) const;

 protected:
  std::vector<std::size_t> matrix_rows() const override;
  void prepare_one(const Instance& instance, PreparedExample& out) const override;
  double example_gradient(const PreparedExample& example,
                          std::vector<GradientTerm>& terms) const override;
  void accumulate_counts(const PreparedExample& example,
                         std::map<std::string, std::int64_t>& counts) const override;
};

struct ArcPrediction {
  HeadProbabilities heads;
  // P(label | head -> dep) at index head * n + dep - 1; empty unless requested.
  std::vector<std::vector<double>> labels;
};

// Arc-factored parser: P(head | dep) is a softmax over all candidate heads
// including ROOT; P(label | head -> dep) a softmax over relations. Both
// share one arc feature vector.
class ArcParser : public TaskModel {
 public:
  explicit ArcParser(FeatureSpace space) : TaskModel(TaskKind::kDependencyParsing, space) {}

  ArcPrediction predict_arc_probas(const Instance& instance, bool with_labels = true) const;
  // Chu-Liu/Edmonds over log P(head | dep), then the argmax label per arc.
  DepTree decode_tree(const Instance& instance) const;

 protected:
  std::vector<std::size_t> matrix_rows() const override;
  void prepare_one(const Instance& instance, PreparedExample& out) const override;
  double example_gradient(const PreparedExample& example,
                          std::vector<GradientTerm>& terms) const override;
  void accumulate_counts(const PreparedExample& example,
                         std::map<std::string, std::int64_t>& counts) const override;

 private:
  HeadProbabilities head_probas(const std::vector<SparseVector>& arcs, std::size_t n) const;
  std::vector<double> label_proba(const SparseVector& arc) const;
  std::pair<std::vector<int>, std::vector<int>> decode(const std::vector<SparseVector>& arcs,
                                                       std::size_t n) const;
};

}  // namespace mlal

#endif  // MLAL_MODELS_H_
