#ifndef MLAL_FEATURES_H_
#define MLAL_FEATURES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlal/corpus.h"

namespace mlal {

// Hashed feature space shared by every language. hash_dimension must be a
// power of two no smaller than 2^10; 1 <= ngram_min <= ngram_max <= 8.
struct FeatureSpace {
  std::uint32_t hash_dimension = 1u << 16;
  int ngram_min = 1;
  int ngram_max = 4;

  void validate() const;  // throws ConfigError
  bool operator==(const FeatureSpace&) const = default;
};

struct FeatureValue {
  std::uint32_t index;
  double value;

  bool operator==(const FeatureValue&) const = default;
};

// Sorted by index, no duplicate indices.
using SparseVector = std::vector<FeatureValue>;

// Reserved form/UPOS of the ROOT pseudo-token.
inline constexpr std::string_view kRootToken = "<ROOT>";

std::uint32_t hash_feature(std::string_view key, std::uint32_t dimension);

// Character n-grams (code points, word-boundary marked) of every word plus
// word identity features, L2-normalized, plus an unnormalized bias.
SparseVector featurize_text(std::string_view text, const FeatureSpace& space);

// One vector per token: n-grams of the token and of its left and right
// neighbours (position-prefixed), plus bias.
std::vector<SparseVector> featurize_tokens(std::span<const std::string> tokens,
                                           const FeatureSpace& space);

// 1 -> 1, 2 -> 2, 3..5 -> 3, 6..10 -> 4, >10 -> 5.
int distance_bucket(int distance);

// Indicator features of the arc head -> dep (head 0 = ROOT): head form, dep
// form, head UPOS x dep UPOS, direction, distance bucket and their
// conjunctions.
SparseVector featurize_arc(const DepTree& tree, int head, int dep, const FeatureSpace& space);

// Dense weights for `rows` outputs over the hashed space, stored as
// scale * values so that L2 decay costs O(1) per step.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t rows, std::uint32_t dimension)
      : rows_(rows), dimension_(dimension), values_(rows * dimension, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::uint32_t dimension() const { return dimension_; }

  double dot(std::size_t row, const SparseVector& x) const {
    const double* w = values_.data() + row * dimension_;
    double s = 0.0;
    for (const auto& f : x) s += w[f.index] * f.value;
    return scale_ * s;
  }

  void add(std::size_t row, const SparseVector& x, double coeff) {
    double* w = values_.data() + row * dimension_;
    const double c = coeff / scale_;
    for (const auto& f : x) w[f.index] += c * f.value;
  }

  // Multiplies every weight by factor (0 < factor <= 1).
  void decay(double factor) {
    scale_ *= factor;
    if (scale_ < 1e-9) flush();
  }

  // Folds the scale into the stored values.
  void flush() {
    if (scale_ == 1.0) return;
    for (double& v : values_) v *= scale_;
    scale_ = 1.0;
  }

  // Raw storage; call flush() first when exact values are needed.
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double scale() const { return scale_; }

 private:
  std::size_t rows_ = 0;
  std::uint32_t dimension_ = 0;
  std::vector<double> values_;
  double scale_ = 1.0;
};

}  // namespace mlal

#endif  // MLAL_FEATURES_H_
