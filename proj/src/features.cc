#include "mlal/features.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mlal/error.h"

namespace mlal {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

class Builder {
 public:
  explicit Builder(std::uint32_t dimension) : dimension_(dimension) {}

  void add(std::string_view key, double value = 1.0) {
    raw_.push_back({hash_feature(key, dimension_), value});
  }

  // Merges duplicates, scales the accumulated features to unit L2 norm and
  // appends the bias feature.
  SparseVector finish() {
    SparseVector v = merge(std::move(raw_));
    double norm = 0.0;
    for (const auto& f : v) norm += f.value * f.value;
    if (norm > 0) {
      norm = std::sqrt(norm);
      for (auto& f : v) f.value /= norm;
    }
    v.push_back({hash_feature("<bias>", dimension_), 1.0});
    return merge(std::move(v));
  }

 private:
  static SparseVector merge(SparseVector v) {
    std::sort(v.begin(), v.end(),
              [](const FeatureValue& a, const FeatureValue& b) { return a.index < b.index; });
    SparseVector out;
    for (const auto& f : v) {
      if (!out.empty() && out.back().index == f.index) {
        out.back().value += f.value;
      } else {
        out.push_back(f);
      }
    }
    return out;
  }

  std::uint32_t dimension_;
  SparseVector raw_;
};

std::vector<std::string_view> words(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

// Adds prefix-tagged character n-grams of "^word$", counted in code points.
void add_ngrams(Builder& b, std::string_view prefix, std::string_view word, const FeatureSpace& space) {
  std::string marked = "^";
  marked.append(word);
  marked += '$';
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < marked.size(); ++i) {
    if ((static_cast<unsigned char>(marked[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  starts.push_back(marked.size());
  const std::size_t chars = starts.size() - 1;
  std::string key;
  for (int n = space.ngram_min; n <= space.ngram_max; ++n) {
    if (static_cast<std::size_t>(n) > chars) break;
    for (std::size_t i = 0; i + n <= chars; ++i) {
      key.assign(prefix);
      key += std::to_string(n);
      key += ':';
      key.append(marked, starts[i], starts[i + n] - starts[i]);
      b.add(key);
    }
  }
}

std::string shape(std::string_view word) {
  std::string s;
  for (unsigned char c : word) {
    char k = std::isupper(c) ? 'X' : std::islower(c) ? 'x' : std::isdigit(c) ? 'd' : c < 0x80 ? 'p' : 'u';
    if (s.empty() || s.back() != k) s += k;
  }
  return s;
}

}  // namespace

void FeatureSpace::validate() const {
  if (hash_dimension < (1u << 10) || (hash_dimension & (hash_dimension - 1)) != 0) {
    throw ConfigError("hash_dimension must be a power of two >= 1024, got " +
                      std::to_string(hash_dimension));
  }
  if (ngram_min < 1 || ngram_min > ngram_max || ngram_max > 8) {
    throw ConfigError("n-gram range must satisfy 1 <= min <= max <= 8");
  }
}

std::uint32_t hash_feature(std::string_view key, std::uint32_t dimension) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : key) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= h >> 32;
  return static_cast<std::uint32_t>(h) & (dimension - 1);
}

SparseVector featurize_text(std::string_view text, const FeatureSpace& space) {
  Builder b(space.hash_dimension);
  std::string key;
  for (auto w : words(text)) {
    key.assign("w=");
    key.append(w);
    b.add(key);
    add_ngrams(b, "c", w, space);
  }
  return b.finish();
}

std::vector<SparseVector> featurize_tokens(std::span<const std::string> tokens,
                                           const FeatureSpace& space) {
  std::vector<SparseVector> out;
  out.reserve(tokens.size());
  const long n = static_cast<long>(tokens.size());
  std::string key;
  for (long i = 0; i < n; ++i) {
    Builder b(space.hash_dimension);
    for (long off = -1; off <= 1; ++off) {
      const long j = i + off;
      const std::string_view pos = off < 0 ? "L" : off > 0 ? "R" : "C";
      std::string_view w = j < 0 ? "<s>" : j >= n ? "</s>" : std::string_view(tokens[j]);
      key.assign(pos);
      key += "w=";
      key.append(w);
      b.add(key);
      if (j >= 0 && j < n) {
        key.assign(pos);
        key += "shape=";
        key += shape(w);
        b.add(key);
        add_ngrams(b, pos, w, space);
      }
    }
    out.push_back(b.finish());
  }
  return out;
}

int distance_bucket(int distance) {
  distance = std::abs(distance);
  if (distance <= 1) return 1;
  if (distance == 2) return 2;
  if (distance <= 5) return 3;
  if (distance <= 10) return 4;
  return 5;
}

SparseVector featurize_arc(const DepTree& tree, int head, int dep, const FeatureSpace& space) {
  const std::string hf = head == 0 ? std::string(kRootToken) : tree.tokens[head - 1];
  const std::string hp = head == 0 ? std::string(kRootToken) : tree.upos[head - 1];
  const std::string& df = tree.tokens[dep - 1];
  const std::string& dp = tree.upos[dep - 1];
  const std::string dir = head == 0 ? "root" : head < dep ? "right" : "left";
  const std::string dist = head == 0 ? "0" : std::to_string(distance_bucket(dep - head));

  Builder b(space.hash_dimension);
  b.add("hf=" + hf);
  b.add("df=" + df);
  b.add("hp=" + hp);
  b.add("dp=" + dp);
  b.add("hp,dp=" + hp + "," + dp);
  b.add("hp,dp,dir=" + hp + "," + dp + "," + dir);
  b.add("hp,dp,dir,dist=" + hp + "," + dp + "," + dir + "," + dist);
  b.add("dir,dist=" + dir + "," + dist);
  b.add("hf,dp=" + hf + "," + dp);
  b.add("hp,df=" + hp + "," + df);
  b.add("hf,df=" + hf + "," + df);
  return b.finish();
}

}  // namespace mlal
