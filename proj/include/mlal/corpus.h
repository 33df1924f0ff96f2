#ifndef MLAL_CORPUS_H_
#define MLAL_CORPUS_H_

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mlal {

using InstanceId = std::int64_t;
// Annotation cost in the task's budget unit (tokens or instances).
using Cost = std::int64_t;

// Short language code such as "en" or "ja". Lowercase ASCII letters, digits,
// '-' and '_' only.
class LanguageTag {
 public:
  LanguageTag() = default;
  explicit LanguageTag(std::string code);

  const std::string& str() const { return code_; }
  bool empty() const { return code_.empty(); }

  auto operator<=>(const LanguageTag&) const = default;
  bool operator==(const LanguageTag&) const = default;

 private:
  std::string code_;
};

std::ostream& operator<<(std::ostream& os, const LanguageTag& tag);

struct ClassificationText {
  std::string text;
  std::optional<std::string> label;

  bool operator==(const ClassificationText&) const = default;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::optional<std::vector<std::string>> tags;  // BIO, one per token

  bool operator==(const TaggedSentence&) const = default;
};

// Heads are 1-based token indices with 0 for ROOT.
struct DepTree {
  std::vector<std::string> tokens;
  std::vector<std::string> upos;
  std::optional<std::vector<int>> heads;
  std::optional<std::vector<std::string>> labels;

  bool operator==(const DepTree&) const = default;
};

using Payload = std::variant<ClassificationText, TaggedSentence, DepTree>;

struct Instance {
  InstanceId id = 0;
  LanguageTag language;
  Payload payload;
  Cost cost = 1;

  bool operator==(const Instance&) const = default;
};

// Number of whitespace-separated tokens (classification) or token count.
std::size_t token_count(const Payload& payload);

// True for "O", "B-X" and "I-X" with non-empty X.
bool is_bio_tag(const std::string& tag);

// Throws ValidationError unless heads form a single-rooted arborescence over
// 1..n. `what` names the sentence in the message.
void validate_heads(std::span<const int> heads, const std::string& what);

// Sorted distinct gold labels: classes, BIO tags or dependency relations.
std::vector<std::string> label_vocabulary(std::span<const Instance> instances);

// --- ingestion -------------------------------------------------------------
//
// Ids are assigned in file order starting at first_id.

std::vector<Instance> parse_conll_ner(std::istream& in, const std::string& source,
                                      const LanguageTag& language, InstanceId first_id = 0);
std::vector<Instance> ingest_conll_ner(const std::filesystem::path& path,
                                       const LanguageTag& language, InstanceId first_id = 0);

std::vector<Instance> parse_conllu(std::istream& in, const std::string& source,
                                   const LanguageTag& language, InstanceId first_id = 0);
std::vector<Instance> ingest_conllu(const std::filesystem::path& path, const LanguageTag& language,
                                    InstanceId first_id = 0);

std::vector<Instance> parse_tsv_classification(std::istream& in, const std::string& source,
                                               InstanceId first_id = 0);
std::vector<Instance> ingest_tsv_classification(const std::filesystem::path& path,
                                                InstanceId first_id = 0);

void write_conll_ner(std::ostream& out, std::span<const Instance> instances);
void write_conllu(std::ostream& out, std::span<const Instance> instances);
void write_tsv_classification(std::ostream& out, std::span<const Instance> instances);

// --- preprocessing ---------------------------------------------------------

// Keeps the first occurrence of each (language, payload) pair.
std::vector<Instance> dedup(std::span<const Instance> instances);

// Drops tagging/parsing instances longer than max_tokens; truncates
// classification text to its first max_tokens whitespace tokens.
std::vector<Instance> length_filter(std::span<const Instance> instances, std::size_t max_tokens);

// --- pool ------------------------------------------------------------------

enum class Partition { kLabeled = 0, kUnlabeled = 1, kValidation = 2, kTest = 3 };

const char* partition_name(Partition p);

// Id-keyed partitions of an experiment's instances. Every instance lives in
// exactly one partition; membership changes only through move_to_labeled.
class Pool {
 public:
  void insert(Partition partition, Instance instance);

  // Moves an unlabeled instance into the labeled partition.
  void move_to_labeled(InstanceId id);

  bool contains(InstanceId id) const { return where_.count(id) != 0; }
  Partition partition_of(InstanceId id) const;
  const Instance& get(InstanceId id) const;

  const std::map<InstanceId, Instance>& partition(Partition p) const {
    return parts_[static_cast<int>(p)];
  }
  std::size_t size(Partition p) const { return partition(p).size(); }

  // Ids in ascending order.
  std::vector<InstanceId> ids(Partition p, const LanguageTag& language) const;
  std::vector<InstanceId> ids(Partition p, std::span<const LanguageTag> languages) const;
  std::vector<Instance> instances(Partition p, std::span<const LanguageTag> languages) const;

  std::vector<LanguageTag> languages(Partition p) const;
  Cost cost(Partition p, const LanguageTag& language) const;

 private:
  std::array<std::map<InstanceId, Instance>, 4> parts_;
  std::array<std::map<LanguageTag, std::set<InstanceId>>, 4> by_language_;
  std::map<InstanceId, Partition> where_;
};

// Seed/validation budgets applied to each draw group, in the task's cost unit.
struct SplitSpec {
  Cost seed_budget = 0;
  Cost val_budget = 0;
  std::uint64_t rng_seed = 0;
};

// Draws a seed (labeled) and a validation subset for every group of
// languages; each group is one uniform draw over the union of its languages.
// Everything not drawn lands in the unlabeled partition. Test data is never
// passed here.
//
// Sampling shuffles the group's instances (ordered by id) and walks the
// shuffled order, taking every instance whose cost still fits the remaining
// budget.
Pool sample_splits(std::span<const Instance> instances, const SplitSpec& spec,
                   std::span<const std::vector<LanguageTag>> groups);

}  // namespace mlal

#endif  // MLAL_CORPUS_H_
