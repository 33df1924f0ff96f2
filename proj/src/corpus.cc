#include "mlal/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "mlal/error.h"
#include "mlal/random.h"

namespace mlal {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_char(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

bool parse_int(const std::string& s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Unambiguous serialization of (language, payload) used as the dedup key.
std::string content_key(const Instance& inst) {
  std::string key = inst.language.str();
  key += '\x1f';
  key += static_cast<char>('0' + inst.payload.index());
  auto add_list = [&key](const std::vector<std::string>& xs) {
    key += '\x1d';
    for (const auto& x : xs) {
      key += x;
      key += '\x1e';
    }
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ClassificationText>) {
          key += '\x1d' + p.text;
          key += p.label ? "\x1d+" + *p.label : std::string("\x1d-");
        } else if constexpr (std::is_same_v<T, TaggedSentence>) {
          add_list(p.tokens);
          if (p.tags) add_list(*p.tags);
        } else {
          add_list(p.tokens);
          add_list(p.upos);
          if (p.heads) {
            key += '\x1d';
            for (int h : *p.heads) key += std::to_string(h) + ',';
          }
          if (p.labels) add_list(*p.labels);
        }
      },
      inst.payload);
  return key;
}

}  // namespace

LanguageTag::LanguageTag(std::string code) : code_(std::move(code)) {
  if (code_.empty()) throw ConfigError("language code must be non-empty");
  for (unsigned char c : code_) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) throw ConfigError("language code '" + code_ + "' must be lowercase ASCII");
  }
}

std::ostream& operator<<(std::ostream& os, const LanguageTag& tag) { return os << tag.str(); }

std::size_t token_count(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> std::size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ClassificationText>) {
          return split_ws(p.text).size();
        } else {
          return p.tokens.size();
        }
      },
      payload);
}

bool is_bio_tag(const std::string& tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

void validate_heads(std::span<const int> heads, const std::string& what) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int d = 1; d <= n; ++d) {
    int h = heads[d - 1];
    if (h < 0 || h > n) throw ValidationError(what + ": head index out of range");
    if (h == d) throw ValidationError(what + ": token " + std::to_string(d) + " heads itself");
    if (h == 0) ++roots;
  }
  if (roots != 1) {
    throw ValidationError(what + ": expected exactly one root token, found " + std::to_string(roots));
  }
  // 0 = unvisited, 1 = on current path, 2 = known to reach ROOT
  std::vector<char> state(n + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int v = start;
    while (state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = heads[v - 1];
    }
    if (state[v] == 1) throw ValidationError(what + ": head assignment contains a cycle");
    for (int p : path) state[p] = 2;
  }
}

std::vector<std::string> label_vocabulary(std::span<const Instance> instances) {
  std::set<std::string> labels;
  for (const auto& inst : instances) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ClassificationText>) {
            if (p.label) labels.insert(*p.label);
          } else if constexpr (std::is_same_v<T, TaggedSentence>) {
            if (p.tags) labels.insert(p.tags->begin(), p.tags->end());
          } else {
            if (p.labels) labels.insert(p.labels->begin(), p.labels->end());
          }
        },
        inst.payload);
  }
  return {labels.begin(), labels.end()};
}

// --- CoNLL NER ---------------------------------------------------------------

std::vector<Instance> parse_conll_ner(std::istream& in, const std::string& source,
                                      const LanguageTag& language, InstanceId first_id) {
  std::vector<Instance> out;
  std::size_t expected_columns = 0;
  TaggedSentence current;
  std::vector<std::string> tags;

  auto flush = [&] {
    if (current.tokens.empty()) return;
    if (expected_columns > 1) current.tags = std::move(tags);
    Instance inst;
    inst.id = first_id + static_cast<InstanceId>(out.size());
    inst.language = language;
    inst.cost = static_cast<Cost>(current.tokens.size());
    inst.payload = std::move(current);
    out.push_back(std::move(inst));
    current = TaggedSentence{};
    tags.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) {
      flush();
      continue;
    }
    auto cols = split_ws(line);
    if (cols[0] == "-DOCSTART-") continue;
    if (expected_columns == 0) expected_columns = cols.size();
    if (cols.size() != expected_columns) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(expected_columns) + " columns, found " +
                           std::to_string(cols.size()));
    }
    current.tokens.push_back(cols.front());
    if (expected_columns > 1) {
      if (!is_bio_tag(cols.back())) {
        throw ParseError(source, lineno, "tag '" + cols.back() + "' is not a BIO tag");
      }
      tags.push_back(cols.back());
    }
  }
  flush();
  return out;
}

std::vector<Instance> ingest_conll_ner(const std::filesystem::path& path,
                                       const LanguageTag& language, InstanceId first_id) {
  auto in = open_or_throw(path);
  return parse_conll_ner(in, path.string(), language, first_id);
}

void write_conll_ner(std::ostream& out, std::span<const Instance> instances) {
  for (const auto& inst : instances) {
    const auto& s = std::get<TaggedSentence>(inst.payload);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i];
      if (s.tags) out << ' ' << (*s.tags)[i];
      out << '\n';
    }
    out << '\n';
  }
}

// --- CoNLL-U -------------------------------------------------------------------

std::vector<Instance> parse_conllu(std::istream& in, const std::string& source,
                                   const LanguageTag& language, InstanceId first_id) {
  std::vector<Instance> out;
  DepTree tree;
  std::vector<std::string> head_fields;
  std::vector<std::size_t> token_lines;
  std::string sent_id;
  std::size_t sentence_start = 0;

  auto flush = [&] {
    if (tree.tokens.empty()) {
      sent_id.clear();
      return;
    }
    const int n = static_cast<int>(tree.tokens.size());
    std::string name = sent_id.empty() ? "sentence at line " + std::to_string(sentence_start)
                                       : "sentence " + sent_id;
    std::size_t missing = std::count(head_fields.begin(), head_fields.end(), "_");
    if (missing == head_fields.size()) {
      tree.heads.reset();
      tree.labels.reset();
    } else if (missing != 0) {
      throw ParseError(source, sentence_start, name + ": some tokens lack a head");
    } else {
      std::vector<int> heads;
      for (int i = 0; i < n; ++i) {
        int h = 0;
        if (!parse_int(head_fields[i], h)) {
          throw ParseError(source, token_lines[i], "head '" + head_fields[i] + "' is not an integer");
        }
        if (h < 0 || h > n) {
          throw ParseError(source, token_lines[i],
                           "head " + std::to_string(h) + " out of range for " + std::to_string(n) +
                               "-token sentence");
        }
        heads.push_back(h);
      }
      validate_heads(heads, source + ": " + name);
      tree.heads = std::move(heads);
    }
    Instance inst;
    inst.id = first_id + static_cast<InstanceId>(out.size());
    inst.language = language;
    inst.cost = n;
    inst.payload = std::move(tree);
    out.push_back(std::move(inst));
    tree = DepTree{};
    head_fields.clear();
    token_lines.clear();
    sent_id.clear();
  };

  std::vector<std::string> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) {
      if (!tree.tokens.empty()) tree.labels = labels;
      labels.clear();
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string prefix = "# sent_id = ";
      if (line.rfind(prefix, 0) == 0) sent_id = line.substr(prefix.size());
      continue;
    }
    auto cols = split_char(line, '\t');
    if (cols.size() != 10) {
      throw ParseError(source, lineno, "expected 10 tab-separated columns, found " +
                                           std::to_string(cols.size()));
    }
    if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos) continue;
    int id = 0;
    if (!parse_int(cols[0], id) || id != static_cast<int>(tree.tokens.size()) + 1) {
      throw ParseError(source, lineno, "unexpected token id '" + cols[0] + "'");
    }
    if (tree.tokens.empty()) sentence_start = lineno;
    tree.tokens.push_back(cols[1]);
    tree.upos.push_back(cols[3]);
    head_fields.push_back(cols[6]);
    labels.push_back(cols[7]);
    token_lines.push_back(lineno);
  }
  if (!tree.tokens.empty()) tree.labels = labels;
  flush();
  return out;
}

std::vector<Instance> ingest_conllu(const std::filesystem::path& path, const LanguageTag& language,
                                    InstanceId first_id) {
  auto in = open_or_throw(path);
  return parse_conllu(in, path.string(), language, first_id);
}

void write_conllu(std::ostream& out, std::span<const Instance> instances) {
  for (const auto& inst : instances) {
    const auto& t = std::get<DepTree>(inst.payload);
    out << "# sent_id = " << inst.id << '\n';
    for (std::size_t i = 0; i < t.tokens.size(); ++i) {
      out << (i + 1) << '\t' << t.tokens[i] << "\t_\t" << t.upos[i] << "\t_\t_\t";
      if (t.heads) {
        out << (*t.heads)[i] << '\t' << (t.labels ? (*t.labels)[i] : "_");
      } else {
        out << "_\t_";
      }
      out << "\t_\t_\n";
    }
    out << '\n';
  }
}

// --- classification TSV ----------------------------------------------------------

std::vector<Instance> parse_tsv_classification(std::istream& in, const std::string& source,
                                               InstanceId first_id) {
  std::vector<Instance> out;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header 'label\\tlanguage\\ttext'");
  strip_cr(line);
  if (line != "label\tlanguage\ttext") {
    throw ParseError(source, 1, "missing header 'label\\tlanguage\\ttext'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto cols = split_char(line, '\t');
    if (cols.size() != 3) {
      throw ParseError(source, lineno, "expected 3 columns, found " + std::to_string(cols.size()));
    }
    if (is_blank(cols[2])) throw ParseError(source, lineno, "empty text");
    Instance inst;
    inst.id = first_id + static_cast<InstanceId>(out.size());
    try {
      inst.language = LanguageTag(cols[1]);
    } catch (const ConfigError& e) {
      throw ParseError(source, lineno, e.what());
    }
    ClassificationText payload{cols[2], std::nullopt};
    if (!cols[0].empty()) payload.label = cols[0];
    inst.payload = std::move(payload);
    inst.cost = 1;
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> ingest_tsv_classification(const std::filesystem::path& path,
                                                InstanceId first_id) {
  auto in = open_or_throw(path);
  return parse_tsv_classification(in, path.string(), first_id);
}

void write_tsv_classification(std::ostream& out, std::span<const Instance> instances) {
  out << "label\tlanguage\ttext\n";
  for (const auto& inst : instances) {
    const auto& c = std::get<ClassificationText>(inst.payload);
    out << c.label.value_or("") << '\t' << inst.language << '\t' << c.text << '\n';
  }
}

// --- preprocessing -----------------------------------------------------------------

std::vector<Instance> dedup(std::span<const Instance> instances) {
  std::unordered_set<std::string> seen;
  std::vector<Instance> out;
  for (const auto& inst : instances) {
    if (seen.insert(content_key(inst)).second) out.push_back(inst);
  }
  return out;
}

std::vector<Instance> length_filter(std::span<const Instance> instances, std::size_t max_tokens) {
  std::vector<Instance> out;
  for (const auto& inst : instances) {
    if (const auto* c = std::get_if<ClassificationText>(&inst.payload)) {
      auto words = split_ws(c->text);
      Instance copy = inst;
      if (words.size() > max_tokens) {
        words.resize(max_tokens);
        std::get<ClassificationText>(copy.payload).text = join(words, ' ');
      }
      out.push_back(std::move(copy));
    } else if (token_count(inst.payload) <= max_tokens) {
      out.push_back(inst);
    }
  }
  return out;
}

// --- pool ------------------------------------------------------------------------------

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::kLabeled: return "labeled";
    case Partition::kUnlabeled: return "unlabeled";
    case Partition::kValidation: return "validation";
    case Partition::kTest: return "test";
  }
  return "?";
}

void Pool::insert(Partition partition, Instance instance) {
  const InstanceId id = instance.id;
  if (where_.count(id)) throw ValidationError("duplicate instance id " + std::to_string(id));
  const int p = static_cast<int>(partition);
  by_language_[p][instance.language].insert(id);
  parts_[p].emplace(id, std::move(instance));
  where_.emplace(id, partition);
}

void Pool::move_to_labeled(InstanceId id) {
  auto it = where_.find(id);
  if (it == where_.end() || it->second != Partition::kUnlabeled) {
    throw StateError("instance " + std::to_string(id) + " is not in the unlabeled partition");
  }
  auto& from = parts_[static_cast<int>(Partition::kUnlabeled)];
  auto node = from.extract(id);
  const LanguageTag& lang = node.mapped().language;
  by_language_[static_cast<int>(Partition::kUnlabeled)][lang].erase(id);
  by_language_[static_cast<int>(Partition::kLabeled)][lang].insert(id);
  parts_[static_cast<int>(Partition::kLabeled)].insert(std::move(node));
  it->second = Partition::kLabeled;
}

Partition Pool::partition_of(InstanceId id) const {
  auto it = where_.find(id);
  if (it == where_.end()) throw StateError("unknown instance id " + std::to_string(id));
  return it->second;
}

const Instance& Pool::get(InstanceId id) const {
  return partition(partition_of(id)).at(id);
}

std::vector<InstanceId> Pool::ids(Partition p, const LanguageTag& language) const {
  const auto& idx = by_language_[static_cast<int>(p)];
  auto it = idx.find(language);
  if (it == idx.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<InstanceId> Pool::ids(Partition p, std::span<const LanguageTag> languages) const {
  std::vector<InstanceId> out;
  for (const auto& lang : languages) {
    auto part = ids(p, lang);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Instance> Pool::instances(Partition p, std::span<const LanguageTag> languages) const {
  std::vector<Instance> out;
  const auto& part = partition(p);
  for (InstanceId id : ids(p, languages)) out.push_back(part.at(id));
  return out;
}

std::vector<LanguageTag> Pool::languages(Partition p) const {
  std::vector<LanguageTag> out;
  for (const auto& [lang, ids] : by_language_[static_cast<int>(p)]) {
    if (!ids.empty()) out.push_back(lang);
  }
  return out;
}

Cost Pool::cost(Partition p, const LanguageTag& language) const {
  Cost total = 0;
  const auto& part = partition(p);
  for (InstanceId id : ids(p, language)) total += part.at(id).cost;
  return total;
}

// --- split sampling ---------------------------------------------------------------------

namespace {

// Walks `order` taking each unused instance whose cost fits; marks taken ones.
std::vector<std::size_t> take_within_budget(const std::vector<std::size_t>& order,
                                            std::span<const Instance> sorted,
                                            std::vector<char>& used, Cost budget) {
  std::vector<std::size_t> taken;
  Cost remaining = budget;
  for (std::size_t idx : order) {
    if (used[idx]) continue;
    if (sorted[idx].cost <= remaining) {
      used[idx] = 1;
      remaining -= sorted[idx].cost;
      taken.push_back(idx);
      if (remaining == 0) break;
    }
  }
  return taken;
}

}  // namespace

Pool sample_splits(std::span<const Instance> instances, const SplitSpec& spec,
                   std::span<const std::vector<LanguageTag>> groups) {
  std::vector<Instance> sorted(instances.begin(), instances.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Instance& a, const Instance& b) { return a.id < b.id; });

  std::vector<Partition> assignment(sorted.size(), Partition::kUnlabeled);
  std::vector<char> used(sorted.size(), 0);
  std::set<LanguageTag> seen_languages;
  Rng rng(spec.rng_seed);

  for (const auto& group : groups) {
    std::string names;
    for (const auto& lang : group) {
      if (!seen_languages.insert(lang).second) {
        throw ConfigError("language " + lang.str() + " appears in more than one draw group");
      }
      names += (names.empty() ? "" : "+") + lang.str();
    }
    std::vector<std::size_t> members;
    Cost available = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (std::find(group.begin(), group.end(), sorted[i].language) != group.end()) {
        members.push_back(i);
        available += sorted[i].cost;
      }
    }
    const Cost requested = spec.seed_budget + spec.val_budget;
    if (members.empty() || available < requested) {
      throw ConfigError("insufficient data for language " + names + ": available cost " +
                        std::to_string(available) + ", requested " + std::to_string(requested));
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : take_within_budget(members, sorted, used, spec.seed_budget)) {
      assignment[idx] = Partition::kLabeled;
    }
    for (std::size_t idx : take_within_budget(members, sorted, used, spec.val_budget)) {
      assignment[idx] = Partition::kValidation;
    }
  }

  Pool pool;
  for (std::size_t i = 0; i < sorted.size(); ++i) pool.insert(assignment[i], std::move(sorted[i]));
  return pool;
}

}  // namespace mlal
