#include "mlal/synth.h"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "mlal/error.h"
#include "mlal/random.h"

namespace mlal {

namespace {

enum class Role { kPositive, kNegative, kNeutral, kPer, kLoc, kOrg, kCuePer, kCueLoc, kCueOrg,
                  kNoun, kVerb, kAdj, kDet, kAdp };

struct Concept {
  Role role;
  std::vector<std::string> forms;  // per language
};

class Lexicon {
 public:
  Lexicon(const SynthParams& params, Rng& rng) : k_(params.languages) {
    const auto roles = roles_for(params.task);
    for (int c = 0; c < params.concepts; ++c) {
      Concept entry{roles[static_cast<std::size_t>(c) % roles.size()], {}};
      if (rng.bernoulli(params.overlap)) {
        entry.forms.assign(k_, fresh_word(rng));
      } else {
        for (int l = 0; l < k_; ++l) entry.forms.push_back(fresh_word(rng));
      }
      by_role_[entry.role].push_back(concepts_.size());
      concepts_.push_back(std::move(entry));
    }
    for (Role r : roles) {
      if (by_role_[r].empty()) throw ConfigError("too few concepts for the task's roles");
    }
  }

  // Zipf-like draw so that some forms are frequent and many are rare.
  const std::string& draw(Role role, int language, Rng& rng) const {
    const auto& ids = by_role_.at(role);
    const double u = rng.uniform();
    const auto idx = static_cast<std::size_t>(std::floor(std::pow(u, 2.0) * static_cast<double>(ids.size())));
    return concepts_[ids[std::min(idx, ids.size() - 1)]].forms[language];
  }

 private:
  static std::vector<Role> roles_for(TaskKind task) {
    switch (task) {
      case TaskKind::kClassification: return {Role::kPositive, Role::kNegative, Role::kNeutral, Role::kNeutral};
      case TaskKind::kSequenceTagging:
        return {Role::kNeutral, Role::kNeutral, Role::kNeutral, Role::kPer, Role::kLoc, Role::kOrg,
                Role::kNeutral, Role::kPer, Role::kLoc, Role::kOrg, Role::kCuePer, Role::kCueLoc, Role::kCueOrg};
      case TaskKind::kDependencyParsing:
        return {Role::kNoun, Role::kNoun, Role::kNoun, Role::kVerb, Role::kVerb, Role::kAdj, Role::kAdj,
                Role::kDet, Role::kAdp};
    }
    return {};
  }

  std::string fresh_word(Rng& rng) {
    static const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"};
    static const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
    for (;;) {
      std::string w;
      const int syllables = 2 + static_cast<int>(rng.below(2));
      for (int s = 0; s < syllables; ++s) {
        w += kOnsets[rng.below(std::size(kOnsets))];
        w += kVowels[rng.below(std::size(kVowels))];
      }
      if (used_.insert(w).second) return w;
    }
  }

  int k_;
  std::vector<Concept> concepts_;
  std::map<Role, std::vector<std::size_t>> by_role_;
  std::set<std::string> used_;
};

int between(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

Instance make_classification(const Lexicon& lex, int lang, double noise, Rng& rng) {
  const bool positive = rng.bernoulli(0.5);
  const int len = between(rng, 6, 12);
  std::string text;
  for (int i = 0; i < len; ++i) {
    const double u = rng.uniform();
    Role role = u < 0.35 ? (positive ? Role::kPositive : Role::kNegative)
              : u < 0.4 ? (positive ? Role::kNegative : Role::kPositive)
                        : Role::kNeutral;
    if (!text.empty()) text += ' ';
    text += lex.draw(role, lang, rng);
  }
  const bool label = rng.bernoulli(noise) ? !positive : positive;
  Instance inst;
  inst.payload = ClassificationText{text, std::string(label ? "pos" : "neg")};
  inst.cost = 1;
  return inst;
}

Instance make_tagged(const Lexicon& lex, int lang, double noise, Rng& rng) {
  static const struct {
    Role entity, cue;
    const char* type;
  } kTypes[] = {{Role::kPer, Role::kCuePer, "PER"}, {Role::kLoc, Role::kCueLoc, "LOC"}, {Role::kOrg, Role::kCueOrg, "ORG"}};
  TaggedSentence s;
  s.tags.emplace();
  const int len = between(rng, 5, 12);
  while (static_cast<int>(s.tokens.size()) < len) {
    if (rng.bernoulli(0.25)) {
      const auto& t = kTypes[rng.below(3)];
      if (rng.bernoulli(0.6)) {
        s.tokens.push_back(lex.draw(t.cue, lang, rng));
        s.tags->push_back("O");
      }
      const int span = between(rng, 1, 2);
      for (int i = 0; i < span; ++i) {
        s.tokens.push_back(lex.draw(t.entity, lang, rng));
        s.tags->push_back(std::string(i == 0 ? "B-" : "I-") + t.type);
      }
      if (rng.bernoulli(noise)) {  // mention left unannotated
        for (int i = 0; i < span; ++i) (*s.tags)[s.tags->size() - 1 - i] = "O";
      }
    } else {
      s.tokens.push_back(lex.draw(Role::kNeutral, lang, rng));
      s.tags->push_back("O");
    }
  }
  Instance inst;
  inst.cost = static_cast<Cost>(s.tokens.size());
  inst.payload = std::move(s);
  return inst;
}

Instance make_tree(const Lexicon& lex, int lang, double noise, Rng& rng) {
  const bool head_final = lang % 2 == 1;
  DepTree t;
  t.heads.emplace();
  t.labels.emplace();
  auto add = [&](Role role, const char* upos) {
    t.tokens.push_back(lex.draw(role, lang, rng));
    t.upos.push_back(upos);
    t.heads->push_back(-1);
    t.labels->push_back("");
    return static_cast<int>(t.tokens.size());  // 1-based index
  };
  auto attach = [&](int dep, int head, const char* label) {
    (*t.heads)[dep - 1] = head;
    (*t.labels)[dep - 1] = label;
  };
  // Returns the noun's index; the caller attaches it.
  auto noun_phrase = [&]() {
    int det = 0, adj = 0, noun = 0;
    if (rng.bernoulli(0.6)) det = add(Role::kDet, "DET");
    const bool has_adj = rng.bernoulli(0.4);
    if (has_adj && !head_final) adj = add(Role::kAdj, "ADJ");
    noun = add(Role::kNoun, "NOUN");
    if (has_adj && head_final) adj = add(Role::kAdj, "ADJ");
    if (det) attach(det, noun, "det");
    if (adj) attach(adj, noun, "amod");
    return noun;
  };
  auto prep_phrase = [&]() {
    const int adp = add(Role::kAdp, "ADP");
    const int noun = noun_phrase();
    attach(adp, noun, "case");
    return noun;
  };

  const int subj = noun_phrase();
  int verb = 0, obj = 0, obl = 0;
  const bool has_obj = rng.bernoulli(0.7);
  const bool has_obl = rng.bernoulli(0.4);
  if (head_final) {
    if (has_obj) obj = noun_phrase();
    if (has_obl) obl = prep_phrase();
    verb = add(Role::kVerb, "VERB");
  } else {
    verb = add(Role::kVerb, "VERB");
    if (has_obj) obj = noun_phrase();
    if (has_obl) obl = prep_phrase();
  }
  attach(verb, 0, "root");
  attach(subj, verb, "nsubj");
  if (obj) attach(obj, verb, "obj");
  if (obl) attach(obl, verb, "obl");
  // noise: a modifier attaches to the verb instead of its noun
  for (std::size_t d = 0; d < t.tokens.size(); ++d) {
    const auto& label = (*t.labels)[d];
    if ((label == "det" || label == "amod") && rng.bernoulli(noise)) {
      (*t.heads)[d] = verb;
      (*t.labels)[d] = "dep";
    }
  }
  Instance inst;
  inst.cost = static_cast<Cost>(t.tokens.size());
  inst.payload = std::move(t);
  return inst;
}

}  // namespace

void SynthParams::validate() const {
  if (languages < 1) throw ConfigError("synthetic corpus needs at least one language");
  if (train_size < 1 || test_size < 1) throw ConfigError("synthetic split sizes must be positive");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw ConfigError("overlap must lie in [0, 1]");
  if (!(noise >= 0.0 && noise < 0.5)) throw ConfigError("noise must lie in [0, 0.5)");
  if (concepts < 20) throw ConfigError("at least 20 concepts are required");
}

std::vector<LanguageTag> synth_languages(int count) {
  std::vector<LanguageTag> out;
  for (int i = 0; i < count; ++i) out.emplace_back("l" + std::to_string(i));
  return out;
}

std::map<LanguageTag, SynthLanguage> generate_synthetic(const SynthParams& params) {
  params.validate();
  Rng lexicon_rng(derive_seed(params.seed, {0}));
  const Lexicon lex(params, lexicon_rng);
  const auto tags = synth_languages(params.languages);

  std::map<LanguageTag, SynthLanguage> out;
  InstanceId next_id = 0;
  for (int l = 0; l < params.languages; ++l) {
    Rng rng(derive_seed(params.seed, {1, static_cast<std::uint64_t>(l)}));
    const double noise = params.noise * (1.0 + static_cast<double>(l) / params.languages);
    auto make = [&] {
      Instance inst;
      switch (params.task) {
        case TaskKind::kClassification: inst = make_classification(lex, l, noise, rng); break;
        case TaskKind::kSequenceTagging: inst = make_tagged(lex, l, noise, rng); break;
        case TaskKind::kDependencyParsing: inst = make_tree(lex, l, noise, rng); break;
      }
      inst.id = next_id++;
      inst.language = tags[l];
      return inst;
    };
    auto& lang = out[tags[l]];
    for (int i = 0; i < params.train_size; ++i) lang.train.push_back(make());
    for (int i = 0; i < params.test_size; ++i) lang.test.push_back(make());
  }
  return out;
}

std::map<LanguageTag, SynthFiles> write_synthetic(const SynthParams& params,
                                                  const std::filesystem::path& out_dir) {
  const auto corpus = generate_synthetic(params);
  const char* ext = params.task == TaskKind::kClassification ? "tsv"
                    : params.task == TaskKind::kSequenceTagging ? "conll"
                                                                : "conllu";
  std::map<LanguageTag, SynthFiles> files;
  for (const auto& [lang, data] : corpus) {
    const auto dir = out_dir / lang.str();
    std::filesystem::create_directories(dir);
    SynthFiles f{dir / (std::string("train.") + ext), dir / (std::string("test.") + ext)};
    for (const auto& [path, items] : {std::pair{f.train, &data.train}, std::pair{f.test, &data.test}}) {
      std::ofstream os(path);
      if (!os) throw ConfigError("cannot write " + path.string());
      switch (params.task) {
        case TaskKind::kClassification: write_tsv_classification(os, *items); break;
        case TaskKind::kSequenceTagging: write_conll_ner(os, *items); break;
        case TaskKind::kDependencyParsing: write_conllu(os, *items); break;
      }
      if (!os) throw ConfigError("failed writing " + path.string());
    }
    files[lang] = f;
  }
  return files;
}

}  // namespace mlal
