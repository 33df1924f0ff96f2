#ifndef MLAL_SYNTH_H_
#define MLAL_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "mlal/corpus.h"
#include "mlal/tasks.h"

namespace mlal {

// Generative process
// ------------------
// A shared inventory of latent concepts carries the task structure: a
// sentiment polarity (classification), an entity role (tagging) or a part of
// speech (parsing). Each concept gets one surface form shared by all
// languages with probability `overlap`, otherwise a distinct form per
// language; forms are unique across the whole corpus, so overlap 0 gives
// disjoint vocabularies and overlap 1 a single one. Sentences are drawn from
// the latent structure and then realized in a language's forms:
//   classification  label first, then words biased toward concepts of that
//                   polarity; the label is flipped with the language's noise
//   tagging         O-words with entity mentions of 1-2 concepts, often after
//                   a type-specific cue word
//   parsing         [NP] VERB [NP] [ADP NP] clauses; NP = [DET] [ADJ] NOUN.
//                   Odd-numbered languages put adjectives after the noun and
//                   the verb last
// Language i (0-based) has label noise noise * (1 + i / k).
struct SynthParams {
  TaskKind task = TaskKind::kClassification;
  int languages = 4;
  int train_size = 1500;  // sentences per language
  int test_size = 200;
  double overlap = 0.5;
  double noise = 0.05;
  int concepts = 240;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct SynthLanguage {
  std::vector<Instance> train;
  std::vector<Instance> test;
};

// Language codes "l0", "l1", ...
std::vector<LanguageTag> synth_languages(int count);

std::map<LanguageTag, SynthLanguage> generate_synthetic(const SynthParams& params);

// Writes <out>/<lang>/train.<ext> and test.<ext> in the task's file format
// (tsv, conll or conllu) and returns the written paths per language.
struct SynthFiles {
  std::filesystem::path train;
  std::filesystem::path test;
};
std::map<LanguageTag, SynthFiles> write_synthetic(const SynthParams& params,
                                                  const std::filesystem::path& out_dir);

}  // namespace mlal

#endif  // MLAL_SYNTH_H_
