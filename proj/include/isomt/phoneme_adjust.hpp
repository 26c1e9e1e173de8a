#pragma once

#include <string>
#include <vector>

namespace isomt::adjust {

enum class PhonemeClass { kVowel, kConsonant, kSilence };

// ARPAbet-style labels: vowels start with a vowel letter (AA, IY1, ...),
// empty / sil / sp / spn labels are silence, everything else is a consonant.
PhonemeClass classify_phoneme(const std::string& label);

struct TimedPhoneme {
  std::string label;
  long long frames = 0;
};

struct AdjustResult {
  std::vector<TimedPhoneme> phonemes;
  long long total_frames = 0;
  bool met_budget = false;
};

// Integer proportional rounding: scales values so they sum to target_total
// while keeping the proportions as close as possible (largest remainder).
// Scaling any list onto its own sum returns it unchanged.
std::vector<long long> scale_to_total(const std::vector<long long>& values,
                                      long long target_total);

// Retimes an utterance onto the frame budget by scaling only vowels and
// silence; consonants keep their duration. Every vowel keeps at least one
// frame, so very tight budgets can come back with met_budget=false and the
// smallest total the rule allows.
AdjustResult stretch_to_budget(const std::vector<TimedPhoneme>& phonemes,
                               long long budget_frames);

}  // namespace isomt::adjust
