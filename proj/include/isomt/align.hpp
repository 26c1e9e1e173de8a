#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isomt/textgrid.hpp"

namespace isomt::align {

// One phoneme with its time span. word_index points into the word list of the
// owning "words" tier; silence carries no owner.
struct PhonemeInterval {
  std::string label;
  double start = 0.0;
  double end = 0.0;
  std::optional<int> word_index;
};

// Word-level duration in integer frames plus the silence that follows it
// (0 when the next word starts immediately).
struct WordDuration {
  std::string word;
  long long frames = 0;
  long long trailing_pause_frames = 0;
};

// Round-half-up conversion. A small slack absorbs representation error in
// seconds * fps products that land on an exact .5 boundary.
long long frames_from_seconds(double seconds, double frames_per_second);

// Collapses a parsed "words" tier into WordDuration records. Silence between
// two words becomes the preceding word's trailing pause; silence at either
// utterance edge is dropped; words that round to 0 frames are clamped to 1.
std::vector<WordDuration> word_durations(const Tier& words_tier,
                                         double frames_per_second);

// Pairs each phoneme with the word interval that contains its midpoint.
// Phonemes with an empty label, or lying outside every word, get no owner.
std::vector<PhonemeInterval> phoneme_intervals(const Tier& phones_tier,
                                               const Tier& words_tier);

}  // namespace isomt::align
