#include "isomt/align.hpp"

#include <cmath>

namespace isomt::align {

long long frames_from_seconds(double seconds, double frames_per_second) {
  require(seconds >= 0.0, "frames_from_seconds: negative duration ", seconds);
  require(frames_per_second > 0.0, "frames_from_seconds: frame rate must be positive, got ",
          frames_per_second);
  // 0.01875 * 80 evaluates to 1.4999999999999998; the 1e-9 slack keeps exact
  // half-frame boundaries rounding up.
  return static_cast<long long>(std::floor(seconds * frames_per_second + 0.5 + 1e-9));
}

std::vector<WordDuration> word_durations(const Tier& words_tier,
                                         double frames_per_second) {
  std::vector<WordDuration> words;
  for (const Interval& iv : words_tier.intervals) {
    long long frames = frames_from_seconds(iv.xmax - iv.xmin, frames_per_second);
    if (iv.label.empty()) {
      // Silence. Attach to the preceding word; consecutive silences just
      // accumulate. Utterance-leading silence has no word yet and is dropped.
      if (!words.empty()) words.back().trailing_pause_frames += frames;
    } else {
      WordDuration wd;
      wd.word = iv.label;
      wd.frames = frames < 1 ? 1 : frames;
      wd.trailing_pause_frames = 0;
      words.push_back(std::move(wd));
    }
  }
  require(!words.empty(), "word_durations: tier \"", words_tier.name,
          "\" contains no words");
  // Whatever silence followed the last word is utterance-trailing: drop it.
  words.back().trailing_pause_frames = 0;
  return words;
}

std::vector<PhonemeInterval> phoneme_intervals(const Tier& phones_tier,
                                               const Tier& words_tier) {
  std::vector<PhonemeInterval> out;
  out.reserve(phones_tier.intervals.size());
  // Index of words (non-silence intervals) in tier order.
  std::vector<const Interval*> words;
  for (const Interval& w : words_tier.intervals)
    if (!w.label.empty()) words.push_back(&w);
  for (const Interval& ph : phones_tier.intervals) {
    PhonemeInterval pi;
    pi.label = ph.label;
    pi.start = ph.xmin;
    pi.end = ph.xmax;
    if (!ph.label.empty()) {
      double mid = 0.5 * (ph.xmin + ph.xmax);
      for (size_t w = 0; w < words.size(); ++w) {
        if (mid >= words[w]->xmin && mid < words[w]->xmax) {
          pi.word_index = static_cast<int>(w);
          break;
        }
      }
    }
    out.push_back(std::move(pi));
  }
  return out;
}

}  // namespace isomt::align
