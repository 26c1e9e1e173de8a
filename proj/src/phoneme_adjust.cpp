#include "isomt/phoneme_adjust.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "isomt/common.hpp"

namespace isomt::adjust {

PhonemeClass classify_phoneme(const std::string& label) {
  std::string core;
  for (char ch : label) {
    if (std::isdigit(static_cast<unsigned char>(ch))) continue;  // stress marks
    core.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (core.empty() || core == "sil" || core == "sp" || core == "spn")
    return PhonemeClass::kSilence;
  char first = core[0];
  if (first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u')
    return PhonemeClass::kVowel;
  return PhonemeClass::kConsonant;
}

std::vector<long long> scale_to_total(const std::vector<long long>& values,
                                      long long target_total) {
  require(target_total >= 0, "target total must be non-negative");
  long long sum = 0;
  for (long long v : values) {
    require(v >= 0, "values must be non-negative");
    sum += v;
  }
  if (sum == 0) {
    require(target_total == 0, "cannot scale an all-zero list to a positive total");
    return values;
  }
  std::vector<long long> out(values.size());
  std::vector<std::pair<long long, size_t>> remainders;  // (-remainder, index)
  long long assigned = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    long long num = values[i] * target_total;
    out[i] = num / sum;
    assigned += out[i];
    remainders.emplace_back(-(num % sum), i);
  }
  std::sort(remainders.begin(), remainders.end());
  long long leftover = target_total - assigned;
  for (long long k = 0; k < leftover; ++k) ++out[remainders[static_cast<size_t>(k)].second];
  return out;
}

AdjustResult stretch_to_budget(const std::vector<TimedPhoneme>& phonemes,
                               long long budget_frames) {
  require(budget_frames >= 1, "budget must be positive");
  require(!phonemes.empty(), "empty phoneme list");

  std::vector<PhonemeClass> cls(phonemes.size());
  std::vector<size_t> flex;  // vowel and silence slots, the scalable mass
  long long consonant_frames = 0;
  long long vowel_count = 0;
  for (size_t i = 0; i < phonemes.size(); ++i) {
    require(phonemes[i].frames >= 0, "negative phoneme duration");
    cls[i] = classify_phoneme(phonemes[i].label);
    if (cls[i] == PhonemeClass::kConsonant)
      consonant_frames += phonemes[i].frames;
    else
      flex.push_back(i);
    if (cls[i] == PhonemeClass::kVowel) ++vowel_count;
  }

  AdjustResult res;
  res.phonemes = phonemes;
  long long avail = budget_frames - consonant_frames;

  if (avail < vowel_count) {
    // Even the floor of one frame per vowel overshoots; return that floor.
    for (size_t i : flex)
      res.phonemes[i].frames = cls[i] == PhonemeClass::kVowel ? 1 : 0;
  } else if (!flex.empty()) {
    std::vector<long long> weights(flex.size());
    for (size_t k = 0; k < flex.size(); ++k) weights[k] = phonemes[flex[k]].frames;
    if (std::accumulate(weights.begin(), weights.end(), 0LL) == 0)
      std::fill(weights.begin(), weights.end(), 1LL);  // nothing to be proportional to
    std::vector<long long> scaled = scale_to_total(weights, avail);

    // Raise zero-frame vowels to one frame, paying from the largest slots.
    long long deficit = 0;
    for (size_t k = 0; k < flex.size(); ++k)
      if (cls[flex[k]] == PhonemeClass::kVowel && scaled[k] == 0) {
        scaled[k] = 1;
        ++deficit;
      }
    while (deficit > 0) {
      size_t best = flex.size();
      for (size_t k = 0; k < flex.size(); ++k) {
        long long floor = cls[flex[k]] == PhonemeClass::kVowel ? 1 : 0;
        if (scaled[k] <= floor) continue;
        if (best == flex.size() || scaled[k] > scaled[best]) best = k;
      }
      if (best == flex.size()) break;  // nothing reducible, budget stays unmet
      --scaled[best];
      --deficit;
    }
    for (size_t k = 0; k < flex.size(); ++k) res.phonemes[flex[k]].frames = scaled[k];
  }

  for (const TimedPhoneme& p : res.phonemes) res.total_frames += p.frames;
  res.met_budget = res.total_frames == budget_frames;
  return res;
}

}  // namespace isomt::adjust
