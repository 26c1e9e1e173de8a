#pragma once

#include <string>
#include <vector>

#include "isomt/phoneme_adjust.hpp"

namespace isomt::data {

// One aligned sentence pair. Word frames and inter-word pauses live in
// separate parallel lists; pauses sit between consecutive words, so a side
// with W words carries W-1 pause entries.
struct CorpusRecord {
  std::string id;
  std::vector<std::string> src_words;
  std::vector<long long> src_word_frames;
  std::vector<long long> src_pause_frames;
  std::vector<std::string> tgt_words;
  std::vector<long long> tgt_word_frames;
  std::vector<long long> tgt_pause_frames;

  long long src_total_frames() const;  // words plus pauses
  long long tgt_total_frames() const;
  void validate() const;
};

// Translation output, one line per sentence.
struct HypRecord {
  std::string id;
  std::vector<std::string> words;
  long long frames = 0;  // predicted speech frames of the whole hypothesis
  long long budget = 0;  // frame budget the decoder was given
  double score = 0.0;
  bool finished = true;
};

// Phoneme sequence plus the frame budget it should be stretched onto.
struct PhonemeRecord {
  std::string id;
  std::vector<adjust::TimedPhoneme> phonemes;
  long long budget = 0;
};

// All three files are JSON lines with a leading header line that names the
// format and its version.
std::vector<CorpusRecord> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<CorpusRecord>& records);

std::vector<HypRecord> load_hyps(const std::string& path);
void save_hyps(const std::string& path, const std::vector<HypRecord>& records);

std::vector<PhonemeRecord> load_phonemes(const std::string& path);
void save_phonemes(const std::string& path, const std::vector<PhonemeRecord>& records);

}  // namespace isomt::data
