#pragma once

#include <array>
#include <string>
#include <vector>

namespace isomt::metrics {

// hyp_frames / ref_frames. The reference side must be positive.
double speech_ratio(long long hyp_frames, long long ref_frames);

// Percentage of ratios inside [1 - p, 1 + p]. The comparison carries a tiny
// slack so ratios landing exactly on a window edge count as inside.
double slc(const std::vector<double>& ratios, double p);

class SlcAccumulator {
 public:
  explicit SlcAccumulator(double p) : p_(p) {}
  void add(double ratio);
  double percent() const;  // 0 when nothing was added
  int within() const { return within_; }
  int total() const { return total_; }

 private:
  double p_;
  int within_ = 0;
  int total_ = 0;
};

struct BleuBreakdown {
  double bleu = 0.0;  // percentage, 0..100
  std::array<double, 4> precisions{};  // modified n-gram precisions, 0..1
  double brevity_penalty = 1.0;
  long long hyp_len = 0;
  long long ref_len = 0;
};

// Corpus BLEU-4 with clipped counts and the brevity penalty, no smoothing.
// Multiple references per sentence are allowed; the effective reference
// length is the closest one (ties pick the shorter). Any zero n-gram
// precision zeroes the score.
BleuBreakdown bleu_corpus(const std::vector<std::vector<std::string>>& hyps,
                          const std::vector<std::vector<std::vector<std::string>>>& refs);

// Single-reference convenience wrapper.
BleuBreakdown bleu_corpus_single(const std::vector<std::vector<std::string>>& hyps,
                                 const std::vector<std::vector<std::string>>& refs);

std::vector<std::string> split_words(const std::string& line);

}  // namespace isomt::metrics
