#include "isomt/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <unordered_map>

#include "isomt/common.hpp"

namespace isomt::metrics {

double speech_ratio(long long hyp_frames, long long ref_frames) {
  require(ref_frames > 0, "reference frame count must be positive");
  require(hyp_frames >= 0, "hypothesis frame count must be non-negative");
  return static_cast<double>(hyp_frames) / static_cast<double>(ref_frames);
}

void SlcAccumulator::add(double ratio) {
  require(p_ >= 0.0, "window must be non-negative");
  ++total_;
  if (ratio >= 1.0 - p_ - 1e-12 && ratio <= 1.0 + p_ + 1e-12) ++within_;
}

double SlcAccumulator::percent() const {
  if (total_ == 0) return 0.0;
  return 100.0 * static_cast<double>(within_) / static_cast<double>(total_);
}

double slc(const std::vector<double>& ratios, double p) {
  SlcAccumulator acc(p);
  for (double r : ratios) acc.add(r);
  return acc.percent();
}

namespace {

// n-gram key: tokens joined with an unlikely separator byte.
std::string ngram_key(const std::vector<std::string>& words, size_t start, size_t n) {
  std::string key;
  for (size_t i = 0; i < n; ++i) {
    if (i) key.push_back('\x1f');
    key += words[start + i];
  }
  return key;
}

using Counts = std::unordered_map<std::string, long long>;

Counts ngram_counts(const std::vector<std::string>& words, size_t n) {
  Counts out;
  if (words.size() >= n)
    for (size_t i = 0; i + n <= words.size(); ++i) ++out[ngram_key(words, i, n)];
  return out;
}

}  // namespace

BleuBreakdown bleu_corpus(const std::vector<std::vector<std::string>>& hyps,
                          const std::vector<std::vector<std::vector<std::string>>>& refs) {
  require(hyps.size() == refs.size(), "hypothesis/reference count mismatch");
  require(!hyps.empty(), "empty corpus");

  std::array<long long, 4> matched{};
  std::array<long long, 4> total{};
  BleuBreakdown out;

  for (size_t s = 0; s < hyps.size(); ++s) {
    const auto& hyp = hyps[s];
    const auto& ref_set = refs[s];
    require(!ref_set.empty(), "sentence ", s, " has no reference");

    out.hyp_len += static_cast<long long>(hyp.size());
    // Effective reference length: closest to the hypothesis, shorter on ties.
    long long best_ref = static_cast<long long>(ref_set[0].size());
    for (const auto& ref : ref_set) {
      auto len = static_cast<long long>(ref.size());
      long long d_new = std::llabs(len - static_cast<long long>(hyp.size()));
      long long d_old = std::llabs(best_ref - static_cast<long long>(hyp.size()));
      if (d_new < d_old || (d_new == d_old && len < best_ref)) best_ref = len;
    }
    out.ref_len += best_ref;

    for (size_t n = 1; n <= 4; ++n) {
      Counts hyp_counts = ngram_counts(hyp, n);
      Counts clip;
      for (const auto& ref : ref_set)
        for (const auto& [key, count] : ngram_counts(ref, n))
          clip[key] = std::max(clip[key], count);
      for (const auto& [key, count] : hyp_counts) {
        total[n - 1] += count;
        auto it = clip.find(key);
        if (it != clip.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_prec = 0.0;
  bool zero = false;
  for (size_t n = 0; n < 4; ++n) {
    out.precisions[n] =
        total[n] > 0 ? static_cast<double>(matched[n]) / static_cast<double>(total[n]) : 0.0;
    if (out.precisions[n] <= 0.0)
      zero = true;
    else
      log_prec += std::log(out.precisions[n]);
  }
  out.brevity_penalty =
      out.hyp_len >= out.ref_len || out.hyp_len == 0
          ? 1.0
          : std::exp(1.0 - static_cast<double>(out.ref_len) / static_cast<double>(out.hyp_len));
  if (out.hyp_len == 0) out.brevity_penalty = 0.0;
  out.bleu = zero ? 0.0 : 100.0 * out.brevity_penalty * std::exp(log_prec / 4.0);
  return out;
}

BleuBreakdown bleu_corpus_single(const std::vector<std::vector<std::string>>& hyps,
                                 const std::vector<std::vector<std::string>>& refs) {
  std::vector<std::vector<std::vector<std::string>>> wrapped;
  wrapped.reserve(refs.size());
  for (const auto& r : refs) wrapped.push_back({r});
  return bleu_corpus(hyps, wrapped);
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace isomt::metrics
