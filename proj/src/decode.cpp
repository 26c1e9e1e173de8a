#include "isomt/decode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace isomt::decode {

using tok::Vocabulary;

void DecodeOptions::validate() const {
  require(budget_frames >= 1, "budget_frames must be positive");
  require(beam_size >= 1, "beam_size must be positive");
  require(max_tokens >= 1, "max_tokens must be positive");
  require(length_penalty >= 0.0, "length_penalty must be non-negative");
}

long long Hypothesis::total_frames() const {
  return std::accumulate(frames.begin(), frames.end(), 0LL);
}

double length_penalized_score(double sum_logprob, int length, double alpha) {
  double lp = std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
  return sum_logprob / lp;
}

namespace {

// Final choice: best normalized score, then fewer tokens, then the smaller
// token sequence, so equal-scoring runs always return the same hypothesis.
bool final_better(const Hypothesis& a, const Hypothesis& b, double alpha) {
  double sa = length_penalized_score(a.score, static_cast<int>(a.tokens.size()), alpha);
  double sb = length_penalized_score(b.score, static_cast<int>(b.tokens.size()), alpha);
  if (sa != sb) return sa > sb;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

struct Candidate {
  double score = 0.0;
  int parent = 0;
  int token = 0;
  long long frames = 0;  // frame cost of this token, 0 for EOS
};

}  // namespace

Hypothesis translate_with_budget(const model::Transformer& m, const std::vector<int>& src,
                                 const DecodeOptions& opts) {
  opts.validate();
  require(!src.empty(), "empty source sentence");
  const int vocab = m.config().vocab_size;
  const Eigen::MatrixXd enc = m.encode(src);

  std::vector<Hypothesis> live(1);
  std::vector<Hypothesis> finished;
  std::vector<Candidate> cands;

  for (int step = 0; step < opts.max_tokens && !live.empty(); ++step) {
    cands.clear();
    for (size_t h = 0; h < live.size(); ++h) {
      const Hypothesis& hyp = live[h];
      model::Transformer::StepOutput out =
          m.decode_step(enc, hyp.tokens, hyp.frames, opts.budget_frames);
      // Frame cost of whatever token fills this position, fixed before the
      // token is chosen; exp inverts the log(1 + frames) training target.
      long long frames_hat =
          std::max<long long>(0, std::llround(std::expm1(out.log_duration)));
      long long spent = hyp.total_frames();
      bool allow_non_eos =
          !opts.hard_stop ||
          spent + std::max<long long>(1, frames_hat) < opts.budget_frames;
      for (int t = 0; t < vocab; ++t) {
        if (t == Vocabulary::kPad || t == Vocabulary::kBos) continue;
        if (t != Vocabulary::kEos && !allow_non_eos) continue;
        cands.push_back(Candidate{hyp.score + out.log_probs(t), static_cast<int>(h), t,
                                  t == Vocabulary::kEos ? 0 : frames_hat});
      }
    }
    // Candidates were generated in (parent, token id) order; the stable sort
    // keeps that order as the tie break after score and token id.
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.token < b.token;
    });

    std::vector<Hypothesis> next;
    for (const Candidate& c : cands) {
      if (static_cast<int>(next.size()) + static_cast<int>(finished.size()) >=
          opts.beam_size)
        break;
      Hypothesis hyp = live[static_cast<size_t>(c.parent)];
      hyp.score = c.score;
      if (c.token == Vocabulary::kEos) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));
      } else {
        hyp.tokens.push_back(c.token);
        hyp.frames.push_back(c.frames);
        next.push_back(std::move(hyp));
      }
    }
    live = std::move(next);
  }

  for (Hypothesis& hyp : live) finished.push_back(std::move(hyp));
  require(!finished.empty(), "decoder produced no hypothesis");
  const Hypothesis* best = &finished[0];
  for (const Hypothesis& hyp : finished)
    if (final_better(hyp, *best, opts.length_penalty)) best = &hyp;
  return *best;
}

}  // namespace isomt::decode
