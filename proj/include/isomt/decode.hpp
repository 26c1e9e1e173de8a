#pragma once

#include <vector>

#include "isomt/model.hpp"

namespace isomt::decode {

struct DecodeOptions {
  long long budget_frames = 0;  // required, > 0
  int beam_size = 1;            // 1 is greedy
  int max_tokens = 128;         // cap on emitted tokens, EOS not counted
  bool hard_stop = false;       // forbid tokens that would cross the budget
  double length_penalty = 1.0;  // alpha in ((5 + len) / 6)^alpha

  void validate() const;
};

struct Hypothesis {
  std::vector<int> tokens;        // no BOS/EOS
  std::vector<long long> frames;  // predicted frames per emitted token
  double score = 0.0;             // sum of token log probs, EOS included
  bool finished = false;          // false means max_tokens ran out first

  long long total_frames() const;
};

// GNMT style normalization used to pick the final hypothesis.
double length_penalized_score(double sum_logprob, int length, double alpha);

// Beam search that feeds the consumed frame count back into the decoder at
// every step. The duration predictor fixes the frame cost of a position
// before the token is chosen, so beam siblings share it.
Hypothesis translate_with_budget(const model::Transformer& m, const std::vector<int>& src,
                                 const DecodeOptions& opts);

}  // namespace isomt::decode
