#pragma once

#include <Eigen/Dense>

#include "isomt/common.hpp"

namespace isomt::emb {

inline constexpr long long kDefaultMaxPosition = 1 << 20;

struct EmbeddingConfig {
  int model_dim = 64;
  int quantization_level = 5;      // N buckets for the consumed-budget ratio
  long long max_position = 8192;   // must cover the longest utterance in frames
};

// Standard sinusoidal vector: dims 2k carry sin(pos / 10000^(2k/d)), dims
// 2k+1 the matching cos. One table serves ordinal positions, cumulative
// frames and quantized ratios alike.
Eigen::RowVectorXd sinusoidal_pe(long long position, int model_dim,
                                 long long max_position = kDefaultMaxPosition);

// floor(N * cumulative / total) clamped into [0, N]. Integer arithmetic, so
// cumulative == total lands exactly on N and overshoot clamps instead of
// erroring.
long long quantize_ratio(long long cumulative_frames, long long total_budget_frames,
                         int quantization_level);

struct DecoderStepState {
  long long step_index = 0;         // ordinal decoder position
  long long cumulative_frames = 0;  // frames of everything already emitted
  long long total_budget_frames = 1;
};

// w + ordinal PE + absolute-duration PE + relative-duration PE, with each
// duration term individually switchable for the ablations. Disabling both
// duration terms reproduces the vanilla decoder input exactly.
Eigen::RowVectorXd decoder_input(const Eigen::RowVectorXd& word_embedding,
                                 const DecoderStepState& state,
                                 const EmbeddingConfig& config,
                                 bool use_ordinal_pe = true, bool use_abs_pe = true,
                                 bool use_rel_pe = true);

}  // namespace isomt::emb
