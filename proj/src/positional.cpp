#include "isomt/positional.hpp"

#include <cmath>

namespace isomt::emb {

Eigen::RowVectorXd sinusoidal_pe(long long position, int model_dim,
                                 long long max_position) {
  require(position >= 0, "sinusoidal_pe: negative position ", position);
  require(position <= max_position, "sinusoidal_pe: position ", position,
          " exceeds max_position ", max_position);
  require(model_dim > 0 && model_dim % 2 == 0, "sinusoidal_pe: model_dim must be even, got ",
          model_dim);
  Eigen::RowVectorXd out(model_dim);
  double pos = static_cast<double>(position);
  for (int k = 0; k < model_dim / 2; ++k) {
    double angle = pos * std::pow(10000.0, -2.0 * k / model_dim);
    out(2 * k) = std::sin(angle);
    out(2 * k + 1) = std::cos(angle);
  }
  return out;
}

long long quantize_ratio(long long cumulative_frames, long long total_budget_frames,
                         int quantization_level) {
  require(total_budget_frames >= 1, "quantize_ratio: total budget must be >= 1, got ",
          total_budget_frames);
  require(cumulative_frames >= 0, "quantize_ratio: negative cumulative frames");
  require(quantization_level >= 1, "quantize_ratio: quantization level must be >= 1");
  long long q = quantization_level * cumulative_frames / total_budget_frames;
  if (q > quantization_level) q = quantization_level;
  return q;
}

Eigen::RowVectorXd decoder_input(const Eigen::RowVectorXd& word_embedding,
                                 const DecoderStepState& state,
                                 const EmbeddingConfig& config, bool use_ordinal_pe,
                                 bool use_abs_pe, bool use_rel_pe) {
  require(word_embedding.size() == config.model_dim, "decoder_input: embedding has ",
          word_embedding.size(), " dims, config says ", config.model_dim);
  Eigen::RowVectorXd out = word_embedding;
  if (use_ordinal_pe)
    out += sinusoidal_pe(state.step_index, config.model_dim, config.max_position);
  if (use_abs_pe)
    out += sinusoidal_pe(state.cumulative_frames, config.model_dim, config.max_position);
  if (use_rel_pe) {
    long long q = quantize_ratio(state.cumulative_frames, state.total_budget_frames,
                                 config.quantization_level);
    out += sinusoidal_pe(q, config.model_dim, config.max_position);
  }
  return out;
}

}  // namespace isomt::emb
