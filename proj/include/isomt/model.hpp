#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "isomt/autograd.hpp"
#include "isomt/positional.hpp"
#include "isomt/rng.hpp"
#include "isomt/vocab.hpp"

namespace isomt::model {

using tok::Vocabulary;

// Architecture plus the duration-control switches. The three use_*_pe flags
// apply to the decoder input sum only; the encoder always gets its ordinary
// sinusoidal positions. use_pause_tokens=false additionally strips pause
// tokens from both sides at batch assembly, which together with disabling
// both duration PEs reduces the model to a plain transformer.
struct Config {
  int layers_enc = 2;
  int layers_dec = 2;
  int heads = 4;
  int model_dim = 64;
  int ffn_dim = 256;
  double dropout = 0.1;
  double label_smoothing = 0.1;
  double duration_loss_weight = 1.0;  // weight of the log-domain MSE term
  int vocab_size = 0;
  int quantization_level = 5;
  long long max_position = 8192;
  bool use_ordinal_pe = true;
  bool use_abs_pe = true;
  bool use_rel_pe = true;
  bool use_pause_tokens = true;
  bool verbosity_control = false;  // length-bucket token after BOS instead of duration PEs
  uint64_t seed = 1;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static Config from_json(const nlohmann::json& j);
};

// One tokenized sentence pair in id space, without BOS/EOS. tgt_frames is
// the per-token speech duration; bucket is a verbosity token id or -1.
struct Example {
  std::vector<int> src;
  std::vector<int> tgt;
  std::vector<long long> tgt_frames;
  int bucket = -1;
};

// Teacher-forced graph handles for one sentence.
struct SentenceGraph {
  int logits = -1;   // (len, vocab) node
  int logdur = -1;   // (len, 1) node, log(1 + frames) scale
  std::vector<int> targets;           // next-token ids, EOS last
  std::vector<long long> dur_targets; // gold frames per target, EOS gets 0
};

struct SentenceLoss {
  int total = -1;  // 1x1 node: ce_sum/denom + lambda * mse_sum/denom
  double ce_sum = 0.0;
  double mse_sum = 0.0;
  int positions = 0;
};

class Transformer {
 public:
  explicit Transformer(const Config& cfg);

  const Config& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // Builds the per-sentence training graph. dropout_rng supplies the masks
  // and must be non-null when train is true and cfg.dropout > 0.
  SentenceGraph build(nn::Tape& tape, const Example& ex, bool train,
                      Rng* dropout_rng) const;

  // Cross entropy + weighted duration loss for one sentence, both scaled by
  // 1/denom so per-sentence graphs sum to the batch mean loss.
  SentenceLoss build_loss(nn::Tape& tape, const SentenceGraph& g, int denom) const;

  // Inference-side pieces. Both run without dropout on throwaway tapes.
  Eigen::MatrixXd encode(const std::vector<int>& src) const;
  struct StepOutput {
    Eigen::RowVectorXd log_probs;  // vocab-sized, log softmax of the last position
    double log_duration = 0.0;     // predictor output at the last position
  };
  StepOutput decode_step(const Eigen::MatrixXd& encoder_out,
                         const std::vector<int>& emitted_tokens,
                         const std::vector<long long>& emitted_frames,
                         long long budget_frames) const;

 private:
  int encode_graph(nn::Tape& tape, const std::vector<int>& src_ids, bool train,
                   Rng* rng) const;
  struct DecoderOut {
    int hidden = -1;
    int logits = -1;
    int logdur = -1;
  };
  DecoderOut decoder_graph(nn::Tape& tape, int enc_out, const std::vector<int>& dec_in,
                           const std::vector<long long>& cumulative, long long total,
                           bool train, Rng* rng) const;
  int attention(nn::Tape& tape, int x, int kv, const std::string& attn_prefix,
                const std::string& ln_prefix, const nn::Mat* mask, bool train,
                Rng* rng) const;
  int ffn_block(nn::Tape& tape, int x, const std::string& ffn_prefix,
                const std::string& ln_prefix, bool train, Rng* rng) const;
  int predictor_graph(nn::Tape& tape, int hidden, bool train, Rng* rng) const;
  int dropout(nn::Tape& tape, int x, bool train, Rng* rng) const;
  nn::Mat pe_rows(const std::vector<long long>& positions) const;

  Config cfg_;
  nn::ParamStore params_;
};

// [BOS] + tokens + [EOS], with the verbosity token at index 1 when set.
std::vector<int> with_specials(const std::vector<int>& tokens, int bucket = -1);

// Mean over positions of (pred - log(1 + gold))^2. Gold frames must be >= 0.
double duration_loss(const std::vector<double>& predicted_log_durations,
                     const std::vector<long long>& gold_frames);

}  // namespace isomt::model
