#include "isomt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace isomt::model {

void Config::validate() const {
  require(layers_enc >= 1 && layers_dec >= 1, "layer counts must be positive");
  require(heads >= 1, "heads must be positive");
  require(model_dim >= 2 && model_dim % 2 == 0, "model_dim must be a positive even number");
  require(model_dim % heads == 0, "model_dim ", model_dim, " not divisible by heads ", heads);
  require(ffn_dim >= 1, "ffn_dim must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(label_smoothing >= 0.0 && label_smoothing < 1.0,
          "label_smoothing must lie in [0, 1)");
  require(duration_loss_weight >= 0.0, "duration_loss_weight must be non-negative");
  require(vocab_size > Vocabulary::kReserved, "vocab_size must exceed the reserved ids");
  require(quantization_level >= 1, "quantization_level must be positive");
  require(max_position >= 2, "max_position too small");
}

nlohmann::ordered_json Config::to_json() const {
  nlohmann::ordered_json j;
  j["layers_enc"] = layers_enc;
  j["layers_dec"] = layers_dec;
  j["heads"] = heads;
  j["model_dim"] = model_dim;
  j["ffn_dim"] = ffn_dim;
  j["dropout"] = dropout;
  j["label_smoothing"] = label_smoothing;
  j["duration_loss_weight"] = duration_loss_weight;
  j["vocab_size"] = vocab_size;
  j["quantization_level"] = quantization_level;
  j["max_position"] = max_position;
  j["use_ordinal_pe"] = use_ordinal_pe;
  j["use_abs_pe"] = use_abs_pe;
  j["use_rel_pe"] = use_rel_pe;
  j["use_pause_tokens"] = use_pause_tokens;
  j["verbosity_control"] = verbosity_control;
  j["seed"] = seed;
  return j;
}

Config Config::from_json(const nlohmann::json& j) {
  Config c;
  c.layers_enc = j.value("layers_enc", c.layers_enc);
  c.layers_dec = j.value("layers_dec", c.layers_dec);
  c.heads = j.value("heads", c.heads);
  c.model_dim = j.value("model_dim", c.model_dim);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.dropout = j.value("dropout", c.dropout);
  c.label_smoothing = j.value("label_smoothing", c.label_smoothing);
  c.duration_loss_weight = j.value("duration_loss_weight", c.duration_loss_weight);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.quantization_level = j.value("quantization_level", c.quantization_level);
  c.max_position = j.value("max_position", c.max_position);
  c.use_ordinal_pe = j.value("use_ordinal_pe", c.use_ordinal_pe);
  c.use_abs_pe = j.value("use_abs_pe", c.use_abs_pe);
  c.use_rel_pe = j.value("use_rel_pe", c.use_rel_pe);
  c.use_pause_tokens = j.value("use_pause_tokens", c.use_pause_tokens);
  c.verbosity_control = j.value("verbosity_control", c.verbosity_control);
  c.seed = j.value("seed", c.seed);
  return c;
}

std::vector<int> with_specials(const std::vector<int>& tokens, int bucket) {
  std::vector<int> out;
  out.reserve(tokens.size() + 3);
  out.push_back(Vocabulary::kBos);
  if (bucket >= 0) out.push_back(bucket);
  out.insert(out.end(), tokens.begin(), tokens.end());
  out.push_back(Vocabulary::kEos);
  return out;
}

double duration_loss(const std::vector<double>& predicted_log_durations,
                     const std::vector<long long>& gold_frames) {
  require(predicted_log_durations.size() == gold_frames.size(),
          "duration_loss: prediction/gold size mismatch");
  require(!gold_frames.empty(), "duration_loss: empty inputs");
  double sum = 0.0;
  for (size_t i = 0; i < gold_frames.size(); ++i) {
    require(gold_frames[i] >= 0, "duration_loss: negative gold frame count");
    double diff = predicted_log_durations[i] - std::log1p(static_cast<double>(gold_frames[i]));
    sum += diff * diff;
  }
  return sum / static_cast<double>(gold_frames.size());
}

Transformer::Transformer(const Config& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng init(cfg_.seed);
  Rng stream = init.fork("init");
  const int d = cfg_.model_dim;
  const int f = cfg_.ffn_dim;
  const int v = cfg_.vocab_size;

  auto xavier = [&](const std::string& name, int rows, int cols) {
    double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    nn::Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = stream.uniform(-a, a);
    params_.add(name, std::move(m));
  };
  auto gauss = [&](const std::string& name, int rows, int cols, double std_dev) {
    nn::Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = stream.normal() * std_dev;
    params_.add(name, std::move(m));
  };
  auto zeros = [&](const std::string& name, int rows, int cols) {
    params_.add(name, nn::Mat::Zero(rows, cols));
  };
  auto ones = [&](const std::string& name, int rows, int cols) {
    params_.add(name, nn::Mat::Ones(rows, cols));
  };
  auto attn = [&](const std::string& p) {
    xavier(p + ".wq", d, d);
    xavier(p + ".wk", d, d);
    xavier(p + ".wv", d, d);
    xavier(p + ".wo", d, d);
    zeros(p + ".bq", 1, d);
    zeros(p + ".bk", 1, d);
    zeros(p + ".bv", 1, d);
    zeros(p + ".bo", 1, d);
  };
  auto lnorm = [&](const std::string& p) {
    ones(p + ".g", 1, d);
    zeros(p + ".b", 1, d);
  };
  auto ffn = [&](const std::string& p) {
    xavier(p + ".w1", d, f);
    zeros(p + ".b1", 1, f);
    xavier(p + ".w2", f, d);
    zeros(p + ".b2", 1, d);
  };
  auto conv = [&](const std::string& p) {
    xavier(p + ".w0", d, d);  // current position
    xavier(p + ".w1", d, d);  // one position back
    xavier(p + ".w2", d, d);  // two positions back
    zeros(p + ".b", 1, d);
  };

  gauss("emb.src", v, d, 1.0 / std::sqrt(static_cast<double>(d)));
  gauss("emb.tgt", v, d, 1.0 / std::sqrt(static_cast<double>(d)));
  for (int l = 0; l < cfg_.layers_enc; ++l) {
    std::string p = cat("enc.", l);
    attn(p + ".self");
    lnorm(p + ".ln1");
    ffn(p + ".ffn");
    lnorm(p + ".ln2");
  }
  for (int l = 0; l < cfg_.layers_dec; ++l) {
    std::string p = cat("dec.", l);
    attn(p + ".self");
    lnorm(p + ".ln1");
    attn(p + ".cross");
    lnorm(p + ".ln2");
    ffn(p + ".ffn");
    lnorm(p + ".ln3");
  }
  xavier("out.w", v, d);
  zeros("out.b", 1, v);
  conv("dur.c1");
  lnorm("dur.ln1");
  conv("dur.c2");
  lnorm("dur.ln2");
  xavier("dur.out.w", d, 1);
  zeros("dur.out.b", 1, 1);
}

int Transformer::dropout(nn::Tape& tape, int x, bool train, Rng* rng) const {
  if (!train || cfg_.dropout <= 0.0) return x;
  require(rng != nullptr, "training with dropout requires an rng");
  const nn::Mat& v = tape.val(x);
  nn::Mat mask(v.rows(), v.cols());
  double keep = 1.0 - cfg_.dropout;
  for (Eigen::Index r = 0; r < v.rows(); ++r)
    for (Eigen::Index c = 0; c < v.cols(); ++c)
      mask(r, c) = rng->unit() < cfg_.dropout ? 0.0 : 1.0 / keep;
  return tape.cmul(x, tape.constant(std::move(mask)));
}

nn::Mat Transformer::pe_rows(const std::vector<long long>& positions) const {
  nn::Mat m(static_cast<Eigen::Index>(positions.size()), cfg_.model_dim);
  for (size_t i = 0; i < positions.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) =
        emb::sinusoidal_pe(positions[i], cfg_.model_dim, cfg_.max_position);
  return m;
}

int Transformer::attention(nn::Tape& tape, int x, int kv, const std::string& attn_prefix,
                           const std::string& ln_prefix, const nn::Mat* mask, bool train,
                           Rng* rng) const {
  auto L = [&](const std::string& s) { return tape.leaf(params_.at(attn_prefix + s)); };
  int q = tape.add_rowvec(tape.matmul(x, L(".wq")), L(".bq"));
  int k = tape.add_rowvec(tape.matmul(kv, L(".wk")), L(".bk"));
  int v = tape.add_rowvec(tape.matmul(kv, L(".wv")), L(".bv"));
  const int dh = cfg_.model_dim / cfg_.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<int> heads;
  heads.reserve(static_cast<size_t>(cfg_.heads));
  for (int h = 0; h < cfg_.heads; ++h) {
    int qh = tape.slice_cols(q, h * dh, dh);
    int kh = tape.slice_cols(k, h * dh, dh);
    int vh = tape.slice_cols(v, h * dh, dh);
    int scores = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt);
    int probs = tape.softmax_rows(scores, mask);
    heads.push_back(tape.matmul(probs, vh));
  }
  int ctx = heads.size() == 1 ? heads[0] : tape.concat_cols(heads);
  int proj = tape.add_rowvec(tape.matmul(ctx, L(".wo")), L(".bo"));
  proj = dropout(tape, proj, train, rng);
  int res = tape.add(x, proj);
  return tape.layer_norm(res, tape.leaf(params_.at(ln_prefix + ".g")),
                         tape.leaf(params_.at(ln_prefix + ".b")));
}

int Transformer::ffn_block(nn::Tape& tape, int x, const std::string& ffn_prefix,
                           const std::string& ln_prefix, bool train, Rng* rng) const {
  auto L = [&](const std::string& s) { return tape.leaf(params_.at(ffn_prefix + s)); };
  int h1 = tape.relu(tape.add_rowvec(tape.matmul(x, L(".w1")), L(".b1")));
  int h2 = tape.add_rowvec(tape.matmul(h1, L(".w2")), L(".b2"));
  h2 = dropout(tape, h2, train, rng);
  int res = tape.add(x, h2);
  return tape.layer_norm(res, tape.leaf(params_.at(ln_prefix + ".g")),
                         tape.leaf(params_.at(ln_prefix + ".b")));
}

int Transformer::encode_graph(nn::Tape& tape, const std::vector<int>& src_ids, bool train,
                              Rng* rng) const {
  require(!src_ids.empty(), "encoder input is empty");
  int x = tape.gather_rows(tape.leaf(params_.at("emb.src")), src_ids);
  x = tape.scale(x, std::sqrt(static_cast<double>(cfg_.model_dim)));
  std::vector<long long> pos(src_ids.size());
  std::iota(pos.begin(), pos.end(), 0);
  x = tape.add(x, tape.constant(pe_rows(pos)));
  x = dropout(tape, x, train, rng);
  for (int l = 0; l < cfg_.layers_enc; ++l) {
    std::string p = cat("enc.", l);
    x = attention(tape, x, x, p + ".self", p + ".ln1", nullptr, train, rng);
    x = ffn_block(tape, x, p + ".ffn", p + ".ln2", train, rng);
  }
  return x;
}

int Transformer::predictor_graph(nn::Tape& tape, int hidden, bool train, Rng* rng) const {
  // Causal kernel-3 convolution: position t only sees t, t-1, t-2, so teacher
  // forced training matches stepwise inference where t is always the last row.
  auto conv = [&](int in, const std::string& p) {
    int cur = tape.matmul(in, tape.leaf(params_.at(p + ".w0")));
    int back1 = tape.matmul(tape.shift_rows(in, 1), tape.leaf(params_.at(p + ".w1")));
    int back2 = tape.matmul(tape.shift_rows(in, 2), tape.leaf(params_.at(p + ".w2")));
    return tape.add_rowvec(tape.add(tape.add(cur, back1), back2),
                           tape.leaf(params_.at(p + ".b")));
  };
  int h = tape.relu(conv(hidden, "dur.c1"));
  h = tape.layer_norm(h, tape.leaf(params_.at("dur.ln1.g")),
                      tape.leaf(params_.at("dur.ln1.b")));
  h = dropout(tape, h, train, rng);
  h = tape.relu(conv(h, "dur.c2"));
  h = tape.layer_norm(h, tape.leaf(params_.at("dur.ln2.g")),
                      tape.leaf(params_.at("dur.ln2.b")));
  h = dropout(tape, h, train, rng);
  return tape.add_rowvec(tape.matmul(h, tape.leaf(params_.at("dur.out.w"))),
                         tape.leaf(params_.at("dur.out.b")));
}

Transformer::DecoderOut Transformer::decoder_graph(nn::Tape& tape, int enc_out,
                                                   const std::vector<int>& dec_in,
                                                   const std::vector<long long>& cumulative,
                                                   long long total, bool train,
                                                   Rng* rng) const {
  require(!dec_in.empty(), "decoder input is empty");
  require(cumulative.size() == dec_in.size(), "cumulative frames misaligned with decoder input");
  require(total >= 1, "total budget frames must be positive");
  const auto len = static_cast<Eigen::Index>(dec_in.size());
  int x = tape.gather_rows(tape.leaf(params_.at("emb.tgt")), dec_in);
  x = tape.scale(x, std::sqrt(static_cast<double>(cfg_.model_dim)));

  nn::Mat pos = nn::Mat::Zero(len, cfg_.model_dim);
  for (Eigen::Index t = 0; t < len; ++t) {
    if (cfg_.use_ordinal_pe)
      pos.row(t) += emb::sinusoidal_pe(t, cfg_.model_dim, cfg_.max_position);
    if (cfg_.use_abs_pe) {
      // Cumulative frames saturate at the end of the table instead of failing.
      long long p = std::min<long long>(cumulative[static_cast<size_t>(t)],
                                        cfg_.max_position - 1);
      pos.row(t) += emb::sinusoidal_pe(p, cfg_.model_dim, cfg_.max_position);
    }
    if (cfg_.use_rel_pe) {
      long long q = emb::quantize_ratio(cumulative[static_cast<size_t>(t)], total,
                                        cfg_.quantization_level);
      pos.row(t) += emb::sinusoidal_pe(q, cfg_.model_dim, cfg_.max_position);
    }
  }
  x = tape.add(x, tape.constant(std::move(pos)));
  x = dropout(tape, x, train, rng);

  nn::Mat causal(len, len);
  for (Eigen::Index i = 0; i < len; ++i)
    for (Eigen::Index j = 0; j < len; ++j) causal(i, j) = j > i ? -1e9 : 0.0;
  for (int l = 0; l < cfg_.layers_dec; ++l) {
    std::string p = cat("dec.", l);
    x = attention(tape, x, x, p + ".self", p + ".ln1", &causal, train, rng);
    x = attention(tape, x, enc_out, p + ".cross", p + ".ln2", nullptr, train, rng);
    x = ffn_block(tape, x, p + ".ffn", p + ".ln3", train, rng);
  }

  DecoderOut out;
  out.hidden = x;
  out.logits = tape.add_rowvec(tape.matmul_nt(x, tape.leaf(params_.at("out.w"))),
                               tape.leaf(params_.at("out.b")));
  out.logdur = predictor_graph(tape, x, train, rng);
  return out;
}

SentenceGraph Transformer::build(nn::Tape& tape, const Example& ex, bool train,
                                 Rng* dropout_rng) const {
  require(!ex.tgt.empty(), "example has an empty target");
  require(ex.tgt_frames.size() == ex.tgt.size(), "target frames misaligned with target tokens");
  if (cfg_.verbosity_control)
    require(ex.bucket >= 0, "verbosity control needs a bucket token on every example");
  std::vector<int> src_ids =
      with_specials(ex.src, cfg_.verbosity_control ? ex.bucket : -1);
  int enc = encode_graph(tape, src_ids, train, dropout_rng);

  std::vector<int> dec_in;
  dec_in.reserve(ex.tgt.size() + 1);
  dec_in.push_back(Vocabulary::kBos);
  dec_in.insert(dec_in.end(), ex.tgt.begin(), ex.tgt.end());
  std::vector<long long> cum(dec_in.size(), 0);
  long long run = 0;
  for (size_t p = 1; p < dec_in.size(); ++p) {
    require(ex.tgt_frames[p - 1] >= 0, "negative frame count on a target token");
    run += ex.tgt_frames[p - 1];
    cum[p] = run;
  }
  long long total = std::max<long long>(1, run);
  DecoderOut out = decoder_graph(tape, enc, dec_in, cum, total, train, dropout_rng);

  SentenceGraph g;
  g.logits = out.logits;
  g.logdur = out.logdur;
  g.targets = ex.tgt;
  g.targets.push_back(Vocabulary::kEos);
  g.dur_targets = ex.tgt_frames;
  g.dur_targets.push_back(0);
  return g;
}

SentenceLoss Transformer::build_loss(nn::Tape& tape, const SentenceGraph& g,
                                     int denom) const {
  require(denom > 0, "loss denominator must be positive");
  require(g.targets.size() == g.dur_targets.size(), "loss targets misaligned");
  const auto len = static_cast<Eigen::Index>(g.targets.size());
  int ce = tape.ce_label_smooth_sum(g.logits, g.targets, cfg_.label_smoothing);

  nn::Mat target(len, 1);
  for (Eigen::Index p = 0; p < len; ++p) {
    long long frames = g.dur_targets[static_cast<size_t>(p)];
    require(frames >= 0, "negative gold frame count");
    target(p, 0) = std::log1p(static_cast<double>(frames));
  }
  int mse = tape.mse_sum(g.logdur, target, nn::Mat::Ones(len, 1));

  SentenceLoss out;
  out.ce_sum = tape.val(ce)(0, 0);
  out.mse_sum = tape.val(mse)(0, 0);
  out.positions = static_cast<int>(len);
  double inv = 1.0 / static_cast<double>(denom);
  out.total = tape.scale(ce, inv);
  if (cfg_.duration_loss_weight != 0.0)
    out.total = tape.add(out.total, tape.scale(mse, cfg_.duration_loss_weight * inv));
  return out;
}

Eigen::MatrixXd Transformer::encode(const std::vector<int>& src) const {
  nn::Tape tape;
  // Inference always conditions on the middle verbosity bucket.
  std::vector<int> ids =
      with_specials(src, cfg_.verbosity_control ? Vocabulary::kNormal : -1);
  int x = encode_graph(tape, ids, false, nullptr);
  return tape.val(x);
}

Transformer::StepOutput Transformer::decode_step(const Eigen::MatrixXd& encoder_out,
                                                 const std::vector<int>& emitted_tokens,
                                                 const std::vector<long long>& emitted_frames,
                                                 long long budget_frames) const {
  require(emitted_tokens.size() == emitted_frames.size(),
          "emitted frames misaligned with emitted tokens");
  nn::Tape tape;
  int enc = tape.constant(encoder_out);
  std::vector<int> dec_in;
  dec_in.reserve(emitted_tokens.size() + 1);
  dec_in.push_back(Vocabulary::kBos);
  dec_in.insert(dec_in.end(), emitted_tokens.begin(), emitted_tokens.end());
  std::vector<long long> cum(dec_in.size(), 0);
  long long run = 0;
  for (size_t p = 1; p < dec_in.size(); ++p) {
    require(emitted_frames[p - 1] >= 0, "negative emitted frame count");
    run += emitted_frames[p - 1];
    cum[p] = run;
  }
  long long total = std::max<long long>(1, budget_frames);
  DecoderOut out = decoder_graph(tape, enc, dec_in, cum, total, false, nullptr);

  const nn::Mat& logits = tape.val(out.logits);
  Eigen::RowVectorXd row = logits.row(logits.rows() - 1);
  double mx = row.maxCoeff();
  double lse = mx + std::log((row.array() - mx).exp().sum());
  StepOutput step;
  step.log_probs = (row.array() - lse).matrix();
  step.log_duration = tape.val(out.logdur)(logits.rows() - 1, 0);
  return step;
}

}  // namespace isomt::model
