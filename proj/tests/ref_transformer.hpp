#pragma once

// Plain Eigen forward pass of the vanilla translation path: ordinal positions
// only, no pause or duration machinery. Every step materializes the same
// intermediate matrices as the tape ops, so logits compare bit for bit.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "isomt/model.hpp"

namespace ref {

using Mat = Eigen::MatrixXd;
using isomt::model::Transformer;
using isomt::nn::ParamStore;

inline Mat softmax_rows(Mat z, const Mat* mask) {
  if (mask != nullptr) z += *mask;
  Mat y(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    double m = z.row(r).maxCoeff();
    Eigen::RowVectorXd e = (z.row(r).array() - m).exp().matrix();
    y.row(r) = e / e.sum();
  }
  return y;
}

inline Mat layer_norm(const Mat& x, const Mat& gain, const Mat& bias) {
  const double eps = 1e-6;
  Mat xhat(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().mean();
    double inv = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mu) * inv;
  }
  Mat out = (xhat.array().rowwise() * gain.row(0).array()).matrix();
  out.rowwise() += bias.row(0);
  return out;
}

inline Mat attention(const ParamStore& P, const std::string& ap, const std::string& lp,
                     const Mat& x, const Mat& kv, const Mat* mask, int heads) {
  Mat q = x * P.at(ap + ".wq")->value;
  q.rowwise() += P.at(ap + ".bq")->value.row(0);
  Mat k = kv * P.at(ap + ".wk")->value;
  k.rowwise() += P.at(ap + ".bk")->value.row(0);
  Mat v = kv * P.at(ap + ".wv")->value;
  v.rowwise() += P.at(ap + ".bv")->value.row(0);
  const auto dh = q.cols() / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat ctx(x.rows(), q.cols());
  Eigen::Index off = 0;
  for (int h = 0; h < heads; ++h) {
    Mat qh = q.middleCols(h * dh, dh);
    Mat kh = k.middleCols(h * dh, dh);
    Mat vh = v.middleCols(h * dh, dh);
    Mat scores = (qh * kh.transpose()) * inv_sqrt;
    Mat probs = softmax_rows(std::move(scores), mask);
    Mat ctx_h = probs * vh;
    ctx.middleCols(off, dh) = ctx_h;
    off += dh;
  }
  Mat proj = ctx * P.at(ap + ".wo")->value;
  proj.rowwise() += P.at(ap + ".bo")->value.row(0);
  Mat res = x + proj;
  return layer_norm(res, P.at(lp + ".g")->value, P.at(lp + ".b")->value);
}

inline Mat ffn(const ParamStore& P, const std::string& fp, const std::string& lp,
               const Mat& x) {
  Mat h1 = x * P.at(fp + ".w1")->value;
  h1.rowwise() += P.at(fp + ".b1")->value.row(0);
  h1 = h1.cwiseMax(0.0);
  Mat h2 = h1 * P.at(fp + ".w2")->value;
  h2.rowwise() += P.at(fp + ".b2")->value.row(0);
  Mat res = x + h2;
  return layer_norm(res, P.at(lp + ".g")->value, P.at(lp + ".b")->value);
}

// The encoder path assigns PE rows directly; the decoder path sums into a
// zero matrix. Both are mirrored so the bits match either way.
inline Mat encoder_positions(const isomt::model::Config& cfg, Eigen::Index len) {
  Mat pos(len, cfg.model_dim);
  for (Eigen::Index t = 0; t < len; ++t)
    pos.row(t) = isomt::emb::sinusoidal_pe(t, cfg.model_dim, cfg.max_position);
  return pos;
}

inline Mat decoder_positions(const isomt::model::Config& cfg, Eigen::Index len) {
  Mat pos = Mat::Zero(len, cfg.model_dim);
  for (Eigen::Index t = 0; t < len; ++t)
    pos.row(t) += isomt::emb::sinusoidal_pe(t, cfg.model_dim, cfg.max_position);
  return pos;
}

inline Mat encode(const Transformer& m, const std::vector<int>& src_ids) {
  const ParamStore& P = m.params();
  const auto& cfg = m.config();
  const Mat& emb = P.at("emb.src")->value;
  Mat x(static_cast<Eigen::Index>(src_ids.size()), cfg.model_dim);
  for (size_t i = 0; i < src_ids.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = emb.row(src_ids[i]);
  x = x * std::sqrt(static_cast<double>(cfg.model_dim));
  x = x + encoder_positions(cfg, x.rows());
  for (int l = 0; l < cfg.layers_enc; ++l) {
    std::string p = isomt::cat("enc.", l);
    x = attention(P, p + ".self", p + ".ln1", x, x, nullptr, cfg.heads);
    x = ffn(P, p + ".ffn", p + ".ln2", x);
  }
  return x;
}

inline Mat decode_logits(const Transformer& m, const Mat& enc_out,
                         const std::vector<int>& dec_in) {
  const ParamStore& P = m.params();
  const auto& cfg = m.config();
  const Mat& emb = P.at("emb.tgt")->value;
  const auto len = static_cast<Eigen::Index>(dec_in.size());
  Mat x(len, cfg.model_dim);
  for (size_t i = 0; i < dec_in.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = emb.row(dec_in[i]);
  x = x * std::sqrt(static_cast<double>(cfg.model_dim));
  x = x + decoder_positions(cfg, len);

  Mat causal(len, len);
  for (Eigen::Index i = 0; i < len; ++i)
    for (Eigen::Index j = 0; j < len; ++j) causal(i, j) = j > i ? -1e9 : 0.0;
  for (int l = 0; l < cfg.layers_dec; ++l) {
    std::string p = isomt::cat("dec.", l);
    x = attention(P, p + ".self", p + ".ln1", x, x, &causal, cfg.heads);
    x = attention(P, p + ".cross", p + ".ln2", x, enc_out, nullptr, cfg.heads);
    x = ffn(P, p + ".ffn", p + ".ln3", x);
  }
  Mat logits = x * P.at("out.w")->value.transpose();
  logits.rowwise() += P.at("out.b")->value.row(0);
  return logits;
}

}  // namespace ref
