#include <cmath>
#include <vector>

#include "doctest.h"
#include "isomt/decode.hpp"

using isomt::nn::Mat;
using isomt::tok::Vocabulary;
using namespace isomt::decode;
using isomt::model::Config;
using isomt::model::Transformer;

namespace {

Config tiny_config() {
  Config cfg;
  cfg.layers_enc = 1;
  cfg.layers_dec = 1;
  cfg.heads = 2;
  cfg.model_dim = 8;
  cfg.ffn_dim = 16;
  cfg.dropout = 0.0;
  cfg.vocab_size = 12;
  cfg.max_position = 4096;
  cfg.seed = 21;
  return cfg;
}

void zero_params(Transformer& m) {
  for (const auto& p : m.params().items()) p->value.setZero();
}

}  // namespace

TEST_CASE("length penalty normalization") {
  // Length 1 keeps the raw score: ((5 + 1) / 6)^alpha = 1.
  CHECK(length_penalized_score(-6.0, 1, 1.0) == -6.0);
  // Length 7 divides by 2.
  CHECK(length_penalized_score(-6.0, 7, 1.0) == doctest::Approx(-3.0).epsilon(1e-12));
  // Alpha 0 disables normalization.
  CHECK(length_penalized_score(-6.0, 7, 0.0) == -6.0);
}

TEST_CASE("option validation") {
  DecodeOptions opts;
  CHECK_THROWS_AS(opts.validate(), isomt::Error);  // budget unset
  opts.budget_frames = 10;
  opts.validate();
  opts.beam_size = 0;
  CHECK_THROWS_AS(opts.validate(), isomt::Error);
  opts.beam_size = 1;
  opts.length_penalty = -0.5;
  CHECK_THROWS_AS(opts.validate(), isomt::Error);
}

TEST_CASE("all-equal logits finish immediately on the EOS tie break") {
  // With every parameter zero all tokens tie, and the smallest admissible
  // token id is EOS, so the empty hypothesis wins at once.
  Transformer m(tiny_config());
  zero_params(m);
  DecodeOptions opts;
  opts.budget_frames = 100;
  Hypothesis h = translate_with_budget(m, {9, 10}, opts);
  CHECK(h.finished);
  CHECK(h.tokens.empty());
  CHECK(h.total_frames() == 0);
  CHECK(h.score == doctest::Approx(std::log(1.0 / 12.0)).epsilon(1e-9));
}

TEST_CASE("a model that never emits EOS runs out of tokens unfinished") {
  Transformer m(tiny_config());
  zero_params(m);
  m.params().at("out.b")->value(0, Vocabulary::kEos) = -1000.0;
  m.params().at("out.b")->value(0, 9) = 10.0;

  DecodeOptions opts;
  opts.budget_frames = 1000;
  opts.max_tokens = 4;
  Hypothesis h = translate_with_budget(m, {9}, opts);
  CHECK_FALSE(h.finished);
  CHECK(h.tokens == std::vector<int>{9, 9, 9, 9});
  // Zeroed predictor says exp(0) - 1 = 0 frames per token.
  CHECK(h.total_frames() == 0);
}

TEST_CASE("hard stop spends the budget and then forces EOS") {
  Transformer m(tiny_config());
  zero_params(m);
  m.params().at("out.b")->value(0, Vocabulary::kEos) = -1000.0;
  m.params().at("out.b")->value(0, 9) = 10.0;
  // Constant predictor output log 6 decodes to 5 frames per token.
  m.params().at("dur.out.b")->value(0, 0) = std::log(6.0);

  DecodeOptions opts;
  opts.budget_frames = 12;
  opts.hard_stop = true;
  opts.max_tokens = 50;
  Hypothesis h = translate_with_budget(m, {9}, opts);
  // 0+5 < 12 and 5+5 < 12 pass; 10+5 < 12 fails, so exactly two tokens fit.
  CHECK(h.finished);
  CHECK(h.tokens == std::vector<int>{9, 9});
  CHECK(h.frames == std::vector<long long>{5, 5});
  CHECK(h.total_frames() == 10);

  // A one-frame budget leaves no room at all.
  opts.budget_frames = 1;
  Hypothesis empty = translate_with_budget(m, {9}, opts);
  CHECK(empty.finished);
  CHECK(empty.tokens.empty());
}

TEST_CASE("soft decoding ignores the budget when predicting tokens") {
  Transformer m(tiny_config());
  zero_params(m);
  m.params().at("out.b")->value(0, Vocabulary::kEos) = -1000.0;
  m.params().at("out.b")->value(0, 9) = 10.0;
  m.params().at("dur.out.b")->value(0, 0) = std::log(6.0);

  DecodeOptions opts;
  opts.budget_frames = 12;
  opts.hard_stop = false;
  opts.max_tokens = 5;
  Hypothesis h = translate_with_budget(m, {9}, opts);
  CHECK(h.tokens.size() == 5);       // sails past the budget
  CHECK(h.total_frames() == 25);
}

TEST_CASE("beam retires the EOS path greedy walks past") {
  Transformer m(tiny_config());
  zero_params(m);
  m.params().at("out.b")->value(0, 9) = 2.0;
  m.params().at("out.b")->value(0, 10) = 1.0;
  m.params().at("out.b")->value(0, Vocabulary::kEos) = 1.5;
  // Static distribution: log probs are out.b minus its log-sum-exp, the same
  // at every step. EOS sits between the top token and the rest.
  double lse = std::log(std::exp(2.0) + std::exp(1.5) + std::exp(1.0) + 9.0);

  DecodeOptions greedy;
  greedy.budget_frames = 100;
  greedy.max_tokens = 6;
  Hypothesis hg = translate_with_budget(m, {9, 10}, greedy);
  // Greedy follows the argmax, which is never EOS, so it runs out the cap.
  CHECK(hg.tokens == std::vector<int>(6, 9));
  CHECK_FALSE(hg.finished);
  CHECK(hg.score == doctest::Approx(6.0 * (2.0 - lse)).epsilon(1e-12));

  DecodeOptions beam = greedy;
  beam.beam_size = 4;
  Hypothesis hb = translate_with_budget(m, {9, 10}, beam);
  // The empty hypothesis finishes on step one and wins after normalization:
  // (1.5 - lse) / (5/6) beats every all-9 continuation.
  CHECK(hb.tokens.empty());
  CHECK(hb.finished);
  CHECK(hb.score == doctest::Approx(1.5 - lse).epsilon(1e-12));
}

TEST_CASE("decoding is deterministic for a real model") {
  Transformer m(tiny_config());
  DecodeOptions opts;
  opts.budget_frames = 40;
  opts.beam_size = 3;
  opts.hard_stop = true;
  opts.max_tokens = 16;
  Hypothesis a = translate_with_budget(m, {9, 10, 11}, opts);
  Hypothesis b = translate_with_budget(m, {9, 10, 11}, opts);
  CHECK(a.tokens == b.tokens);
  CHECK(a.frames == b.frames);
  CHECK(a.score == b.score);
  CHECK(a.tokens.size() == a.frames.size());
  CHECK(a.tokens.size() <= 16);
  for (int t : a.tokens) {
    CHECK(t != Vocabulary::kPad);
    CHECK(t != Vocabulary::kBos);
    CHECK(t != Vocabulary::kEos);
  }
}

TEST_CASE("the consumed budget feeds back into the next step") {
  Transformer m(tiny_config());
  Eigen::MatrixXd enc = m.encode({9, 10});
  // Same prefix, same frames, different remaining budget: the quantized
  // ratio bucket differs (floor(5*10/20)=2 vs floor(5*10/1000)=0), so the
  // distribution must differ.
  auto tight = m.decode_step(enc, {9}, {10}, 20);
  auto loose = m.decode_step(enc, {9}, {10}, 1000);
  CHECK((tight.log_probs - loose.log_probs).cwiseAbs().maxCoeff() > 0.0);

  // With the relative term disabled the budget is invisible.
  Config blind = tiny_config();
  blind.use_rel_pe = false;
  Transformer mb(blind);
  Eigen::MatrixXd enc_b = mb.encode({9, 10});
  auto t2 = mb.decode_step(enc_b, {9}, {10}, 20);
  auto l2 = mb.decode_step(enc_b, {9}, {10}, 1000);
  CHECK((t2.log_probs - l2.log_probs).cwiseAbs().maxCoeff() == 0.0);
}
