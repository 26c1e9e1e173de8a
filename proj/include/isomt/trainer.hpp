#pragma once

#include <vector>

#include "isomt/model.hpp"

namespace isomt::model {

struct TrainOptions {
  int steps = 3000;
  int batch_size = 32;
  double lr_factor = 2.0;   // scales the inverse-sqrt schedule
  int warmup_steps = 400;
  int threads = 0;          // 0 picks the hardware concurrency
  int log_every = 50;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;

  void validate() const;
};

struct TrainLogRow {
  int step = 0;
  double lr = 0.0;
  double loss = 0.0;      // ce + weight * dur
  double ce = 0.0;        // batch-mean cross entropy per position
  double dur = 0.0;       // batch-mean squared log-duration error per position
};

// lr = factor * dim^-0.5 * min(step^-0.5, step * warmup^-1.5)
double noam_lr(double factor, int model_dim, int step, int warmup_steps);

// Batch SGD driver. Sentences of a batch get their own tapes and run on a
// small thread pool; gradients are then harvested sentence by sentence in
// index order, so results do not depend on the thread count.
class Trainer {
 public:
  Trainer(Transformer& model, TrainOptions opts);

  // One forward/backward/Adam update. Returns the batch statistics.
  TrainLogRow step(const std::vector<Example>& batch);

  // Runs opts.steps updates over reshuffled slices of the corpus and returns
  // the thinned log (first step, every log_every-th, last step).
  std::vector<TrainLogRow> fit(const std::vector<Example>& corpus);

  int steps_done() const { return t_; }

 private:
  void apply_adam(double lr);

  Transformer& model_;
  TrainOptions opts_;
  int t_ = 0;
  Rng order_rng_;
};

}  // namespace isomt::model
