#include "isomt/trainer.hpp"

#include <cmath>
#include <memory>
#include <thread>

namespace isomt::model {

void TrainOptions::validate() const {
  require(steps >= 1, "steps must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(lr_factor > 0.0, "lr_factor must be positive");
  require(warmup_steps >= 1, "warmup_steps must be positive");
  require(threads >= 0, "threads must be non-negative");
  require(log_every >= 1, "log_every must be positive");
  require(adam_beta1 > 0.0 && adam_beta1 < 1.0, "adam_beta1 out of range");
  require(adam_beta2 > 0.0 && adam_beta2 < 1.0, "adam_beta2 out of range");
  require(adam_eps > 0.0, "adam_eps must be positive");
}

double noam_lr(double factor, int model_dim, int step, int warmup_steps) {
  require(step >= 1, "schedule step must be positive");
  double s = static_cast<double>(step);
  double w = static_cast<double>(warmup_steps);
  return factor / std::sqrt(static_cast<double>(model_dim)) *
         std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

Trainer::Trainer(Transformer& model, TrainOptions opts)
    : model_(model), opts_(opts), order_rng_(Rng(model.config().seed).fork("order")) {
  opts_.validate();
}

TrainLogRow Trainer::step(const std::vector<Example>& batch) {
  require(!batch.empty(), "empty batch");
  ++t_;

  // Sentences with no target carry no supervision and are skipped whole, so
  // they contribute exactly zero to the loss and the gradient.
  std::vector<const Example*> live;
  int denom = 0;
  for (const Example& ex : batch) {
    if (ex.tgt.empty()) continue;
    live.push_back(&ex);
    denom += static_cast<int>(ex.tgt.size()) + 1;  // EOS position included
  }
  require(denom > 0, "batch has no target positions");

  struct SentenceWork {
    std::unique_ptr<nn::Tape> tape;
    SentenceLoss loss;
  };
  std::vector<SentenceWork> work(live.size());
  const uint64_t seed = model_.config().seed;
  const int step_no = t_;
  auto run_one = [&](size_t i) {
    auto tape = std::make_unique<nn::Tape>();
    Rng drop = Rng(seed).fork(cat("drop.", step_no, ".", i));
    SentenceGraph g = model_.build(*tape, *live[i], true, &drop);
    SentenceLoss loss = model_.build_loss(*tape, g, denom);
    tape->backward(loss.total);
    work[i] = SentenceWork{std::move(tape), loss};
  };

  int threads = opts_.threads > 0 ? opts_.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(live.size())));
  if (threads == 1) {
    for (size_t i = 0; i < live.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (size_t i = static_cast<size_t>(w); i < live.size();
             i += static_cast<size_t>(threads))
          run_one(i);
      });
    for (auto& th : pool) th.join();
  }

  // Harvest in sentence order on one thread: float64 accumulation order, and
  // with it the update, is then independent of the thread count.
  double ce_sum = 0.0;
  double mse_sum = 0.0;
  for (auto& w : work) {
    w.tape->add_param_grads_to(1.0);
    ce_sum += w.loss.ce_sum;
    mse_sum += w.loss.mse_sum;
    w.tape.reset();
  }

  TrainLogRow row;
  row.step = t_;
  row.lr = noam_lr(opts_.lr_factor, model_.config().model_dim, t_, opts_.warmup_steps);
  row.ce = ce_sum / denom;
  row.dur = mse_sum / denom;
  row.loss = row.ce + model_.config().duration_loss_weight * row.dur;
  require(std::isfinite(row.loss), "loss diverged at step ", t_);

  apply_adam(row.lr);
  return row;
}

void Trainer::apply_adam(double lr) {
  const double b1 = opts_.adam_beta1;
  const double b2 = opts_.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, t_);
  const double bc2 = 1.0 - std::pow(b2, t_);
  for (const auto& p : model_.params().items()) {
    require(p->grad.allFinite(), "gradient diverged in ", p->name, " at step ", t_);
    p->adam_m = b1 * p->adam_m + (1.0 - b1) * p->grad;
    p->adam_v = b2 * p->adam_v + (1.0 - b2) * p->grad.cwiseProduct(p->grad);
    nn::Mat m_hat = p->adam_m / bc1;
    nn::Mat v_hat = p->adam_v / bc2;
    p->value.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + opts_.adam_eps);
    p->grad.setZero();
  }
}

std::vector<TrainLogRow> Trainer::fit(const std::vector<Example>& corpus) {
  require(!corpus.empty(), "empty training corpus");
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto reshuffle = [&] {
    for (size_t i = order.size(); i > 1; --i) {
      auto j = static_cast<size_t>(
          order_rng_.uniform_int(0, static_cast<long long>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
  };
  reshuffle();

  std::vector<TrainLogRow> log;
  size_t cursor = 0;
  std::vector<Example> batch;
  for (int s = 0; s < opts_.steps; ++s) {
    batch.clear();
    for (int k = 0; k < opts_.batch_size; ++k) {
      if (cursor == order.size()) {
        reshuffle();
        cursor = 0;
      }
      batch.push_back(corpus[order[cursor++]]);
    }
    TrainLogRow row = step(batch);
    if (row.step == 1 || row.step % opts_.log_every == 0 || row.step == opts_.steps)
      log.push_back(row);
  }
  return log;
}

}  // namespace isomt::model
