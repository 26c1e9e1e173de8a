#include <CLI11.hpp>
#include <iostream>

#include "isomt/pipeline.hpp"

namespace {

// Model switches shared by train and ablate.
struct ModelFlags {
  bool no_ordinal_pe = false;
  bool no_abs_pe = false;
  bool no_rel_pe = false;
  bool no_pauses = false;
  bool verbosity = false;
};

void add_model_options(CLI::App* cmd, isomt::model::Config& cfg, ModelFlags& flags) {
  cmd->add_option("--layers-enc", cfg.layers_enc, "encoder layers");
  cmd->add_option("--layers-dec", cfg.layers_dec, "decoder layers");
  cmd->add_option("--heads", cfg.heads, "attention heads");
  cmd->add_option("--dim", cfg.model_dim, "model width");
  cmd->add_option("--ffn", cfg.ffn_dim, "feed forward width");
  cmd->add_option("--dropout", cfg.dropout, "dropout rate");
  cmd->add_option("--label-smoothing", cfg.label_smoothing, "label smoothing mass");
  cmd->add_option("--dur-weight", cfg.duration_loss_weight, "duration loss weight");
  cmd->add_option("--quant-level", cfg.quantization_level,
                  "buckets for the consumed-budget ratio");
  cmd->add_option("--max-position", cfg.max_position, "positional table size");
  cmd->add_option("--seed", cfg.seed, "init / shuffle / dropout seed");
  cmd->add_flag("--no-ordinal-pe", flags.no_ordinal_pe, "drop ordinary positions");
  cmd->add_flag("--no-abs-pe", flags.no_abs_pe, "drop consumed-frames positions");
  cmd->add_flag("--no-rel-pe", flags.no_rel_pe, "drop budget-ratio positions");
  cmd->add_flag("--no-pauses", flags.no_pauses, "strip pause tokens");
  cmd->add_flag("--verbosity", flags.verbosity,
                "length-bucket control token instead of duration positions");
}

void apply_model_flags(isomt::model::Config& cfg, const ModelFlags& flags) {
  if (flags.no_ordinal_pe) cfg.use_ordinal_pe = false;
  if (flags.no_abs_pe) cfg.use_abs_pe = false;
  if (flags.no_rel_pe) cfg.use_rel_pe = false;
  if (flags.no_pauses) cfg.use_pause_tokens = false;
  if (flags.verbosity) {
    cfg.verbosity_control = true;
    cfg.use_abs_pe = false;
    cfg.use_rel_pe = false;
  }
}

void add_train_options(CLI::App* cmd, isomt::model::TrainOptions& t) {
  cmd->add_option("--steps", t.steps, "optimizer steps");
  cmd->add_option("--batch", t.batch_size, "sentences per step");
  cmd->add_option("--lr-factor", t.lr_factor, "schedule scale");
  cmd->add_option("--warmup", t.warmup_steps, "warmup steps");
  cmd->add_option("--threads", t.threads, "worker threads, 0 = auto");
  cmd->add_option("--log-every", t.log_every, "training log stride");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech-duration aware translation pipeline"};
  app.require_subcommand(1);
  // Option defaults can come from an ini file with one [subcommand] section
  // per command; explicit flags always win. Fallthrough lets --config sit
  // after the subcommand name.
  app.set_config("--config", "", "ini file with [subcommand] option defaults");
  auto subcommand = [&app](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    return sub;
  };

  auto* gen = subcommand("gen-toy", "write a synthetic alignment corpus");
  isomt::pipeline::GenToyArgs gen_args;
  gen->add_option("--out", gen_args.out_dir, "output directory")->required();
  gen->add_option("--size", gen_args.spec.corpus_size, "total sentences");
  gen->add_option("--test-size", gen_args.test_size, "sentences held out for test");
  gen->add_option("--seed", gen_args.spec.seed, "corpus seed");
  gen->add_option("--vocab", gen_args.spec.vocab_size, "letter count");
  gen->add_option("--min-len", gen_args.spec.min_len, "shortest sentence");
  gen->add_option("--max-len", gen_args.spec.max_len, "longest sentence");
  gen->add_option("--max-pause", gen_args.spec.max_pause, "largest inter-word pause");
  gen->add_option("--jitter", gen_args.spec.budget_jitter, "source budget jitter");
  gen->callback([&] { isomt::pipeline::cmd_gen_toy(gen_args); });

  auto* prep = subcommand("prepare", "turn aligned TextGrid pairs into a corpus");
  isomt::pipeline::PrepareArgs prep_args;
  prep->add_option("--grids", prep_args.grids_dir, "directory of grid pairs")->required();
  prep->add_option("--out", prep_args.out_corpus, "output corpus")->required();
  prep->add_option("--phonemes-out", prep_args.out_phonemes, "target phoneme tracks");
  prep->add_option("--words-tier", prep_args.words_tier, "word tier name");
  prep->add_option("--phones-tier", prep_args.phones_tier, "phoneme tier name");
  prep->add_option("--fps", prep_args.fps, "frames per second");
  prep->callback([&] { isomt::pipeline::cmd_prepare(prep_args); });

  auto* train = subcommand("train", "train a model on a corpus");
  isomt::pipeline::TrainArgs train_args;
  ModelFlags train_flags;
  train->add_option("--corpus", train_args.corpus, "training corpus")->required();
  train->add_option("--out", train_args.out_dir, "model directory")->required();
  train->add_option("--merges", train_args.bpe_merges, "subword merges to learn");
  train->add_option("--attribution", train_args.attribution,
                    "word frames on the final subword or spread uniformly")
      ->check(CLI::IsMember({"final", "uniform"}));
  add_train_options(train, train_args.train);
  add_model_options(train, train_args.config, train_flags);
  train->callback([&] {
    apply_model_flags(train_args.config, train_flags);
    isomt::pipeline::cmd_train(train_args);
  });

  auto* tr = subcommand("translate", "decode a corpus under its frame budgets");
  isomt::pipeline::TranslateArgs tr_args;
  tr->add_option("--model", tr_args.model_dir, "model directory")->required();
  tr->add_option("--corpus", tr_args.corpus, "input corpus")->required();
  tr->add_option("--out", tr_args.out_hyps, "output hypotheses")->required();
  tr->add_option("--beam", tr_args.decode.beam_size, "beam size");
  tr->add_option("--max-tokens", tr_args.decode.max_tokens, "token cap per sentence");
  tr->add_flag("--hard-stop", tr_args.decode.hard_stop,
               "forbid tokens that would cross the budget");
  tr->add_option("--length-penalty", tr_args.decode.length_penalty,
                 "final selection length penalty");
  tr->add_option("--budget-scale", tr_args.budget_scale,
                 "budget = scale * source speech frames");
  tr->add_option("--threads", tr_args.threads, "worker threads, 0 = auto");
  tr->callback([&] { isomt::pipeline::cmd_translate(tr_args); });

  auto* ev = subcommand("evaluate", "score hypotheses against a corpus");
  isomt::pipeline::EvaluateArgs ev_args;
  ev->add_option("--corpus", ev_args.corpus, "reference corpus")->required();
  ev->add_option("--hyps", ev_args.hyps, "hypothesis file")->required();
  ev->add_option("--out", ev_args.out_report, "report JSON")->required();
  ev->callback([&] { isomt::pipeline::cmd_evaluate(ev_args); });

  auto* adj = subcommand("adjust", "stretch phoneme tracks onto their budgets");
  isomt::pipeline::AdjustArgs adj_args;
  adj->add_option("--in", adj_args.phonemes, "phoneme tracks")->required();
  adj->add_option("--out", adj_args.out_phonemes, "adjusted tracks")->required();
  adj->callback([&] { isomt::pipeline::cmd_adjust(adj_args); });

  auto* abl = subcommand("ablate", "train and score the control ablations");
  isomt::pipeline::AblateArgs abl_args;
  ModelFlags abl_flags;
  abl->add_option("--train-corpus", abl_args.train_corpus, "training corpus")->required();
  abl->add_option("--test-corpus", abl_args.test_corpus, "test corpus")->required();
  abl->add_option("--out", abl_args.out_dir, "output directory")->required();
  abl->add_option("--merges", abl_args.bpe_merges, "subword merges to learn");
  abl->add_option("--beam", abl_args.decode.beam_size, "beam size");
  add_train_options(abl, abl_args.train);
  add_model_options(abl, abl_args.base, abl_flags);
  abl->callback([&] {
    apply_model_flags(abl_args.base, abl_flags);
    isomt::pipeline::cmd_ablate(abl_args);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const isomt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
