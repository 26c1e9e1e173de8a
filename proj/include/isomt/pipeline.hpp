#pragma once

#include <string>

#include "isomt/harness.hpp"

namespace isomt::pipeline {

// Each cmd_* implements one CLI subcommand: load inputs, run the core
// operation, write artifacts. All failures surface as isomt::Error.

struct PrepareArgs {
  std::string grids_dir;      // holds <id>.src.TextGrid / <id>.tgt.TextGrid pairs
  std::string out_corpus;
  std::string out_phonemes;   // optional, target-side phoneme tracks
  std::string words_tier = "words";
  std::string phones_tier = "phones";
  double fps = 80.0;
};
void cmd_prepare(const PrepareArgs& args);

struct GenToyArgs {
  harness::ToyCorpusSpec spec;
  int test_size = 500;
  std::string out_dir;  // writes train.jsonl and test.jsonl
};
void cmd_gen_toy(const GenToyArgs& args);

struct TrainArgs {
  std::string corpus;
  std::string out_dir;  // config.json, vocab.txt, merges.txt, model.bin, meta.json, train_log.csv
  model::Config config;            // vocab_size is filled from the data
  model::TrainOptions train;
  int bpe_merges = 0;
  std::string attribution = "final";  // or "uniform"
};
void cmd_train(const TrainArgs& args);

struct TranslateArgs {
  std::string model_dir;
  std::string corpus;
  std::string out_hyps;
  decode::DecodeOptions decode;  // budget_frames is taken per sentence
  double budget_scale = 1.0;
  int threads = 0;
};
void cmd_translate(const TranslateArgs& args);

struct EvaluateArgs {
  std::string corpus;
  std::string hyps;
  std::string out_report;  // JSON
};
void cmd_evaluate(const EvaluateArgs& args);

struct AdjustArgs {
  std::string phonemes;
  std::string out_phonemes;
};
void cmd_adjust(const AdjustArgs& args);

struct AblateArgs {
  std::string train_corpus;
  std::string test_corpus;
  std::string out_dir;  // ablation.tsv and ablation.json
  model::Config base;
  model::TrainOptions train;
  decode::DecodeOptions decode;
  int bpe_merges = 0;
};
void cmd_ablate(const AblateArgs& args);

}  // namespace isomt::pipeline
