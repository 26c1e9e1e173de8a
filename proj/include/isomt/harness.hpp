#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isomt/bpe.hpp"
#include "isomt/corpus.hpp"
#include "isomt/decode.hpp"
#include "isomt/metrics.hpp"
#include "isomt/trainer.hpp"

namespace isomt::harness {

// Verbosity buckets over target/source duration ratios: nearest-rank
// terciles of the training distribution. Degenerate distributions fall back
// to the fixed pair (0.95, 1.05).
std::pair<double, double> bucket_thresholds(std::vector<double> ratios);

// Maps a ratio to a bucket token id; values on a threshold go to the lower
// bucket.
int bucket_of(double ratio, double t_low, double t_high);

// Inserts a control token right after BOS.
std::vector<int> prepend_control_token(std::vector<int> ids_with_bos, int control_token);

// Synthetic alignment corpus: the target is a fixed letter relabeling of the
// source, each letter naturally costs its alphabet rank in frames, and
// inter-word pauses follow a per-sentence tempo with small jitter. The
// rendition starts at natural pace and adjusts linearly to land exactly on
// the source duration, the way a dubber corrects drift on the fly, so late
// words carry most of the correction and the pace is only observable through
// the duration embeddings.
struct ToyCorpusSpec {
  int vocab_size = 20;    // letters, a upward
  int corpus_size = 10000;
  int min_len = 3;
  int max_len = 12;
  int max_pause = 4;          // frames, per word gap
  double budget_jitter = 0.3; // source duration is u * natural total, u in 1 +- this
  uint64_t seed = 13;

  void validate() const;
};

tok::Vocabulary toy_vocabulary(int vocab_size = 20);
std::vector<data::CorpusRecord> generate_toy_corpus(const ToyCorpusSpec& spec);

// Shared corpus-to-model plumbing.
tok::MergeTable merges_from(const std::vector<data::CorpusRecord>& records, int max_merges);
tok::Vocabulary vocabulary_from(const std::vector<data::CorpusRecord>& records,
                                const tok::MergeTable& merges);
model::Example make_example(const data::CorpusRecord& rec, const tok::Vocabulary& vocab,
                            const tok::MergeTable& merges, bool use_pause_tokens,
                            tok::Attribution attribution, int bucket = -1);

// Decodes a whole corpus, one budget per sentence: budget_scale times the
// source speech frames. Sentences run on a small thread pool; outputs keep
// corpus order.
std::vector<data::HypRecord> translate_corpus(const model::Transformer& m,
                                              const std::vector<data::CorpusRecord>& records,
                                              const tok::Vocabulary& vocab,
                                              const tok::MergeTable& merges,
                                              const decode::DecodeOptions& base_opts,
                                              double budget_scale, int threads);

struct EvalSummary {
  int count = 0;
  metrics::BleuBreakdown bleu;
  double slc_01 = 0.0;
  double slc_02 = 0.0;
  double slc_03 = 0.0;
  double mean_ratio = 0.0;    // hypothesis frames over source frames
  double mean_abs_dev = 0.0;  // mean |ratio - 1|, length-control error
  int unfinished = 0;
};

// Joins hypotheses to corpus records by id and scores them.
EvalSummary evaluate_hyps(const std::vector<data::CorpusRecord>& records,
                          const std::vector<data::HypRecord>& hyps);

struct AblationVariant {
  std::string name;
  model::Config config;
};

// full model plus the three control ablations, all sharing the base
// architecture and seed.
std::vector<AblationVariant> standard_variants(const model::Config& base);

struct AblationOptions {
  model::TrainOptions train;
  decode::DecodeOptions decode;  // budget_frames is taken per sentence
  tok::Attribution attribution = tok::Attribution::kFinalSubword;
  int bpe_merges = 0;
};

struct AblationRow {
  std::string name;
  double bleu = 0.0;
  double slc_02 = 0.0;        // percent of ratios within 20 percent of budget
  double mean_ratio = 0.0;    // mean predicted-frames / budget
  double mean_abs_dev = 0.0;  // mean |ratio - 1|
  int unfinished = 0;
};

std::vector<AblationRow> run_ablation(const std::vector<data::CorpusRecord>& train_set,
                                      const std::vector<data::CorpusRecord>& test_set,
                                      const std::vector<AblationVariant>& variants,
                                      const AblationOptions& opts);

std::string ablation_tsv(const std::vector<AblationRow>& rows);

}  // namespace isomt::harness
