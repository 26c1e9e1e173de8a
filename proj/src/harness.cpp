#include "isomt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace isomt::harness {

using tok::Vocabulary;

std::pair<double, double> bucket_thresholds(std::vector<double> ratios) {
  require(!ratios.empty(), "no ratios to bucket");
  std::sort(ratios.begin(), ratios.end());
  auto n = ratios.size();
  double t_low = ratios[(n + 2) / 3 - 1];        // nearest-rank 1/3 quantile
  double t_high = ratios[(2 * n + 2) / 3 - 1];   // nearest-rank 2/3 quantile
  if (t_low == t_high) return {0.95, 1.05};
  return {t_low, t_high};
}

int bucket_of(double ratio, double t_low, double t_high) {
  require(t_low <= t_high, "bucket thresholds out of order");
  if (ratio <= t_low) return Vocabulary::kShort;
  if (ratio <= t_high) return Vocabulary::kNormal;
  return Vocabulary::kLong;
}

std::vector<int> prepend_control_token(std::vector<int> ids_with_bos, int control_token) {
  require(!ids_with_bos.empty() && ids_with_bos.front() == Vocabulary::kBos,
          "control token goes after BOS, input must start with it");
  require(control_token == Vocabulary::kShort || control_token == Vocabulary::kNormal ||
              control_token == Vocabulary::kLong,
          "not a verbosity control token: ", control_token);
  ids_with_bos.insert(ids_with_bos.begin() + 1, control_token);
  return ids_with_bos;
}

void ToyCorpusSpec::validate() const {
  require(vocab_size >= 2 && vocab_size <= 26, "toy vocab must use 2..26 letters");
  require(corpus_size >= 1, "corpus_size must be positive");
  require(min_len >= 1 && min_len <= max_len, "bad sentence length range");
  require(max_pause >= 0, "max_pause must be non-negative");
  // The pace ramp ends at 2u-1 times natural speed, so u below 1/2 would ask
  // for negative durations.
  require(budget_jitter >= 0.0 && budget_jitter <= 0.5,
          "budget_jitter must lie in [0, 0.5]");
}

tok::Vocabulary toy_vocabulary(int vocab_size) {
  require(vocab_size >= 2 && vocab_size <= 26, "toy vocab must use 2..26 letters");
  Vocabulary v;
  for (int k = 0; k < vocab_size; ++k)
    v.add(std::string(1, static_cast<char>('a' + k)));
  return v;
}

namespace {

// Rounds nonnegative real weights onto an exact integer total, largest
// fractional remainders served first, earlier entries breaking ties.
std::vector<long long> apportion(const std::vector<double>& weight, long long total) {
  std::vector<long long> out(weight.size());
  std::vector<std::pair<double, size_t>> frac(weight.size());
  long long used = 0;
  for (size_t i = 0; i < weight.size(); ++i) {
    double w = std::max(0.0, weight[i]);
    auto base = static_cast<long long>(std::floor(w));
    out[i] = base;
    used += base;
    frac[i] = {w - static_cast<double>(base), i};
  }
  std::stable_sort(frac.begin(), frac.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; used < total; ++used, ++k) ++out[frac[k % frac.size()].second];
  return out;
}

}  // namespace

std::vector<data::CorpusRecord> generate_toy_corpus(const ToyCorpusSpec& spec) {
  spec.validate();
  Rng root(spec.seed);

  // Fixed letter relabeling shared by the whole corpus.
  std::vector<int> perm(static_cast<size_t>(spec.vocab_size));
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  Rng perm_rng = root.fork("perm");
  for (size_t i = perm.size(); i > 1; --i) {
    auto j = static_cast<size_t>(perm_rng.uniform_int(0, static_cast<int64_t>(i) - 1));
    std::swap(perm[i - 1], perm[j]);
  }

  Rng rng = root.fork("data");
  std::vector<data::CorpusRecord> out;
  out.reserve(static_cast<size_t>(spec.corpus_size));
  for (int s = 0; s < spec.corpus_size; ++s) {
    int len = static_cast<int>(rng.uniform_int(spec.min_len, spec.max_len));
    data::CorpusRecord rec;
    rec.id = cat("toy-", s);

    std::vector<int> src_ids(static_cast<size_t>(len));
    for (int& id : src_ids)
      id = static_cast<int>(rng.uniform_int(0, spec.vocab_size - 1));

    // Pause track: a per-sentence tempo, jittered one frame either way per
    // gap with probability 1/4 each.
    auto tempo = rng.uniform_int(0, spec.max_pause);
    std::vector<long long> pauses(static_cast<size_t>(std::max(0, len - 1)));
    for (long long& p : pauses) {
      double u = rng.unit();
      long long jitter = u < 0.25 ? -1 : u < 0.75 ? 0 : 1;
      p = std::clamp<long long>(tempo + jitter, 0, spec.max_pause);
    }

    long long natural_total = 0;
    std::vector<long long> track;  // words and pauses interleaved
    for (int i = 0; i < len; ++i) {
      int id = src_ids[static_cast<size_t>(i)];
      int t = perm[static_cast<size_t>(id)];
      rec.src_words.emplace_back(1, static_cast<char>('a' + id));
      rec.tgt_words.emplace_back(1, static_cast<char>('a' + t));
      track.push_back(t + 1);  // a speaks 1 frame, b 2, ...
      natural_total += t + 1;
      if (i + 1 < len) {
        track.push_back(pauses[static_cast<size_t>(i)]);
        natural_total += pauses[static_cast<size_t>(i)];
      }
    }

    // The pair mimics dubbing data: the speaker starts at natural pace and
    // adjusts linearly over the sentence to land exactly on the source
    // duration, so late words carry most of the correction and the tempo is
    // only observable through the duration embeddings. With the pace factor
    // taken at each entry's mass centroid, kappa = 2*total/natural - 1 makes
    // the ramped track sum to the budget exactly.
    double u = rng.uniform(1.0 - spec.budget_jitter, 1.0 + spec.budget_jitter);
    long long total = std::max<long long>(
        len, std::llround(u * static_cast<double>(natural_total)));
    double kappa =
        2.0 * static_cast<double>(total) / static_cast<double>(natural_total) - 1.0;
    std::vector<double> weight(track.size());
    double before = 0.0;
    for (size_t i = 0; i < track.size(); ++i) {
      auto nat = static_cast<double>(track[i]);
      double centroid = (before + nat / 2.0) / static_cast<double>(natural_total);
      weight[i] = nat * (1.0 + (kappa - 1.0) * centroid);
      before += nat;
    }
    std::vector<long long> scaled = apportion(weight, total);
    // Rounding can silence a one-frame word; it takes a frame back from the
    // roomiest entry so every word speaks and the total stays exact.
    for (size_t i = 0; i < scaled.size(); i += 2) {
      if (scaled[i] > 0) continue;
      size_t donor = 0;
      long long spare = -1;
      for (size_t j = 0; j < scaled.size(); ++j) {
        long long room = scaled[j] - (j % 2 == 0 ? 1 : 0);
        if (room > spare) {
          spare = room;
          donor = j;
        }
      }
      require(spare >= 1, "toy sentence has fewer frames than words");
      --scaled[donor];
      ++scaled[i];
    }
    for (int i = 0; i < len; ++i) {
      rec.src_word_frames.push_back(scaled[static_cast<size_t>(2 * i)]);
      rec.tgt_word_frames.push_back(scaled[static_cast<size_t>(2 * i)]);
      if (i + 1 < len) {
        rec.src_pause_frames.push_back(scaled[static_cast<size_t>(2 * i + 1)]);
        rec.tgt_pause_frames.push_back(scaled[static_cast<size_t>(2 * i + 1)]);
      }
    }

    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, long long>> word_frequencies(
    const std::vector<data::CorpusRecord>& records) {
  std::map<std::string, long long> freq;  // sorted, so downstream ids are stable
  for (const auto& r : records) {
    for (const auto& w : r.src_words) ++freq[w];
    for (const auto& w : r.tgt_words) ++freq[w];
  }
  return {freq.begin(), freq.end()};
}

std::vector<align::WordDuration> timed_words(const std::vector<std::string>& words,
                                             const std::vector<long long>& frames,
                                             const std::vector<long long>& pauses) {
  std::vector<align::WordDuration> out(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    out[i].word = words[i];
    out[i].frames = frames[i];
    out[i].trailing_pause_frames = i + 1 < words.size() ? pauses[i] : 0;
  }
  return out;
}

void strip_pauses(tok::AnnotatedTokenSequence& seq) {
  tok::AnnotatedTokenSequence kept;
  for (size_t i = 0; i < seq.token_ids.size(); ++i) {
    if (seq.token_ids[i] == Vocabulary::kPause) continue;
    kept.token_ids.push_back(seq.token_ids[i]);
    kept.durations.push_back(seq.durations[i]);
    kept.word_boundary_flags.push_back(seq.word_boundary_flags[i]);
    kept.tokens.push_back(seq.tokens[i]);
  }
  seq = std::move(kept);
}

}  // namespace

tok::MergeTable merges_from(const std::vector<data::CorpusRecord>& records, int max_merges) {
  return tok::train_bpe(word_frequencies(records), max_merges);
}

tok::Vocabulary vocabulary_from(const std::vector<data::CorpusRecord>& records,
                                const tok::MergeTable& merges) {
  Vocabulary v;
  tok::add_segmented_words(v, word_frequencies(records), merges);
  return v;
}

model::Example make_example(const data::CorpusRecord& rec, const tok::Vocabulary& vocab,
                            const tok::MergeTable& merges, bool use_pause_tokens,
                            tok::Attribution attribution, int bucket) {
  tok::AnnotatedTokenSequence src = tok::segment_with_pauses(
      timed_words(rec.src_words, rec.src_word_frames, rec.src_pause_frames), merges, vocab,
      attribution);
  tok::AnnotatedTokenSequence tgt = tok::segment_with_pauses(
      timed_words(rec.tgt_words, rec.tgt_word_frames, rec.tgt_pause_frames), merges, vocab,
      attribution);
  if (!use_pause_tokens) {
    strip_pauses(src);
    strip_pauses(tgt);
  }
  model::Example ex;
  ex.src = std::move(src.token_ids);
  ex.tgt = std::move(tgt.token_ids);
  ex.tgt_frames = std::move(tgt.durations);
  ex.bucket = bucket;
  return ex;
}

std::vector<data::HypRecord> translate_corpus(const model::Transformer& m,
                                              const std::vector<data::CorpusRecord>& records,
                                              const tok::Vocabulary& vocab,
                                              const tok::MergeTable& merges,
                                              const decode::DecodeOptions& base_opts,
                                              double budget_scale, int threads) {
  require(budget_scale > 0.0, "budget_scale must be positive");
  std::vector<data::HypRecord> out(records.size());
  const bool pauses = m.config().use_pause_tokens;
  auto run_one = [&](size_t i) {
    const data::CorpusRecord& rec = records[i];
    tok::AnnotatedTokenSequence src = tok::segment_with_pauses(
        timed_words(rec.src_words, rec.src_word_frames, rec.src_pause_frames), merges,
        vocab, tok::Attribution::kFinalSubword);
    if (!pauses) strip_pauses(src);
    decode::DecodeOptions opts = base_opts;
    opts.budget_frames = std::max<long long>(
        1, std::llround(budget_scale * static_cast<double>(rec.src_total_frames())));
    decode::Hypothesis hyp = decode::translate_with_budget(m, src.token_ids, opts);
    data::HypRecord h;
    h.id = rec.id;
    h.words = metrics::split_words(tok::detokenize(hyp.tokens, vocab));
    h.frames = hyp.total_frames();
    h.budget = opts.budget_frames;
    h.score = hyp.score;
    h.finished = hyp.finished;
    out[i] = std::move(h);
  };

  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, std::min<int>(n, static_cast<int>(records.size())));
  if (n == 1) {
    for (size_t i = 0; i < records.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n));
    for (int w = 0; w < n; ++w)
      pool.emplace_back([&, w] {
        for (size_t i = static_cast<size_t>(w); i < records.size();
             i += static_cast<size_t>(n))
          run_one(i);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

EvalSummary evaluate_hyps(const std::vector<data::CorpusRecord>& records,
                          const std::vector<data::HypRecord>& hyps) {
  require(!hyps.empty(), "no hypotheses to score");
  std::unordered_map<std::string, const data::CorpusRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;

  std::vector<std::vector<std::string>> hyp_words;
  std::vector<std::vector<std::string>> ref_words;
  std::vector<double> ratios;
  EvalSummary sum;
  for (const auto& h : hyps) {
    auto it = by_id.find(h.id);
    require(it != by_id.end(), "hypothesis ", h.id, " has no corpus record");
    hyp_words.push_back(h.words);
    ref_words.push_back(it->second->tgt_words);
    ratios.push_back(metrics::speech_ratio(h.frames, it->second->src_total_frames()));
    if (!h.finished) ++sum.unfinished;
  }
  sum.count = static_cast<int>(hyps.size());
  sum.bleu = metrics::bleu_corpus_single(hyp_words, ref_words);
  sum.slc_01 = metrics::slc(ratios, 0.1);
  sum.slc_02 = metrics::slc(ratios, 0.2);
  sum.slc_03 = metrics::slc(ratios, 0.3);
  double total = 0.0;
  double dev = 0.0;
  for (double r : ratios) {
    total += r;
    dev += std::abs(r - 1.0);
  }
  sum.mean_ratio = total / static_cast<double>(ratios.size());
  sum.mean_abs_dev = dev / static_cast<double>(ratios.size());
  return sum;
}

std::vector<AblationVariant> standard_variants(const model::Config& base) {
  AblationVariant full{"full", base};
  AblationVariant wo_abs{"no_abs_pe", base};
  wo_abs.config.use_abs_pe = false;
  AblationVariant wo_rel{"no_rel_pe", base};
  wo_rel.config.use_rel_pe = false;
  AblationVariant plain{"no_control", base};
  plain.config.use_abs_pe = false;
  plain.config.use_rel_pe = false;
  plain.config.use_pause_tokens = false;
  return {full, wo_abs, wo_rel, plain};
}

std::vector<AblationRow> run_ablation(const std::vector<data::CorpusRecord>& train_set,
                                      const std::vector<data::CorpusRecord>& test_set,
                                      const std::vector<AblationVariant>& variants,
                                      const AblationOptions& opts) {
  require(!train_set.empty() && !test_set.empty(), "ablation needs train and test data");
  require(!variants.empty(), "no ablation variants");
  tok::MergeTable merges = merges_from(train_set, opts.bpe_merges);
  Vocabulary vocab = vocabulary_from(train_set, merges);

  std::vector<AblationRow> rows;
  for (const AblationVariant& variant : variants) {
    model::Config cfg = variant.config;
    cfg.vocab_size = vocab.size();

    double t_low = 0.0, t_high = 0.0;
    if (cfg.verbosity_control) {
      std::vector<double> ratios;
      for (const auto& r : train_set)
        ratios.push_back(static_cast<double>(r.tgt_total_frames()) /
                         static_cast<double>(r.src_total_frames()));
      std::tie(t_low, t_high) = bucket_thresholds(ratios);
    }

    std::vector<model::Example> examples;
    examples.reserve(train_set.size());
    for (const auto& r : train_set) {
      int bucket = -1;
      if (cfg.verbosity_control)
        bucket = bucket_of(static_cast<double>(r.tgt_total_frames()) /
                               static_cast<double>(r.src_total_frames()),
                           t_low, t_high);
      examples.push_back(
          make_example(r, vocab, merges, cfg.use_pause_tokens, opts.attribution, bucket));
    }

    model::Transformer m(cfg);
    model::Trainer trainer(m, opts.train);
    trainer.fit(examples);

    std::vector<data::HypRecord> hyps =
        translate_corpus(m, test_set, vocab, merges, opts.decode, 1.0, opts.train.threads);
    EvalSummary sum = evaluate_hyps(test_set, hyps);
    rows.push_back(AblationRow{variant.name, sum.bleu.bleu, sum.slc_02, sum.mean_ratio,
                               sum.mean_abs_dev, sum.unfinished});
  }
  return rows;
}

std::string ablation_tsv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "variant\tbleu\tslc_0.2\tmean_ratio\tmean_abs_dev\tunfinished\n";
  out.setf(std::ios::fixed);
  for (const AblationRow& r : rows) {
    out.precision(2);
    out << r.name << "\t" << r.bleu << "\t" << r.slc_02 << "\t";
    out.precision(4);
    out << r.mean_ratio << "\t" << r.mean_abs_dev << "\t" << r.unfinished << "\n";
  }
  return out.str();
}

}  // namespace isomt::harness
