#include "isomt/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "isomt/align.hpp"
#include "isomt/checkpoint.hpp"
#include "isomt/textgrid.hpp"

namespace isomt::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), "cannot open ", path.string(), " for writing");
  out << text;
  require(out.good(), "write to ", path.string(), " failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open ", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

tok::Attribution parse_attribution(const std::string& name) {
  if (name == "final") return tok::Attribution::kFinalSubword;
  if (name == "uniform") return tok::Attribution::kUniform;
  fail("unknown attribution '", name, "', expected final or uniform");
}

}  // namespace

void cmd_prepare(const PrepareArgs& args) {
  require(!args.grids_dir.empty(), "prepare needs a grids directory");
  require(!args.out_corpus.empty(), "prepare needs an output corpus path");
  require(fs::is_directory(args.grids_dir), args.grids_dir, " is not a directory");

  const std::string src_suffix = ".src.TextGrid";
  const std::string tgt_suffix = ".tgt.TextGrid";
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(args.grids_dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() > src_suffix.size() &&
        name.compare(name.size() - src_suffix.size(), src_suffix.size(), src_suffix) == 0)
      ids.push_back(name.substr(0, name.size() - src_suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  require(!ids.empty(), "no *", src_suffix, " files in ", args.grids_dir);

  std::vector<data::CorpusRecord> records;
  std::vector<data::PhonemeRecord> phonemes;
  for (const std::string& id : ids) {
    fs::path src_path = fs::path(args.grids_dir) / (id + src_suffix);
    fs::path tgt_path = fs::path(args.grids_dir) / (id + tgt_suffix);
    require(fs::exists(tgt_path), src_path.string(), " has no target grid");
    TextGrid src = parse_textgrid(read_text(src_path));
    TextGrid tgt = parse_textgrid(read_text(tgt_path));

    auto to_side = [&](const TextGrid& grid, std::vector<std::string>& words,
                       std::vector<long long>& frames, std::vector<long long>& pauses) {
      std::vector<align::WordDuration> ws =
          align::word_durations(grid.tier(args.words_tier), args.fps);
      for (size_t i = 0; i < ws.size(); ++i) {
        words.push_back(ws[i].word);
        frames.push_back(ws[i].frames);
        if (i + 1 < ws.size()) pauses.push_back(ws[i].trailing_pause_frames);
      }
    };
    data::CorpusRecord rec;
    rec.id = id;
    to_side(src, rec.src_words, rec.src_word_frames, rec.src_pause_frames);
    to_side(tgt, rec.tgt_words, rec.tgt_word_frames, rec.tgt_pause_frames);
    rec.validate();

    if (!args.out_phonemes.empty() && tgt.has_tier(args.phones_tier)) {
      data::PhonemeRecord ph;
      ph.id = id;
      ph.budget = rec.src_total_frames();
      for (const align::PhonemeInterval& iv :
           align::phoneme_intervals(tgt.tier(args.phones_tier), tgt.tier(args.words_tier)))
        ph.phonemes.push_back(adjust::TimedPhoneme{
            iv.label, align::frames_from_seconds(iv.end - iv.start, args.fps)});
      if (!ph.phonemes.empty()) phonemes.push_back(std::move(ph));
    }
    records.push_back(std::move(rec));
  }

  data::save_corpus(args.out_corpus, records);
  if (!args.out_phonemes.empty()) data::save_phonemes(args.out_phonemes, phonemes);
  std::cout << "prepared " << records.size() << " sentence pairs";
  if (!args.out_phonemes.empty()) std::cout << ", " << phonemes.size() << " phoneme tracks";
  std::cout << "\n";
}

void cmd_gen_toy(const GenToyArgs& args) {
  require(!args.out_dir.empty(), "gen-toy needs an output directory");
  require(args.test_size >= 1 && args.test_size < args.spec.corpus_size,
          "test_size must leave room for a training split");
  std::vector<data::CorpusRecord> all = harness::generate_toy_corpus(args.spec);
  fs::create_directories(args.out_dir);
  auto cut = all.begin() + (all.size() - static_cast<size_t>(args.test_size));
  data::save_corpus((fs::path(args.out_dir) / "train.jsonl").string(),
                    {all.begin(), cut});
  data::save_corpus((fs::path(args.out_dir) / "test.jsonl").string(), {cut, all.end()});
  std::cout << "wrote " << (all.size() - static_cast<size_t>(args.test_size)) << " train / "
            << args.test_size << " test sentences to " << args.out_dir << "\n";
}

void cmd_train(const TrainArgs& args) {
  require(!args.corpus.empty(), "train needs a corpus");
  require(!args.out_dir.empty(), "train needs an output directory");
  std::vector<data::CorpusRecord> records = data::load_corpus(args.corpus);
  tok::Attribution attribution = parse_attribution(args.attribution);

  tok::MergeTable merges = harness::merges_from(records, args.bpe_merges);
  tok::Vocabulary vocab = harness::vocabulary_from(records, merges);
  model::Config cfg = args.config;
  cfg.vocab_size = vocab.size();

  double t_low = 0.0, t_high = 0.0;
  if (cfg.verbosity_control) {
    std::vector<double> ratios;
    for (const auto& r : records)
      ratios.push_back(static_cast<double>(r.tgt_total_frames()) /
                       static_cast<double>(r.src_total_frames()));
    std::tie(t_low, t_high) = harness::bucket_thresholds(ratios);
  }

  std::vector<model::Example> examples;
  examples.reserve(records.size());
  for (const auto& r : records) {
    int bucket = -1;
    if (cfg.verbosity_control)
      bucket = harness::bucket_of(static_cast<double>(r.tgt_total_frames()) /
                                      static_cast<double>(r.src_total_frames()),
                                  t_low, t_high);
    examples.push_back(
        harness::make_example(r, vocab, merges, cfg.use_pause_tokens, attribution, bucket));
  }

  model::Transformer m(cfg);
  model::Trainer trainer(m, args.train);
  std::vector<model::TrainLogRow> log = trainer.fit(examples);

  fs::create_directories(args.out_dir);
  fs::path dir(args.out_dir);
  write_text(dir / "config.json", m.config().to_json().dump(2) + "\n");
  vocab.save((dir / "vocab.txt").string());
  merges.save((dir / "merges.txt").string());
  model::save_checkpoint((dir / "model.bin").string(), m);

  ordered_json meta;
  meta["attribution"] = args.attribution;
  meta["bpe_merges"] = args.bpe_merges;
  if (cfg.verbosity_control) {
    meta["bucket_low"] = t_low;
    meta["bucket_high"] = t_high;
  }
  write_text(dir / "meta.json", meta.dump(2) + "\n");

  std::ostringstream csv;
  csv << "step,lr,loss,ce,dur\n";
  csv.setf(std::ios::fixed);
  csv.precision(6);
  for (const auto& row : log)
    csv << row.step << "," << row.lr << "," << row.loss << "," << row.ce << "," << row.dur
        << "\n";
  write_text(dir / "train_log.csv", csv.str());

  std::cout << "trained " << args.train.steps << " steps on " << examples.size()
            << " sentences, final loss " << log.back().loss << "\n";
}

void cmd_translate(const TranslateArgs& args) {
  require(!args.model_dir.empty(), "translate needs a model directory");
  require(!args.corpus.empty(), "translate needs a corpus");
  require(!args.out_hyps.empty(), "translate needs an output path");
  fs::path dir(args.model_dir);
  model::Transformer m = model::load_checkpoint((dir / "model.bin").string());
  tok::Vocabulary vocab = tok::Vocabulary::load((dir / "vocab.txt").string());
  tok::MergeTable merges = tok::MergeTable::load((dir / "merges.txt").string());
  require(vocab.size() == m.config().vocab_size, "vocabulary does not match the checkpoint");

  std::vector<data::CorpusRecord> records = data::load_corpus(args.corpus);
  std::vector<data::HypRecord> hyps = harness::translate_corpus(
      m, records, vocab, merges, args.decode, args.budget_scale, args.threads);
  data::save_hyps(args.out_hyps, hyps);

  int unfinished = 0;
  for (const auto& h : hyps)
    if (!h.finished) ++unfinished;
  std::cout << "translated " << hyps.size() << " sentences";
  if (unfinished > 0)
    std::cout << " (warning: " << unfinished << " hit the token cap before EOS)";
  std::cout << "\n";
}

void cmd_evaluate(const EvaluateArgs& args) {
  require(!args.corpus.empty() && !args.hyps.empty(), "evaluate needs corpus and hypotheses");
  require(!args.out_report.empty(), "evaluate needs an output report path");
  std::vector<data::CorpusRecord> records = data::load_corpus(args.corpus);
  std::vector<data::HypRecord> hyps = data::load_hyps(args.hyps);
  harness::EvalSummary sum = harness::evaluate_hyps(records, hyps);

  ordered_json j;
  j["count"] = sum.count;
  j["bleu"] = sum.bleu.bleu;
  j["bleu_precisions"] = sum.bleu.precisions;
  j["brevity_penalty"] = sum.bleu.brevity_penalty;
  j["hyp_len"] = sum.bleu.hyp_len;
  j["ref_len"] = sum.bleu.ref_len;
  j["slc_0.1"] = sum.slc_01;
  j["slc_0.2"] = sum.slc_02;
  j["slc_0.3"] = sum.slc_03;
  j["mean_ratio"] = sum.mean_ratio;
  j["mean_abs_dev"] = sum.mean_abs_dev;
  j["unfinished"] = sum.unfinished;
  write_text(args.out_report, j.dump(2) + "\n");

  std::cout << "bleu " << sum.bleu.bleu << ", slc(0.2) " << sum.slc_02 << "%, mean ratio "
            << sum.mean_ratio << " over " << sum.count << " sentences\n";
}

void cmd_adjust(const AdjustArgs& args) {
  require(!args.phonemes.empty() && !args.out_phonemes.empty(),
          "adjust needs input and output phoneme paths");
  std::vector<data::PhonemeRecord> records = data::load_phonemes(args.phonemes);
  int unmet = 0;
  for (data::PhonemeRecord& r : records) {
    adjust::AdjustResult res = adjust::stretch_to_budget(r.phonemes, r.budget);
    if (!res.met_budget) ++unmet;
    r.phonemes = std::move(res.phonemes);
  }
  data::save_phonemes(args.out_phonemes, records);
  std::cout << "adjusted " << records.size() << " utterances";
  if (unmet > 0) std::cout << " (" << unmet << " could not meet the budget)";
  std::cout << "\n";
}

void cmd_ablate(const AblateArgs& args) {
  require(!args.train_corpus.empty() && !args.test_corpus.empty(),
          "ablate needs train and test corpora");
  require(!args.out_dir.empty(), "ablate needs an output directory");
  std::vector<data::CorpusRecord> train_set = data::load_corpus(args.train_corpus);
  std::vector<data::CorpusRecord> test_set = data::load_corpus(args.test_corpus);

  harness::AblationOptions opts;
  opts.train = args.train;
  opts.decode = args.decode;
  opts.bpe_merges = args.bpe_merges;
  std::vector<harness::AblationRow> rows = harness::run_ablation(
      train_set, test_set, harness::standard_variants(args.base), opts);

  fs::create_directories(args.out_dir);
  write_text(fs::path(args.out_dir) / "ablation.tsv", harness::ablation_tsv(rows));
  ordered_json j = ordered_json::array();
  for (const auto& r : rows)
    j.push_back(ordered_json{{"variant", r.name},
                             {"bleu", r.bleu},
                             {"slc_0.2", r.slc_02},
                             {"mean_ratio", r.mean_ratio},
                             {"mean_abs_dev", r.mean_abs_dev},
                             {"unfinished", r.unfinished}});
  write_text(fs::path(args.out_dir) / "ablation.json", j.dump(2) + "\n");
  std::cout << harness::ablation_tsv(rows);
}

}  // namespace isomt::pipeline
