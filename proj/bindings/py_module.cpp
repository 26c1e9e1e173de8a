// Python surface of the core library: the pure duration/metric/adjustment
// operations plus the file-based pipeline stages.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "isomt/bpe.hpp"
#include "isomt/harness.hpp"
#include "isomt/metrics.hpp"
#include "isomt/phoneme_adjust.hpp"
#include "isomt/pipeline.hpp"
#include "isomt/positional.hpp"
#include "isomt/textgrid.hpp"

namespace py = pybind11;

namespace {

std::vector<double> pe_list(long long position, int model_dim, long long max_position) {
  Eigen::RowVectorXd row = isomt::emb::sinusoidal_pe(position, model_dim, max_position);
  return {row.data(), row.data() + row.size()};
}

py::dict bleu_dict(const isomt::metrics::BleuBreakdown& b) {
  py::dict d;
  d["bleu"] = b.bleu;
  d["precisions"] = std::vector<double>(b.precisions.begin(), b.precisions.end());
  d["brevity_penalty"] = b.brevity_penalty;
  d["hyp_len"] = b.hyp_len;
  d["ref_len"] = b.ref_len;
  return d;
}

isomt::tok::MergeTable to_merges(const std::vector<std::pair<std::string, std::string>>& m) {
  isomt::tok::MergeTable t;
  t.merges = m;
  return t;
}

std::string class_name(isomt::adjust::PhonemeClass c) {
  switch (c) {
    case isomt::adjust::PhonemeClass::kVowel: return "vowel";
    case isomt::adjust::PhonemeClass::kConsonant: return "consonant";
    default: return "silence";
  }
}

py::dict record_dict(const isomt::data::CorpusRecord& r) {
  py::dict d;
  d["id"] = r.id;
  d["src_words"] = r.src_words;
  d["src_word_frames"] = r.src_word_frames;
  d["src_pause_frames"] = r.src_pause_frames;
  d["tgt_words"] = r.tgt_words;
  d["tgt_word_frames"] = r.tgt_word_frames;
  d["tgt_pause_frames"] = r.tgt_pause_frames;
  d["src_total_frames"] = r.src_total_frames();
  d["tgt_total_frames"] = r.tgt_total_frames();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "speech-duration aware translation core";
  py::register_exception<isomt::Error>(m, "Error");

  // duration embeddings
  m.def("quantize_ratio", &isomt::emb::quantize_ratio, py::arg("cumulative_frames"),
        py::arg("total_budget_frames"), py::arg("quantization_level") = 5,
        "floor(N * cumulative / total) clamped into [0, N]");
  m.def("sinusoidal_pe", &pe_list, py::arg("position"), py::arg("model_dim"),
        py::arg("max_position") = isomt::emb::kDefaultMaxPosition,
        "sinusoidal position vector as a list of floats");
  m.def("frames_from_seconds", &isomt::align::frames_from_seconds, py::arg("seconds"),
        py::arg("frames_per_second"), "round-half-up frame count");

  // metrics
  m.def("speech_ratio", &isomt::metrics::speech_ratio, py::arg("hyp_frames"),
        py::arg("ref_frames"));
  m.def("slc", &isomt::metrics::slc, py::arg("ratios"), py::arg("p"),
        "percent of ratios within [1-p, 1+p], window edges inclusive");
  m.def(
      "bleu",
      [](const std::vector<std::vector<std::string>>& hyps,
         const std::vector<std::vector<std::string>>& refs) {
        return bleu_dict(isomt::metrics::bleu_corpus_single(hyps, refs));
      },
      py::arg("hyps"), py::arg("refs"), "corpus BLEU-4, one reference per sentence");
  m.def("split_words", &isomt::metrics::split_words, py::arg("line"));

  // timing adjustment
  m.def("classify_phoneme",
        [](const std::string& label) {
          return class_name(isomt::adjust::classify_phoneme(label));
        },
        py::arg("label"));
  m.def("scale_to_total", &isomt::adjust::scale_to_total, py::arg("values"),
        py::arg("target_total"), "largest-remainder proportional integer scaling");
  m.def(
      "stretch_to_budget",
      [](const std::vector<std::pair<std::string, long long>>& phonemes,
         long long budget_frames) {
        std::vector<isomt::adjust::TimedPhoneme> ps;
        for (const auto& [label, frames] : phonemes)
          ps.push_back(isomt::adjust::TimedPhoneme{label, frames});
        isomt::adjust::AdjustResult res = isomt::adjust::stretch_to_budget(ps, budget_frames);
        std::vector<std::pair<std::string, long long>> out;
        for (const auto& p : res.phonemes) out.emplace_back(p.label, p.frames);
        py::dict d;
        d["phonemes"] = out;
        d["total_frames"] = res.total_frames;
        d["met_budget"] = res.met_budget;
        return d;
      },
      py::arg("phonemes"), py::arg("budget_frames"),
      "retime (label, frames) pairs onto the budget, consonants untouched");

  // tokenization
  m.def(
      "train_bpe",
      [](const std::vector<std::pair<std::string, long long>>& word_freqs, int max_merges) {
        return isomt::tok::train_bpe(word_freqs, max_merges).merges;
      },
      py::arg("word_freqs"), py::arg("max_merges"));
  m.def(
      "segment_word",
      [](const std::string& word,
         const std::vector<std::pair<std::string, std::string>>& merges) {
        return isomt::tok::segment_word(word, to_merges(merges));
      },
      py::arg("word"), py::arg("merges"));

  // alignment ingestion
  m.def(
      "word_durations",
      [](const std::string& textgrid, const std::string& tier, double fps) {
        isomt::TextGrid g = isomt::parse_textgrid(textgrid);
        std::vector<std::tuple<std::string, long long, long long>> out;
        for (const auto& w : isomt::align::word_durations(g.tier(tier), fps))
          out.emplace_back(w.word, w.frames, w.trailing_pause_frames);
        return out;
      },
      py::arg("textgrid"), py::arg("tier") = "words", py::arg("fps") = 80.0,
      "(word, frames, trailing_pause_frames) triples from a TextGrid document");

  // synthetic data
  m.def(
      "generate_toy_corpus",
      [](int corpus_size, uint64_t seed, int vocab_size, int min_len, int max_len,
         int max_pause, double budget_jitter) {
        isomt::harness::ToyCorpusSpec spec;
        spec.corpus_size = corpus_size;
        spec.seed = seed;
        spec.vocab_size = vocab_size;
        spec.min_len = min_len;
        spec.max_len = max_len;
        spec.max_pause = max_pause;
        spec.budget_jitter = budget_jitter;
        py::list out;
        for (const auto& r : isomt::harness::generate_toy_corpus(spec))
          out.append(record_dict(r));
        return out;
      },
      py::arg("corpus_size"), py::arg("seed") = 13, py::arg("vocab_size") = 20,
      py::arg("min_len") = 3, py::arg("max_len") = 12, py::arg("max_pause") = 4,
      py::arg("budget_jitter") = 0.3);

  // pipeline stages, all file based
  m.def(
      "prepare",
      [](const std::string& grids_dir, const std::string& out_corpus,
         const std::string& out_phonemes, const std::string& words_tier,
         const std::string& phones_tier, double fps) {
        isomt::pipeline::PrepareArgs a;
        a.grids_dir = grids_dir;
        a.out_corpus = out_corpus;
        a.out_phonemes = out_phonemes;
        a.words_tier = words_tier;
        a.phones_tier = phones_tier;
        a.fps = fps;
        isomt::pipeline::cmd_prepare(a);
      },
      py::arg("grids_dir"), py::arg("out_corpus"), py::arg("out_phonemes") = "",
      py::arg("words_tier") = "words", py::arg("phones_tier") = "phones",
      py::arg("fps") = 80.0, py::call_guard<py::gil_scoped_release>());

  m.def(
      "gen_toy",
      [](const std::string& out_dir, int corpus_size, int test_size, uint64_t seed) {
        isomt::pipeline::GenToyArgs a;
        a.out_dir = out_dir;
        a.spec.corpus_size = corpus_size;
        a.spec.seed = seed;
        a.test_size = test_size;
        isomt::pipeline::cmd_gen_toy(a);
      },
      py::arg("out_dir"), py::arg("corpus_size") = 10000, py::arg("test_size") = 500,
      py::arg("seed") = 13, py::call_guard<py::gil_scoped_release>());

  m.def(
      "train",
      [](const std::string& corpus, const std::string& out_dir, int steps, int batch_size,
         int layers_enc, int layers_dec, int heads, int model_dim, int ffn_dim,
         double dropout, bool use_abs_pe, bool use_rel_pe, bool use_pause_tokens,
         bool verbosity_control, uint64_t seed, int threads, int warmup_steps,
         double lr_factor, int bpe_merges, const std::string& attribution) {
        isomt::pipeline::TrainArgs a;
        a.corpus = corpus;
        a.out_dir = out_dir;
        a.train.steps = steps;
        a.train.batch_size = batch_size;
        a.train.threads = threads;
        a.train.warmup_steps = warmup_steps;
        a.train.lr_factor = lr_factor;
        a.config.layers_enc = layers_enc;
        a.config.layers_dec = layers_dec;
        a.config.heads = heads;
        a.config.model_dim = model_dim;
        a.config.ffn_dim = ffn_dim;
        a.config.dropout = dropout;
        a.config.use_abs_pe = use_abs_pe;
        a.config.use_rel_pe = use_rel_pe;
        a.config.use_pause_tokens = use_pause_tokens;
        a.config.verbosity_control = verbosity_control;
        a.config.seed = seed;
        a.bpe_merges = bpe_merges;
        a.attribution = attribution;
        isomt::pipeline::cmd_train(a);
      },
      py::arg("corpus"), py::arg("out_dir"), py::arg("steps") = 3000,
      py::arg("batch_size") = 32, py::arg("layers_enc") = 2, py::arg("layers_dec") = 2,
      py::arg("heads") = 4, py::arg("model_dim") = 64, py::arg("ffn_dim") = 256,
      py::arg("dropout") = 0.1, py::arg("use_abs_pe") = true, py::arg("use_rel_pe") = true,
      py::arg("use_pause_tokens") = true, py::arg("verbosity_control") = false,
      py::arg("seed") = 1, py::arg("threads") = 0, py::arg("warmup_steps") = 400,
      py::arg("lr_factor") = 2.0, py::arg("bpe_merges") = 0,
      py::arg("attribution") = "final", py::call_guard<py::gil_scoped_release>());

  m.def(
      "translate",
      [](const std::string& model_dir, const std::string& corpus,
         const std::string& out_hyps, double budget_scale, int beam_size, int max_tokens,
         bool hard_stop, double length_penalty, int threads) {
        isomt::pipeline::TranslateArgs a;
        a.model_dir = model_dir;
        a.corpus = corpus;
        a.out_hyps = out_hyps;
        a.budget_scale = budget_scale;
        a.decode.budget_frames = 1;  // replaced per sentence
        a.decode.beam_size = beam_size;
        a.decode.max_tokens = max_tokens;
        a.decode.hard_stop = hard_stop;
        a.decode.length_penalty = length_penalty;
        a.threads = threads;
        isomt::pipeline::cmd_translate(a);
      },
      py::arg("model_dir"), py::arg("corpus"), py::arg("out_hyps"),
      py::arg("budget_scale") = 1.0, py::arg("beam_size") = 1, py::arg("max_tokens") = 128,
      py::arg("hard_stop") = false, py::arg("length_penalty") = 1.0, py::arg("threads") = 0,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "evaluate",
      [](const std::string& corpus, const std::string& hyps) {
        isomt::harness::EvalSummary s = isomt::harness::evaluate_hyps(
            isomt::data::load_corpus(corpus), isomt::data::load_hyps(hyps));
        py::dict d;
        d["count"] = s.count;
        d["bleu"] = s.bleu.bleu;
        d["slc_0.1"] = s.slc_01;
        d["slc_0.2"] = s.slc_02;
        d["slc_0.3"] = s.slc_03;
        d["mean_ratio"] = s.mean_ratio;
        d["mean_abs_dev"] = s.mean_abs_dev;
        d["unfinished"] = s.unfinished;
        return d;
      },
      py::arg("corpus"), py::arg("hyps"), "score a hypotheses file against its corpus");

  m.def(
      "adjust",
      [](const std::string& phonemes, const std::string& out_phonemes) {
        isomt::pipeline::AdjustArgs a;
        a.phonemes = phonemes;
        a.out_phonemes = out_phonemes;
        isomt::pipeline::cmd_adjust(a);
      },
      py::arg("phonemes"), py::arg("out_phonemes"),
      py::call_guard<py::gil_scoped_release>());
}
