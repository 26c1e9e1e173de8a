#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "isomt/common.hpp"
#include "isomt/corpus.hpp"

using namespace isomt::data;

namespace {

CorpusRecord sample_record() {
  CorpusRecord r;
  r.id = "utt-0001";
  r.src_words = {"guten", "morgen"};
  r.src_word_frames = {22, 30};
  r.src_pause_frames = {5};
  r.tgt_words = {"good", "morning"};
  r.tgt_word_frames = {18, 35};
  r.tgt_pause_frames = {4};
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("corpus record totals and validation") {
  CorpusRecord r = sample_record();
  r.validate();
  CHECK(r.src_total_frames() == 57);
  CHECK(r.tgt_total_frames() == 57);

  CorpusRecord bad = r;
  bad.src_pause_frames = {};  // needs exactly W-1 pauses
  CHECK_THROWS_AS(bad.validate(), isomt::Error);
  bad = r;
  bad.tgt_word_frames = {18};
  CHECK_THROWS_AS(bad.validate(), isomt::Error);
  bad = r;
  bad.tgt_word_frames = {18, -1};
  CHECK_THROWS_AS(bad.validate(), isomt::Error);
  bad = r;
  bad.src_words = {};
  CHECK_THROWS_AS(bad.validate(), isomt::Error);
}

TEST_CASE("corpus file round trip") {
  std::vector<CorpusRecord> recs = {sample_record()};
  recs.push_back(sample_record());
  recs[1].id = "utt-0002";
  recs[1].tgt_words = {"hi"};
  recs[1].tgt_word_frames = {12};
  recs[1].tgt_pause_frames = {};

  std::string path = "corpus_roundtrip.jsonl";
  save_corpus(path, recs);
  auto back = load_corpus(path);

  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "utt-0001");
  CHECK(back[0].src_words == recs[0].src_words);
  CHECK(back[0].src_pause_frames == recs[0].src_pause_frames);
  CHECK(back[1].tgt_words == std::vector<std::string>{"hi"});
  CHECK(back[1].tgt_total_frames() == 12);

  // Saving the loaded records reproduces the file byte for byte.
  std::string again = "corpus_again.jsonl";
  save_corpus(again, back);
  CHECK(slurp(again) == slurp(path));
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("corpus header is checked") {
  std::string path = "corpus_bad.jsonl";
  {
    std::ofstream f(path);
    f << "{\"format\":\"something.else\",\"version\":1}\n";
  }
  CHECK_THROWS_AS(load_corpus(path), isomt::Error);
  {
    std::ofstream f(path);
    f << "{\"format\":\"isomt.corpus\",\"version\":99}\n";
  }
  CHECK_THROWS_AS(load_corpus(path), isomt::Error);
  {
    std::ofstream f(path);
    f << "not json\n";
  }
  CHECK_THROWS_AS(load_corpus(path), isomt::Error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_corpus("missing_file.jsonl"), isomt::Error);
}

TEST_CASE("hypothesis file round trip") {
  std::vector<HypRecord> hyps(2);
  hyps[0].id = "utt-0001";
  hyps[0].words = {"good", "morning"};
  hyps[0].frames = 55;
  hyps[0].budget = 57;
  hyps[0].score = -3.25;
  hyps[0].finished = true;
  hyps[1].id = "utt-0002";
  hyps[1].words = {};
  hyps[1].frames = 0;
  hyps[1].budget = 12;
  hyps[1].score = -0.5;
  hyps[1].finished = false;

  std::string path = "hyps_roundtrip.jsonl";
  save_hyps(path, hyps);
  auto back = load_hyps(path);
  std::remove(path.c_str());

  REQUIRE(back.size() == 2);
  CHECK(back[0].words == hyps[0].words);
  CHECK(back[0].frames == 55);
  CHECK(back[0].budget == 57);
  CHECK(back[0].score == -3.25);
  CHECK(back[0].finished);
  CHECK(back[1].words.empty());
  CHECK_FALSE(back[1].finished);
}

TEST_CASE("phoneme file round trip") {
  std::vector<PhonemeRecord> recs(1);
  recs[0].id = "utt-0async";
  recs[0].phonemes = {{"HH", 4}, {"AH0", 10}, {"sil", 2}};
  recs[0].budget = 20;

  std::string path = "phonemes_roundtrip.jsonl";
  save_phonemes(path, recs);
  auto back = load_phonemes(path);
  std::remove(path.c_str());

  REQUIRE(back.size() == 1);
  REQUIRE(back[0].phonemes.size() == 3);
  CHECK(back[0].phonemes[1].label == "AH0");
  CHECK(back[0].phonemes[1].frames == 10);
  CHECK(back[0].budget == 20);
}
