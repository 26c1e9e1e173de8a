#include "isomt/corpus.hpp"

#include <fstream>
#include <json.hpp>
#include <numeric>

#include "isomt/common.hpp"

namespace isomt::data {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void write_header(std::ostream& out, const std::string& format) {
  ordered_json h;
  h["format"] = format;
  h["version"] = 1;
  out << h.dump() << "\n";
}

// Returns the open stream positioned after a validated header line.
std::ifstream open_checked(const std::string& path, const std::string& format) {
  std::ifstream in(path);
  require(in.good(), "cannot open ", path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), path, " is empty");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    fail(path, ": header is not valid JSON: ", e.what());
  }
  require(h.value("format", "") == format, path, " is not a ", format, " file");
  require(h.value("version", 0) == 1, path, ": unsupported version");
  return in;
}

json parse_line(const std::string& path, size_t lineno, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    fail(path, " line ", lineno, ": ", e.what());
  }
}

template <typename T>
std::vector<T> get_list(const json& j, const char* key) {
  require(j.contains(key) && j[key].is_array(), "missing list field ", key);
  return j[key].get<std::vector<T>>();
}

}  // namespace

long long CorpusRecord::src_total_frames() const {
  return std::accumulate(src_word_frames.begin(), src_word_frames.end(), 0LL) +
         std::accumulate(src_pause_frames.begin(), src_pause_frames.end(), 0LL);
}

long long CorpusRecord::tgt_total_frames() const {
  return std::accumulate(tgt_word_frames.begin(), tgt_word_frames.end(), 0LL) +
         std::accumulate(tgt_pause_frames.begin(), tgt_pause_frames.end(), 0LL);
}

void CorpusRecord::validate() const {
  require(!id.empty(), "record without id");
  require(!src_words.empty(), id, ": no source words");
  require(!tgt_words.empty(), id, ": no target words");
  require(src_word_frames.size() == src_words.size(), id, ": source frame list misaligned");
  require(tgt_word_frames.size() == tgt_words.size(), id, ": target frame list misaligned");
  require(src_pause_frames.size() == src_words.size() - 1, id,
          ": source pause list must have one entry per word gap");
  require(tgt_pause_frames.size() == tgt_words.size() - 1, id,
          ": target pause list must have one entry per word gap");
  for (const auto& w : src_words) require(!w.empty(), id, ": empty source word");
  for (const auto& w : tgt_words) require(!w.empty(), id, ": empty target word");
  for (long long f : src_word_frames) require(f >= 0, id, ": negative source word frames");
  for (long long f : tgt_word_frames) require(f >= 1, id, ": target words need speech frames");
  for (long long f : src_pause_frames) require(f >= 0, id, ": negative source pause");
  for (long long f : tgt_pause_frames) require(f >= 0, id, ": negative target pause");
  require(src_total_frames() >= 1, id, ": source side has no speech frames");
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
  std::ifstream in = open_checked(path, "isomt.corpus");
  std::vector<CorpusRecord> out;
  std::string line;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(path, lineno, line);
    CorpusRecord r;
    r.id = j.value("id", "");
    r.src_words = get_list<std::string>(j, "src_words");
    r.src_word_frames = get_list<long long>(j, "src_word_frames");
    r.src_pause_frames = get_list<long long>(j, "src_pause_frames");
    r.tgt_words = get_list<std::string>(j, "tgt_words");
    r.tgt_word_frames = get_list<long long>(j, "tgt_word_frames");
    r.tgt_pause_frames = get_list<long long>(j, "tgt_pause_frames");
    r.validate();
    out.push_back(std::move(r));
  }
  return out;
}

void save_corpus(const std::string& path, const std::vector<CorpusRecord>& records) {
  std::ofstream out(path);
  require(out.good(), "cannot open ", path, " for writing");
  write_header(out, "isomt.corpus");
  for (const CorpusRecord& r : records) {
    r.validate();
    ordered_json j;
    j["id"] = r.id;
    j["src_words"] = r.src_words;
    j["src_word_frames"] = r.src_word_frames;
    j["src_pause_frames"] = r.src_pause_frames;
    j["tgt_words"] = r.tgt_words;
    j["tgt_word_frames"] = r.tgt_word_frames;
    j["tgt_pause_frames"] = r.tgt_pause_frames;
    out << j.dump() << "\n";
  }
  require(out.good(), "write to ", path, " failed");
}

std::vector<HypRecord> load_hyps(const std::string& path) {
  std::ifstream in = open_checked(path, "isomt.hyps");
  std::vector<HypRecord> out;
  std::string line;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(path, lineno, line);
    HypRecord r;
    r.id = j.value("id", "");
    r.words = get_list<std::string>(j, "words");
    r.frames = j.value("frames", 0LL);
    r.budget = j.value("budget", 0LL);
    r.score = j.value("score", 0.0);
    r.finished = j.value("finished", true);
    require(!r.id.empty(), path, " line ", lineno, ": record without id");
    require(r.frames >= 0 && r.budget >= 1, path, " line ", lineno, ": bad frame counts");
    out.push_back(std::move(r));
  }
  return out;
}

void save_hyps(const std::string& path, const std::vector<HypRecord>& records) {
  std::ofstream out(path);
  require(out.good(), "cannot open ", path, " for writing");
  write_header(out, "isomt.hyps");
  for (const HypRecord& r : records) {
    ordered_json j;
    j["id"] = r.id;
    j["words"] = r.words;
    j["frames"] = r.frames;
    j["budget"] = r.budget;
    j["score"] = r.score;
    j["finished"] = r.finished;
    out << j.dump() << "\n";
  }
  require(out.good(), "write to ", path, " failed");
}

std::vector<PhonemeRecord> load_phonemes(const std::string& path) {
  std::ifstream in = open_checked(path, "isomt.phonemes");
  std::vector<PhonemeRecord> out;
  std::string line;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(path, lineno, line);
    PhonemeRecord r;
    r.id = j.value("id", "");
    r.budget = j.value("budget", 0LL);
    require(!r.id.empty(), path, " line ", lineno, ": record without id");
    require(r.budget >= 1, path, " line ", lineno, ": bad budget");
    require(j.contains("phonemes") && j["phonemes"].is_array(), path, " line ", lineno,
            ": missing phoneme list");
    for (const json& p : j["phonemes"]) {
      adjust::TimedPhoneme ph;
      ph.label = p.value("label", "");
      ph.frames = p.value("frames", 0LL);
      require(ph.frames >= 0, path, " line ", lineno, ": negative phoneme frames");
      r.phonemes.push_back(std::move(ph));
    }
    require(!r.phonemes.empty(), path, " line ", lineno, ": empty phoneme list");
    out.push_back(std::move(r));
  }
  return out;
}

void save_phonemes(const std::string& path, const std::vector<PhonemeRecord>& records) {
  std::ofstream out(path);
  require(out.good(), "cannot open ", path, " for writing");
  write_header(out, "isomt.phonemes");
  for (const PhonemeRecord& r : records) {
    ordered_json j;
    j["id"] = r.id;
    ordered_json list = ordered_json::array();
    for (const adjust::TimedPhoneme& p : r.phonemes)
      list.push_back(ordered_json{{"label", p.label}, {"frames", p.frames}});
    j["phonemes"] = list;
    j["budget"] = r.budget;
    out << j.dump() << "\n";
  }
  require(out.good(), "write to ", path, " failed");
}

}  // namespace isomt::data
