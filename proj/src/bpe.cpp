#include "isomt/bpe.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace isomt::tok {

void MergeTable::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "MergeTable: cannot open ", path, " for writing");
  for (const auto& [a, b] : merges) os << a << ' ' << b << '\n';
  require(os.good(), "MergeTable: write to ", path, " failed");
}

MergeTable MergeTable::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "MergeTable: cannot open ", path);
  MergeTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t sp = line.find(' ');
    require(sp != std::string::npos && sp > 0 && sp + 1 < line.size(), "MergeTable: ", path,
            ":", lineno, ": expected \"left right\"");
    t.merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  return t;
}

std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> out;
  for (size_t i = 0; i < s.size();) {
    size_t len = 1;
    unsigned char b = static_cast<unsigned char>(s[i]);
    if ((b & 0x80) == 0x00)
      len = 1;
    else if ((b & 0xE0) == 0xC0)
      len = 2;
    else if ((b & 0xF0) == 0xE0)
      len = 3;
    else if ((b & 0xF8) == 0xF0)
      len = 4;
    if (i + len > s.size()) len = 1;  // tolerate stray bytes
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

namespace {

// One in-place pass replacing every non-overlapping (a,b) occurrence, left to
// right, with the concatenation.
void apply_merge(std::vector<std::string>& symbols, const std::string& a,
                 const std::string& b) {
  size_t w = 0;
  for (size_t r = 0; r < symbols.size();) {
    if (r + 1 < symbols.size() && symbols[r] == a && symbols[r + 1] == b) {
      symbols[w++] = a + b;
      r += 2;
    } else {
      if (w != r) symbols[w] = std::move(symbols[r]);  // self-move would clear
      ++w;
      r += 1;
    }
  }
  symbols.resize(w);
}

std::vector<std::string> apply_table(const std::string& word, const MergeTable& merges) {
  std::vector<std::string> symbols = utf8_chars(word);
  for (const auto& [a, b] : merges.merges) {
    if (symbols.size() < 2) break;
    apply_merge(symbols, a, b);
  }
  return symbols;
}

}  // namespace

MergeTable train_bpe(const std::vector<std::pair<std::string, long long>>& word_freqs,
                     int max_merges) {
  require(!word_freqs.empty(), "train_bpe: empty corpus");
  require(max_merges >= 0, "train_bpe: negative merge count");
  std::vector<std::pair<std::vector<std::string>, long long>> words;
  words.reserve(word_freqs.size());
  for (const auto& [w, f] : word_freqs) {
    require(f > 0, "train_bpe: non-positive frequency for \"", w, "\"");
    words.emplace_back(utf8_chars(w), f);
  }
  MergeTable table;
  for (int m = 0; m < max_merges; ++m) {
    // std::map keeps pairs in lexicographic order, which settles ties.
    std::map<std::pair<std::string, std::string>, long long> counts;
    for (const auto& [symbols, freq] : words)
      for (size_t i = 0; i + 1 < symbols.size(); ++i)
        counts[{symbols[i], symbols[i + 1]}] += freq;
    if (counts.empty()) break;
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it;
    const auto& [a, b] = best->first;
    table.merges.emplace_back(a, b);
    for (auto& [symbols, freq] : words) apply_merge(symbols, a, b);
  }
  return table;
}

MergeTable train_bpe_lines(const std::vector<std::string>& lines, int max_merges) {
  std::map<std::string, long long> freq;
  for (const std::string& line : lines) {
    std::istringstream is(line);
    std::string w;
    while (is >> w) ++freq[w];
  }
  std::vector<std::pair<std::string, long long>> word_freqs(freq.begin(), freq.end());
  return train_bpe(word_freqs, max_merges);
}

std::vector<std::string> segment_word(const std::string& word, const MergeTable& merges) {
  require(!word.empty(), "segment_word: empty word");
  std::vector<std::string> pieces = apply_table(word, merges);
  for (size_t i = 0; i + 1 < pieces.size(); ++i) pieces[i] += "@@";
  return pieces;
}

AnnotatedTokenSequence segment_with_pauses(const std::vector<align::WordDuration>& words,
                                           const MergeTable& merges,
                                           const Vocabulary& vocab,
                                           Attribution attribution) {
  require(!words.empty(), "segment_with_pauses: empty word list");
  AnnotatedTokenSequence out;
  for (size_t w = 0; w < words.size(); ++w) {
    if (w > 0) {
      out.token_ids.push_back(Vocabulary::kPause);
      out.durations.push_back(words[w - 1].trailing_pause_frames);
      out.word_boundary_flags.push_back(false);
      out.tokens.push_back(vocab.token(Vocabulary::kPause));
    }
    std::vector<std::string> pieces = segment_word(words[w].word, merges);
    size_t n = pieces.size();
    for (size_t p = 0; p < n; ++p) {
      long long frames = 0;
      if (attribution == Attribution::kFinalSubword) {
        if (p + 1 == n) frames = words[w].frames;
      } else {
        long long base = words[w].frames / static_cast<long long>(n);
        long long rem = words[w].frames % static_cast<long long>(n);
        frames = base + (static_cast<long long>(p) < rem ? 1 : 0);
      }
      out.token_ids.push_back(vocab.id(pieces[p]));
      out.durations.push_back(frames);
      out.word_boundary_flags.push_back(p + 1 == n);
      out.tokens.push_back(pieces[p]);
    }
  }
  return out;
}

std::string detokenize(const std::vector<int>& token_ids, const Vocabulary& vocab) {
  std::string out;
  bool continuing = false;
  for (int id : token_ids) {
    const std::string& tok = vocab.token(id);  // validates the id
    // Control tokens leave no surface text; <unk> stays visible.
    if (id < Vocabulary::kReserved && id != Vocabulary::kUnk) continue;
    bool cont = tok.size() > 2 && tok.compare(tok.size() - 2, 2, "@@") == 0;
    std::string piece = cont ? tok.substr(0, tok.size() - 2) : tok;
    if (!continuing && !out.empty()) out += ' ';
    out += piece;
    continuing = cont;
  }
  return out;
}

void add_segmented_words(Vocabulary& vocab,
                         const std::vector<std::pair<std::string, long long>>& word_freqs,
                         const MergeTable& merges) {
  for (const auto& [w, f] : word_freqs) {
    (void)f;
    for (const std::string& piece : segment_word(w, merges)) vocab.add(piece);
  }
}

}  // namespace isomt::tok
