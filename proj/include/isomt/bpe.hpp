#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isomt/align.hpp"
#include "isomt/vocab.hpp"

namespace isomt::tok {

// Ordered list of symbol-pair merges. Merges are learned and applied on plain
// UTF-8 character sequences; the "@@" continuation marker is attached only
// when a word is segmented.
struct MergeTable {
  std::vector<std::pair<std::string, std::string>> merges;

  void save(const std::string& path) const;  // one "left right" line per merge
  static MergeTable load(const std::string& path);
};

// Splits a UTF-8 string into code points (as byte strings).
std::vector<std::string> utf8_chars(const std::string& s);

// Learns up to max_merges merges from (word, frequency) counts. The most
// frequent adjacent pair wins each round; ties go to the lexicographically
// smallest pair. Stops early once no adjacent pair is left.
MergeTable train_bpe(const std::vector<std::pair<std::string, long long>>& word_freqs,
                     int max_merges);

// Convenience: whitespace-splits lines, counts words, then trains.
MergeTable train_bpe_lines(const std::vector<std::string>& lines, int max_merges);

// Applies the merge table to one word; non-final pieces carry the "@@" suffix.
std::vector<std::string> segment_word(const std::string& word, const MergeTable& merges);

// How a word's frames are spread over its subword pieces.
enum class Attribution {
  kFinalSubword,  // all frames on the last piece; interior pieces get 0
  kUniform,       // near-equal integer split, remainder on the leading pieces
};

// Token ids, per-token frames and word-final flags for one sentence, with a
// pause token between consecutive words carrying the inter-word silence.
struct AnnotatedTokenSequence {
  std::vector<int> token_ids;
  std::vector<long long> durations;
  std::vector<bool> word_boundary_flags;  // true on the final subword of each word
  std::vector<std::string> tokens;        // surface forms, parallel to token_ids
};

AnnotatedTokenSequence segment_with_pauses(const std::vector<align::WordDuration>& words,
                                           const MergeTable& merges,
                                           const Vocabulary& vocab,
                                           Attribution attribution = Attribution::kFinalSubword);

// Inverse of segmentation for in-vocabulary text: drops control tokens and
// joins "@@"-continued pieces. Unknown ids raise Error.
std::string detokenize(const std::vector<int>& token_ids, const Vocabulary& vocab);

// Registers every subword the merge table can produce from the given words.
void add_segmented_words(Vocabulary& vocab,
                         const std::vector<std::pair<std::string, long long>>& word_freqs,
                         const MergeTable& merges);

}  // namespace isomt::tok
