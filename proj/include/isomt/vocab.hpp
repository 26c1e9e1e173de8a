#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "isomt/common.hpp"

namespace isomt::tok {

// Bidirectional token<->id map. The low ids are reserved and identical in
// every vocabulary; subword merges can never produce them because they all
// contain characters the BPE alphabet treats as plain symbols inside a
// bracketed/angled wrapper that never occurs inside corpus words.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kPause = 4;
  static constexpr int kShort = 5;
  static constexpr int kNormal = 6;
  static constexpr int kLong = 7;
  static constexpr int kReserved = 8;

  Vocabulary();

  // Returns the existing id when the token is already present.
  int add(const std::string& token);

  // Id lookup; unknown tokens map to kUnk.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const;

  // Reverse lookup; out-of-range ids raise Error.
  const std::string& token(int id) const;

  int size() const { return static_cast<int>(tokens_.size()); }

  // One "token\tid" line per entry, in id order.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace isomt::tok
