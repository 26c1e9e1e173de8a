#include "isomt/vocab.hpp"

#include <fstream>

namespace isomt::tok {

namespace {
const char* kReservedTokens[Vocabulary::kReserved] = {
    "<pad>", "<s>", "</s>", "<unk>", "[P]", "<short>", "<normal>", "<long>"};
}

Vocabulary::Vocabulary() {
  for (const char* t : kReservedTokens) add(t);
}

int Vocabulary::add(const std::string& token) {
  require(!token.empty(), "Vocabulary: empty token");
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.count(token) != 0;
}

const std::string& Vocabulary::token(int id) const {
  require(id >= 0 && id < size(), "Vocabulary: id ", id, " out of range [0, ", size(), ")");
  return tokens_[static_cast<size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "Vocabulary: cannot open ", path, " for writing");
  for (size_t i = 0; i < tokens_.size(); ++i) os << tokens_[i] << '\t' << i << '\n';
  require(os.good(), "Vocabulary: write to ", path, " failed");
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "Vocabulary: cannot open ", path);
  Vocabulary v;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t tab = line.rfind('\t');
    require(tab != std::string::npos, "Vocabulary: ", path, ":", lineno, ": missing tab");
    std::string token = line.substr(0, tab);
    int id = 0;
    try {
      id = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      fail("Vocabulary: ", path, ":", lineno, ": bad id field");
    }
    if (id < kReserved) {
      require(id == lineno - 1 && token == kReservedTokens[id], "Vocabulary: ", path, ":",
              lineno, ": reserved id ", id, " must map to ", kReservedTokens[id]);
    } else {
      require(id == v.size(), "Vocabulary: ", path, ":", lineno,
              ": ids must be contiguous, expected ", v.size(), " got ", id);
      int got = v.add(token);
      require(got == id, "Vocabulary: ", path, ":", lineno, ": duplicate token \"", token,
              "\"");
    }
  }
  require(v.size() >= kReserved, "Vocabulary: ", path, ": truncated reserved block");
  return v;
}

}  // namespace isomt::tok
