#include "isomt/textgrid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace isomt {

bool TextGrid::has_tier(const std::string& name) const {
  for (const auto& t : tiers)
    if (t.name == name) return true;
  return false;
}

const Tier& TextGrid::tier(const std::string& name) const {
  for (const auto& t : tiers)
    if (t.name == name) return t;
  fail("TextGrid has no tier named \"", name, "\"");
}

namespace {

enum class TokKind { Number, String, Flag };

struct Token {
  TokKind kind;
  std::string text;
  double number = 0.0;
  int line = 0;
};

// Reduces a TextGrid document (long or short form) to its data tokens:
// numbers, quoted strings and <flags>. Keys, '=', ':' and bracketed indices
// carry no information and are dropped, which makes the two forms identical.
std::vector<Token> tokenize(const std::string& doc) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1;
  auto parse_err = [&](const std::string& msg) {
    fail("TextGrid parse error at line ", line, ": ", msg);
  };
  while (i < doc.size()) {
    char c = doc[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '"') {
      ++i;
      std::string s;
      bool closed = false;
      while (i < doc.size()) {
        if (doc[i] == '"') {
          if (i + 1 < doc.size() && doc[i + 1] == '"') {  // "" escapes a quote
            s.push_back('"');
            i += 2;
          } else {
            ++i;
            closed = true;
            break;
          }
        } else {
          if (doc[i] == '\n') ++line;
          s.push_back(doc[i]);
          ++i;
        }
      }
      if (!closed) parse_err("unterminated string");
      out.push_back({TokKind::String, s, 0.0, line});
    } else if (c == '<') {
      size_t j = doc.find('>', i);
      if (j == std::string::npos) parse_err("unterminated <...> flag");
      out.push_back({TokKind::Flag, doc.substr(i + 1, j - i - 1), 0.0, line});
      i = j + 1;
    } else if (c == '[') {
      size_t j = doc.find(']', i);
      if (j == std::string::npos) parse_err("unterminated [ index");
      i = j + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
               c == '.') {
      size_t j = i;
      while (j < doc.size() &&
             (std::isdigit(static_cast<unsigned char>(doc[j])) || doc[j] == '.' ||
              doc[j] == '-' || doc[j] == '+' || doc[j] == 'e' || doc[j] == 'E'))
        ++j;
      std::string text = doc.substr(i, j - i);
      char* end = nullptr;
      double v = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size()) parse_err("bad number '" + text + "'");
      out.push_back({TokKind::Number, text, v, line});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '?') {
      while (i < doc.size() &&
             (std::isalnum(static_cast<unsigned char>(doc[i])) || doc[i] == '_' ||
              doc[i] == '?'))
        ++i;  // keyword; no data
    } else if (c == '=' || c == ':' || c == ';' || c == ',') {
      ++i;
    } else {
      parse_err(std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

class TokenReader {
 public:
  explicit TokenReader(std::vector<Token> toks) : toks_(std::move(toks)) {}

  bool done() const { return pos_ >= toks_.size(); }
  const Token* peek() const { return done() ? nullptr : &toks_[pos_]; }
  int line() const { return toks_.empty() ? 1 : toks_[std::min(pos_, toks_.size() - 1)].line; }

  double number(const std::string& what, const std::string& tier) {
    const Token& t = take(what, tier);
    if (t.kind != TokKind::Number)
      fail("TextGrid parse error at line ", t.line, context(tier), ": expected ", what,
           " (a number), got \"", t.text, "\"");
    return t.number;
  }

  std::string string(const std::string& what, const std::string& tier) {
    const Token& t = take(what, tier);
    if (t.kind != TokKind::String)
      fail("TextGrid parse error at line ", t.line, context(tier), ": expected ", what,
           " (a string), got \"", t.text, "\"");
    return t.text;
  }

  const Token& take(const std::string& what, const std::string& tier) {
    if (done())
      fail("TextGrid parse error at line ", line(), context(tier),
           ": unexpected end of document while reading ", what);
    return toks_[pos_++];
  }

 private:
  static std::string context(const std::string& tier) {
    return tier.empty() ? "" : " in tier \"" + tier + "\"";
  }
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

void validate_tier(const Tier& tier, int line) {
  for (size_t k = 0; k < tier.intervals.size(); ++k) {
    const Interval& iv = tier.intervals[k];
    if (!(iv.xmax > iv.xmin))
      fail("TextGrid parse error near line ", line, ": interval ", k + 1, " of tier \"",
           tier.name, "\" has xmax <= xmin (", iv.xmin, ", ", iv.xmax, ")");
    if (k > 0 && iv.xmin < tier.intervals[k - 1].xmax - 1e-9)
      fail("TextGrid parse error near line ", line, ": intervals ", k, " and ", k + 1,
           " of tier \"", tier.name, "\" overlap");
  }
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string escape_label(const std::string& s) {
  std::string out;
  for (char c : s) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  return out;
}

}  // namespace

TextGrid parse_textgrid(const std::string& document) {
  TokenReader r(tokenize(document));

  std::string file_type = r.string("the file-type header", "");
  if (file_type != "ooTextFile")
    fail("TextGrid parse error at line 1: file type is \"", file_type,
         "\", expected \"ooTextFile\"");
  std::string object_class = r.string("the object-class header", "");
  if (object_class != "TextGrid")
    fail("TextGrid parse error at line 1: object class is \"", object_class,
         "\", expected \"TextGrid\"");

  TextGrid grid;
  grid.xmin = r.number("global xmin", "");
  grid.xmax = r.number("global xmax", "");

  const Token* next = r.peek();
  if (next && next->kind == TokKind::Flag) {
    std::string flag = r.take("tiers flag", "").text;
    if (flag == "absent") return grid;  // no tiers at all
    if (flag != "exists")
      fail("TextGrid parse error at line ", r.line(), ": unknown tiers flag <", flag, ">");
  }
  long n_tiers = static_cast<long>(r.number("the tier count", ""));
  if (n_tiers < 0) fail("TextGrid parse error: negative tier count");

  for (long t = 0; t < n_tiers; ++t) {
    int tier_start_line = r.line();
    std::string cls = r.string("a tier class", "");
    std::string name = r.string("the tier name", "");
    if (cls == "IntervalTier") {
      Tier tier;
      tier.name = name;
      tier.xmin = r.number("tier xmin", name);
      tier.xmax = r.number("tier xmax", name);
      long n = static_cast<long>(r.number("the interval count", name));
      if (n < 0) fail("TextGrid parse error: negative interval count in tier \"", name, "\"");
      tier.intervals.reserve(static_cast<size_t>(n));
      for (long k = 0; k < n; ++k) {
        Interval iv;
        iv.xmin = r.number("interval xmin", name);
        iv.xmax = r.number("interval xmax", name);
        iv.label = r.string("interval text", name);
        tier.intervals.push_back(std::move(iv));
      }
      validate_tier(tier, tier_start_line);
      grid.tiers.push_back(std::move(tier));
    } else if (cls == "TextTier") {
      // Point tier: consume and drop; only interval tiers carry durations.
      r.number("tier xmin", name);
      r.number("tier xmax", name);
      long n = static_cast<long>(r.number("the point count", name));
      for (long k = 0; k < n; ++k) {
        r.number("point time", name);
        r.string("point text", name);
      }
    } else {
      fail("TextGrid parse error at line ", tier_start_line, ": unknown tier class \"", cls,
           "\"");
    }
  }
  return grid;
}

std::string write_textgrid(const TextGrid& grid) {
  std::ostringstream os;
  os << "File type = \"ooTextFile\"\n";
  os << "Object class = \"TextGrid\"\n\n";
  os << "xmin = " << format_double(grid.xmin) << "\n";
  os << "xmax = " << format_double(grid.xmax) << "\n";
  if (grid.tiers.empty()) {
    os << "tiers? <absent>\n";
    return os.str();
  }
  os << "tiers? <exists>\n";
  os << "size = " << grid.tiers.size() << "\n";
  os << "item []:\n";
  for (size_t t = 0; t < grid.tiers.size(); ++t) {
    const Tier& tier = grid.tiers[t];
    os << "    item [" << t + 1 << "]:\n";
    os << "        class = \"IntervalTier\"\n";
    os << "        name = \"" << escape_label(tier.name) << "\"\n";
    os << "        xmin = " << format_double(tier.xmin) << "\n";
    os << "        xmax = " << format_double(tier.xmax) << "\n";
    os << "        intervals: size = " << tier.intervals.size() << "\n";
    for (size_t k = 0; k < tier.intervals.size(); ++k) {
      const Interval& iv = tier.intervals[k];
      os << "        intervals [" << k + 1 << "]:\n";
      os << "            xmin = " << format_double(iv.xmin) << "\n";
      os << "            xmax = " << format_double(iv.xmax) << "\n";
      os << "            text = \"" << escape_label(iv.label) << "\"\n";
    }
  }
  return os.str();
}

}  // namespace isomt
