#pragma once

#include <string>
#include <vector>

#include "isomt/common.hpp"

namespace isomt {

// One labelled time interval inside a TextGrid tier. Silence is stored with
// an empty label.
struct Interval {
  std::string label;
  double xmin = 0.0;
  double xmax = 0.0;
};

struct Tier {
  std::string name;
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<Interval> intervals;
};

struct TextGrid {
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<Tier> tiers;

  bool has_tier(const std::string& name) const;
  // Throws Error if no tier with that name exists.
  const Tier& tier(const std::string& name) const;
};

// Parses a Praat TextGrid document, long or short text form. Interval tiers
// are returned with their intervals sorted by start time; point tiers are
// skipped. Boundary violations (xmax <= xmin, overlapping intervals) and
// structural problems raise Error naming the offending line and tier.
TextGrid parse_textgrid(const std::string& document);

// Long-form writer. parse_textgrid(write_textgrid(g)) reproduces g; used to
// build test fixtures.
std::string write_textgrid(const TextGrid& grid);

}  // namespace isomt
