#pragma once

#include <vector>

#include "uwbloc/channel.hpp"

namespace uwbloc {

inline constexpr int kECirLength = 200;

// Classifier input: the first-path-aligned slice of an accumulator frame.
struct ECir {
  std::vector<double> values;  // kECirLength, peak-normalized
  int fp_index = 0;
  double scale = 0.0;  // window maximum before normalization
};

// Cuts taps[fp_index .. fp_index + 200), zero-pads past the frame end and
// normalizes the window to a unit peak. An all-zero window stays all zero.
ECir extract_ecir(const CirFrame& frame);

}  // namespace uwbloc
