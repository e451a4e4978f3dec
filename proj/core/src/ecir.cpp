#include "uwbloc/ecir.hpp"

#include <stdexcept>

namespace uwbloc {

ECir extract_ecir(const CirFrame& frame) {
  if (frame.taps.size() != static_cast<std::size_t>(kCirTaps))
    throw std::invalid_argument("extract_ecir: frame must have 1016 taps");
  if (frame.fp_index < 0 || frame.fp_index >= kCirTaps)
    throw std::invalid_argument("extract_ecir: fp_index out of range");

  ECir e;
  e.fp_index = frame.fp_index;
  e.values.assign(kECirLength, 0.0);
  double peak = 0.0;
  for (int i = 0; i < kECirLength; ++i) {
    int src = frame.fp_index + i;
    if (src >= kCirTaps) break;
    e.values[i] = frame.taps[src];
    if (e.values[i] > peak) peak = e.values[i];
  }
  e.scale = peak;
  if (peak > 0.0)
    for (auto& v : e.values) v /= peak;
  return e;
}

}  // namespace uwbloc
