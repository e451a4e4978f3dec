#pragma once

#include <optional>
#include <span>
#include <vector>

#include "uwbloc/scenario.hpp"

namespace uwbloc {

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr double kBaseFrequencyHz = 5.0;
inline constexpr double kMinFrequencyHz = 0.1;

enum class Regime { predominantly_los, predominantly_nlos };

struct RegimeDecision {
  Regime regime;
  double p_avg;
  double p_th;
};

// Averages the filtered obstruction probabilities of a round; strictly below
// the threshold counts as a predominantly unobstructed round.
RegimeDecision decide_regime(const std::vector<double>& probs,
                             double p_th = kDefaultThreshold);

// Ranging frequency for the unobstructed regime: the base rate divided by the
// integer slowdown floor(p_th / p_avg), clamped to [0.1, 5] Hz. A vanishing
// p_avg means nothing is in the way and the rate drops to the floor; p_avg at
// or above the threshold is module misuse (that regime keeps the base rate).
double update_frequency(double p_avg, double p_th = kDefaultThreshold,
                        double base_hz = kBaseFrequencyHz,
                        double min_hz = kMinFrequencyHz);

// One anchor's standing in the message-health cull. The initiator carries no
// difference measurement of its own, so alpha_s stays empty for it.
struct SelectionItem {
  int anchor_id;
  double p;
  std::optional<double> alpha_s;
};

enum class SelectionVerdict { partially_los, fully_nlos };

struct SelectionResult {
  SelectionVerdict verdict;
  std::vector<int> surviving_ids;    // ascending
  int reference_id = -1;             // -1 when fully_nlos
  std::vector<SelectionItem> tdoas;  // rebased measurements, ascending id
};

// Repeatedly drops the item with the highest probability (ties to the higher
// anchor id) while the mean stays strictly above the threshold and at least
// three items remain. A final set of three or more is localizable
// (partially_los); anything smaller is a write-off (fully_nlos, no
// measurements returned). If the initiator is culled, surviving measurements
// are rebased by differencing onto the healthiest survivor (lowest p, ties to
// the lower anchor id).
SelectionResult select_healthy(const std::vector<SelectionItem>& items,
                               int initiator_id,
                               double p_th = kDefaultThreshold);

enum class Motion { stationary, moving };

// Classifies a window of accelerometer samples by the standard deviation of
// the acceleration magnitude. Short windows report moving as the fail-safe.
Motion motion_gate(std::span<const ImuSample> window,
                   double threshold_mps2 = 0.1);

}  // namespace uwbloc
