#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "uwbloc/scenario.hpp"

namespace uwbloc {

inline constexpr int kCirTaps = 1016;
inline constexpr double kTapSeconds = 1e-9;
inline constexpr double kSpeedOfLight = 299792458.0;

enum class ChannelState { los, nlos };

// Raw accumulator frame as the radio reports it for one heard anchor.
struct CirFrame {
  int anchor_id = 0;
  int fp_index = 0;        // detected first-path tap
  double max_noise = 0.0;  // reported noise-floor amplitude
  ChannelState truth = ChannelState::los;  // generator label
  std::vector<double> taps;                // kCirTaps, non-negative
};

// Arrival-time difference between one responder and the initiator.
struct TdoaMeasurement {
  int anchor_id = 0;
  double alpha_s = 0.0;
};

struct RangingRound {
  int round_id = 0;
  double t = 0.0;
  std::vector<CirFrame> frames;        // one per heard anchor
  std::vector<TdoaMeasurement> tdoas;  // one per heard responder
};

struct ChannelConfig {
  // CIR synthesis
  double amp_ref = 3.0;           // first-path amplitude at 1 m range
  double shadowing_sigma = 0.35;  // log-normal spread of the frame amplitude
  double noise_sigma = 0.035;     // Rayleigh scale of the thermal floor
  double tau_los = 15.0;          // tail decay, taps
  double tau_nlos = 40.0;
  // Arrival-time errors
  double sigma_los_ns = 0.1;
  double sigma_nlos_ns = 0.5;
  double nlos_bias_mean_ns = 1.0;
  // Frame loss
  double outage_los = 0.02;
  double outage_nlos = 0.25;
};

// LOS unless the 3-D sight line from the anchor down to the user's tag
// crosses an obstacle that is active at time t.
ChannelState los_state(const Scenario& scenario, int anchor_id, Vec2 user_xy,
                       double t);

// One accumulator frame for a link in the given state at the given range.
CirFrame synthesize_cir(ChannelState state, double true_distance_m,
                        std::uint64_t seed, const ChannelConfig& cfg = {},
                        int anchor_id = 0);

// One downlink round at time t: every anchor transmits, the listener may
// miss frames. Missing the initiator frame loses the whole round.
std::optional<RangingRound> measure_round(const Scenario& scenario,
                                          Vec2 user_xy, double t, int round_id,
                                          std::uint64_t master_seed,
                                          const ChannelConfig& cfg = {});

// Labeled frame corpus, one frame per row:
// round_id, anchor_id, fp_index, max_noise, label, tap_0..tap_1015
void write_corpus_header(std::ostream& out);
void write_corpus_row(std::ostream& out, int round_id, const CirFrame& frame);

}  // namespace uwbloc
