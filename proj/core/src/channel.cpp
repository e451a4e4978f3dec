#include "uwbloc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "uwbloc/csvio.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc {

namespace {

// Discrete tap response of a single path: sharp rise, short ring-down.
constexpr double kPulse[4] = {1.0, 0.55, 0.28, 0.12};

constexpr int kFpMin = 700;
constexpr int kFpMax = 750;

void add_path(std::vector<double>& taps, int index, double amp) {
  for (int k = 0; k < 4; ++k) {
    int i = index + k;
    if (i >= 0 && i < static_cast<int>(taps.size())) taps[i] += amp * kPulse[k];
  }
}

}  // namespace

ChannelState los_state(const Scenario& scenario, int anchor_id, Vec2 user_xy,
                       double t) {
  const Anchor* a = scenario.cluster.find(anchor_id);
  if (a == nullptr) throw std::invalid_argument("los_state: unknown anchor id");
  // Obstacles are full height, so the 3-D sight line is blocked exactly when
  // its floor projection crosses the footprint.
  Vec2 apos{a->position.x, a->position.y};
  for (const auto& ob : scenario.obstacles) {
    if (!ob.active_at(t)) continue;
    if (segment_intersects_rect(apos, user_xy, ob.footprint))
      return ChannelState::nlos;
  }
  return ChannelState::los;
}

CirFrame synthesize_cir(ChannelState state, double true_distance_m,
                        std::uint64_t seed, const ChannelConfig& cfg,
                        int anchor_id) {
  if (!(true_distance_m > 0.0))
    throw std::invalid_argument("synthesize_cir: distance must be positive");

  Rng rng(seed);
  CirFrame f;
  f.anchor_id = anchor_id;
  f.truth = state;
  f.taps.assign(kCirTaps, 0.0);
  f.fp_index = rng.uniform_int(kFpMin, kFpMax);

  // Free-space style amplitude roll-off with log-normal shadowing, so far
  // links produce genuinely harder frames than near ones.
  double amp = cfg.amp_ref / std::max(true_distance_m, 0.5);
  amp *= std::exp(rng.normal(0.0, cfg.shadowing_sigma));

  const int fp = f.fp_index;
  if (state == ChannelState::los) {
    add_path(f.taps, fp, amp);
    int n_minor = rng.uniform_int(2, 4);
    for (int i = 0; i < n_minor; ++i) {
      int delay = rng.uniform_int(3, 25);
      double a = amp * rng.uniform(0.15, 0.8);
      add_path(f.taps, fp + delay, a);
    }
    for (int d = 1; d <= 120 && fp + d < kCirTaps; ++d) {
      double env = 0.22 * amp * std::exp(-d / cfg.tau_los);
      f.taps[fp + d] += env * std::fabs(rng.normal());
    }
  } else {
    double att = rng.uniform(0.2, 0.5);
    add_path(f.taps, fp, att * amp);
    int main_delay = rng.uniform_int(5, 30);
    double main_amp = amp * rng.uniform(0.75, 1.0);
    add_path(f.taps, fp + main_delay, main_amp);
    int n_dense = rng.uniform_int(6, 12);
    for (int i = 0; i < n_dense; ++i) {
      int delay = rng.uniform_int(3, 70);
      double a = amp * rng.uniform(0.1, 0.5);
      add_path(f.taps, fp + delay, a);
    }
    for (int d = 1; d <= 200 && fp + d < kCirTaps; ++d) {
      double env = 0.25 * amp * std::exp(-d / cfg.tau_nlos);
      f.taps[fp + d] += env * std::fabs(rng.normal());
    }
  }

  for (auto& tap : f.taps) tap += rng.rayleigh(cfg.noise_sigma);

  f.max_noise = 0.0;
  for (int i = 0; i < fp - 5; ++i) f.max_noise = std::max(f.max_noise, f.taps[i]);

  // Enforce the detector-level class signature: a LOS frame peaks at the
  // first path, an NLOS frame peaks at a clearly delayed reflection. Random
  // pile-ups that would blur that line are capped, which keeps the frames
  // rich without breaking the labels.
  if (state == ChannelState::los) {
    double cap = 0.95 * f.taps[fp];
    for (int i = fp + 3; i < kCirTaps; ++i) f.taps[i] = std::min(f.taps[i], cap);
  } else {
    double peak = 0.0;
    for (int i = fp + 5; i < kCirTaps; ++i) peak = std::max(peak, f.taps[i]);
    double cap = 0.85 * peak;
    for (int i = 0; i < fp + 5; ++i) f.taps[i] = std::min(f.taps[i], cap);
  }
  return f;
}

std::optional<RangingRound> measure_round(const Scenario& scenario,
                                          Vec2 user_xy, double t, int round_id,
                                          std::uint64_t master_seed,
                                          const ChannelConfig& cfg) {
  const Cluster& cluster = scenario.cluster;
  const Anchor& init = cluster.initiator();
  const Vec3 user{user_xy.x, user_xy.y, kUserHeight};

  RangingRound round;
  round.round_id = round_id;
  round.t = t;

  double d_init = distance3(init.position, user);
  ChannelState init_state = los_state(scenario, init.id, user_xy, t);

  // Whether each anchor was heard at all.
  std::vector<char> heard(cluster.anchors.size(), 0);
  for (std::size_t i = 0; i < cluster.anchors.size(); ++i) {
    const Anchor& a = cluster.anchors[i];
    ChannelState st = los_state(scenario, a.id, user_xy, t);
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(round_id),
                        static_cast<std::uint64_t>(a.id)));
    double p_out =
        st == ChannelState::los ? cfg.outage_los : cfg.outage_nlos;
    heard[i] = rng.bernoulli(p_out) ? 0 : 1;
    if (a.id == init.id && !heard[i]) return std::nullopt;
  }

  // The initiator's own excess first-path delay shifts the reference arrival
  // and therefore biases every difference of the round by the same amount.
  double common_bias_s = 0.0;
  if (init_state == ChannelState::nlos) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(round_id),
                        0x1d1a ^ static_cast<std::uint64_t>(init.id)));
    common_bias_s = rng.exponential(cfg.nlos_bias_mean_ns) * 1e-9;
  }

  for (std::size_t i = 0; i < cluster.anchors.size(); ++i) {
    if (!heard[i]) continue;
    const Anchor& a = cluster.anchors[i];
    ChannelState st = los_state(scenario, a.id, user_xy, t);
    double d = distance3(a.position, user);

    std::uint64_t frame_seed =
        derive_seed(master_seed, static_cast<std::uint64_t>(round_id),
                    0xf0f0 ^ static_cast<std::uint64_t>(a.id));
    round.frames.push_back(synthesize_cir(st, d, frame_seed, cfg, a.id));

    if (a.id == init.id) continue;
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(round_id),
                        0x7d0a ^ static_cast<std::uint64_t>(a.id)));
    double eps_s = 0.0;
    if (st == ChannelState::los) {
      eps_s = rng.normal(0.0, cfg.sigma_los_ns) * 1e-9;
    } else {
      eps_s = rng.normal(0.0, cfg.sigma_nlos_ns) * 1e-9 +
              rng.exponential(cfg.nlos_bias_mean_ns) * 1e-9;
    }
    TdoaMeasurement m;
    m.anchor_id = a.id;
    m.alpha_s = (d - d_init) / kSpeedOfLight + eps_s - common_bias_s;
    round.tdoas.push_back(m);
  }
  return round;
}

void write_corpus_header(std::ostream& out) {
  out << "round_id,anchor_id,fp_index,max_noise,label";
  for (int i = 0; i < kCirTaps; ++i) out << ",tap_" << i;
  out << "\n";
}

void write_corpus_row(std::ostream& out, int round_id, const CirFrame& f) {
  // Full precision: training must see exactly what the generator produced.
  out << round_id << ',' << f.anchor_id << ',' << f.fp_index << ','
      << format_full(f.max_noise) << ','
      << (f.truth == ChannelState::los ? "LOS" : "NLOS");
  for (double tap : f.taps) out << ',' << format_full(tap);
  out << "\n";
}

}  // namespace uwbloc
