#include "uwbloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "uwbloc/csvio.hpp"
#include "uwbloc/ecir.hpp"
#include "uwbloc/errors.hpp"
#include "uwbloc/nlos.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::proposed:
      return "proposed";
    case Variant::baseline_static_ls:
      return "baseline_static_ls";
    case Variant::baseline_kf:
      return "baseline_kf";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "proposed") return Variant::proposed;
  if (name == "baseline_static_ls") return Variant::baseline_static_ls;
  if (name == "baseline_kf") return Variant::baseline_kf;
  throw config_error("unknown variant '" + name + "'");
}

namespace {

// Integrates listening rate and inference counts into fixed ranging blocks.
// Tick boundaries do not align with block boundaries, so rate segments are
// split where they straddle one.
class BlockAccumulator {
 public:
  BlockAccumulator(double block_s, double total_s)
      : block_s_(block_s),
        n_(std::max(1, static_cast<int>(std::ceil(total_s / block_s - 1e-9)))),
        f_time_(n_, 0.0),
        coverage_(n_, 0.0),
        cnn_(n_, 0),
        rnn_(n_, 0) {}

  void add_rate(double t0, double t1, double f) {
    while (t0 < t1 - 1e-12) {
      int b = block_of(t0);
      double block_end = (b + 1) * block_s_;
      double seg = std::min(t1, block_end) - t0;
      if (seg <= 0.0) break;
      f_time_[b] += f * seg;
      coverage_[b] += seg;
      t0 += seg;
    }
  }
  void add_cnn(double t, int count) { cnn_[block_of(t)] += count; }
  void add_rnn(double t) { ++rnn_[block_of(t)]; }

  void flush(PowerLedger& ledger, double& mean_f_out) const {
    double f_total = 0.0, time_total = 0.0;
    for (int b = 0; b < n_; ++b) {
      if (coverage_[b] <= 0.0) continue;
      ledger.add_block(b * block_s_, f_time_[b] / coverage_[b], cnn_[b],
                       rnn_[b]);
      f_total += f_time_[b];
      time_total += coverage_[b];
    }
    mean_f_out = time_total > 0.0 ? f_total / time_total : 0.0;
  }

 private:
  int block_of(double t) const {
    return std::clamp(static_cast<int>(t / block_s_ + 1e-9), 0, n_ - 1);
  }
  double block_s_;
  int n_;
  std::vector<double> f_time_, coverage_;
  std::vector<int> cnn_, rnn_;
};

struct ErrorStats {
  double sum_sq = 0.0, sum_abs = 0.0, max_e = 0.0;
  long n = 0;
  void add(Vec2 truth, Vec2 est) {
    double dx = est.x - truth.x, dy = est.y - truth.y;
    double e2 = dx * dx + dy * dy;
    sum_sq += e2;
    double e = std::sqrt(e2);
    sum_abs += e;
    max_e = std::max(max_e, e);
    ++n;
  }
};

// Constant-velocity Kalman tracker fed with least-squares fixes; the crude
// comparison baseline, not part of the adaptive pipeline.
class CvKalman {
 public:
  CvKalman(double q, double r_std) : q_(q), r2_(r_std * r_std) {}

  bool initialized() const { return init_; }
  Vec2 position() const { return {x_[0], x_[1]}; }

  void init(Vec2 z) {
    x_[0] = z.x;
    x_[1] = z.y;
    x_[2] = x_[3] = 0.0;
    for (auto& row : p_) row.fill(0.0);
    p_[0][0] = p_[1][1] = 0.01;
    p_[2][2] = p_[3][3] = 1.0;
    init_ = true;
  }

  void predict(double dt) {
    if (!init_) return;
    x_[0] += dt * x_[2];
    x_[1] += dt * x_[3];
    // P = F P F^T + Q for the block-diagonal constant-velocity form
    double p00 = p_[0][0] + dt * (p_[2][0] + p_[0][2]) + dt * dt * p_[2][2];
    double p02 = p_[0][2] + dt * p_[2][2];
    double p11 = p_[1][1] + dt * (p_[3][1] + p_[1][3]) + dt * dt * p_[3][3];
    double p13 = p_[1][3] + dt * p_[3][3];
    p_[0][0] = p00 + q_ * dt * dt * dt / 3.0;
    p_[0][2] = p_[2][0] = p02 + q_ * dt * dt / 2.0;
    p_[1][1] = p11 + q_ * dt * dt * dt / 3.0;
    p_[1][3] = p_[3][1] = p13 + q_ * dt * dt / 2.0;
    p_[2][2] += q_ * dt;
    p_[3][3] += q_ * dt;
  }

  void update(Vec2 z) {
    if (!init_) {
      init(z);
      return;
    }
    // Measurement picks the two position components; axes stay decoupled in
    // this filter, so update each pair (pos, vel) independently.
    update_axis(0, 2, z.x);
    update_axis(1, 3, z.y);
  }

 private:
  void update_axis(int ip, int iv, double z) {
    double s = p_[ip][ip] + r2_;
    double kp = p_[ip][ip] / s;
    double kv = p_[iv][ip] / s;
    double y = z - x_[ip];
    x_[ip] += kp * y;
    x_[iv] += kv * y;
    double ppp = p_[ip][ip], ppv = p_[ip][iv];
    p_[ip][ip] = (1.0 - kp) * ppp;
    p_[ip][iv] = p_[iv][ip] = (1.0 - kp) * ppv;
    p_[iv][iv] -= kv * ppv;
  }

  double q_, r2_;
  double x_[4] = {0, 0, 0, 0};
  std::array<std::array<double, 4>, 4> p_{};
  bool init_ = false;
};

}  // namespace

RunMetrics run(const Scenario& scenario, Variant variant,
               const PipelineModels& models, const PipelineConfig& config) {
  if (variant == Variant::proposed &&
      (!models.nlos_prob || models.predictor == nullptr))
    throw config_error("proposed variant needs both trained models");
  const Cluster& cluster = scenario.cluster;
  const int initiator_id = cluster.initiator().id;

  std::vector<int> responder_ids;
  for (const Anchor& a : cluster.anchors)
    if (a.id != initiator_id) responder_ids.push_back(a.id);
  std::map<int, int> column_of;
  for (size_t i = 0; i < responder_ids.size(); ++i)
    column_of[responder_ids[i]] = static_cast<int>(i);
  const int n_resp = static_cast<int>(responder_ids.size());

  const uint64_t master = config.seed.value_or(scenario.seed);
  std::vector<ImuSample> imu = synthesize_imu(
      scenario.trajectory, scenario.duration_s, derive_seed(master, 0x1b10, 0));
  const long n_ticks = static_cast<long>(imu.size());
  const int gate_window =
      std::max(1, static_cast<int>(std::lround(config.motion_window_s *
                                               kImuRateHz)));

  RunMetrics m;
  m.variant = variant_name(variant);
  m.scenario_fingerprint = scenario_fingerprint(scenario);
  m.seed = master;
  m.duration_s = scenario.duration_s;
  m.ticks = n_ticks;
  m.tick_log.reserve(n_ticks);
  m.power = PowerLedger(config.power);

  BlockAccumulator blocks(config.block_s, n_ticks * kTickSeconds);
  ErrorStats stats;

  double f_dyn = config.base_hz;
  double next_due = 0.0;
  NlosLpf lpf(config.lpf_weight);
  FeatureTimeline timeline(std::max(1, n_resp));
  std::vector<double> held(n_resp, 0.0);
  std::optional<Vec2> last_fix;
  std::optional<PredictionWindow> window;
  Vec2 guess = cluster.centroid_xy();
  CvKalman kalman(0.5, 0.05);
  if (models.predictor) models.predictor->reset();
  int round_id = 0;

  for (long k = 0; k < n_ticks; ++k) {
    const double t = k * kTickSeconds;
    const Vec2 truth = scenario.trajectory.position_at(
        std::min(t, scenario.trajectory.end_time()));

    bool gated = false;
    if (variant == Variant::proposed) {
      long w0 = std::max<long>(0, k - gate_window + 1);
      std::span<const ImuSample> win_span(imu.data() + w0,
                                          static_cast<size_t>(k - w0 + 1));
      gated = motion_gate(win_span) == Motion::stationary;
      if (gated) ++m.gated_ticks;
    }

    bool solved = false;
    PositionEstimate fix;
    bool round_exec = false;
    if (!gated && t + 1e-9 >= next_due) {
      const double due = next_due;
      std::optional<RangingRound> round =
          measure_round(scenario, truth, t, round_id, master, config.channel);
      ++round_id;
      ++m.ranging_rounds;
      round_exec = true;

      // Degenerate geometry (a collinear survivor subset) surfaces as
      // invalid_argument; both that and non-convergence just mean no fix
      // this round.
      auto try_solve = [&](int ref_id, const std::vector<TdoaMeasurement>& td) {
        if (td.size() < 2) return;
        try {
          fix = solve_tdoa(cluster, ref_id, td, guess, t, config.solver);
          solved = true;
        } catch (const numerical_error&) {
          ++m.solver_failures;
        } catch (const std::invalid_argument&) {
          ++m.solver_failures;
        }
      };

      if (variant == Variant::proposed) {
        if (!round) {
          ++m.unreferenced_rounds;
        } else {
          std::map<int, double> p_of;
          std::vector<double> probs;
          probs.reserve(round->frames.size());
          for (const CirFrame& frame : round->frames) {
            double p_raw = models.nlos_prob(extract_ecir(frame));
            double p_f = lpf.apply(frame.anchor_id, p_raw);
            p_of[frame.anchor_id] = p_f;
            probs.push_back(p_f);
            ++m.cnn_inferences;
          }
          blocks.add_cnn(t, static_cast<int>(round->frames.size()));
          RegimeDecision rd = decide_regime(probs, config.p_th);

          // Responder columns refreshed with an initiator-referenced
          // measurement this round; the rest fall back to augmentation.
          std::vector<bool> refreshed(n_resp, false);
          if (rd.regime == Regime::predominantly_los) {
            f_dyn = update_frequency(rd.p_avg, config.p_th, config.base_hz,
                                     config.min_hz);
            try_solve(initiator_id, round->tdoas);
            for (const TdoaMeasurement& td : round->tdoas) {
              held[column_of.at(td.anchor_id)] = td.alpha_s;
              refreshed[column_of.at(td.anchor_id)] = true;
            }
          } else {
            f_dyn = config.base_hz;
            std::vector<SelectionItem> items;
            items.push_back({initiator_id, p_of.at(initiator_id), {}});
            for (const TdoaMeasurement& td : round->tdoas)
              items.push_back({td.anchor_id, p_of.at(td.anchor_id),
                               td.alpha_s});
            SelectionResult sel =
                select_healthy(items, initiator_id, config.p_th);
            if (sel.verdict == SelectionVerdict::partially_los) {
              std::vector<TdoaMeasurement> kept;
              for (const SelectionItem& it : sel.tdoas)
                kept.push_back({it.anchor_id, *it.alpha_s});
              try_solve(sel.reference_id, kept);
              // The feature columns stay initiator-referenced; rebased
              // measurements (initiator culled) are not comparable, so only
              // an intact reference refreshes columns from measurements.
              if (sel.reference_id == initiator_id) {
                for (const SelectionItem& it : sel.tdoas) {
                  held[column_of.at(it.anchor_id)] = *it.alpha_s;
                  refreshed[column_of.at(it.anchor_id)] = true;
                }
              }
            } else {
              ++m.discarded_rounds;
            }
          }
          if (window && window->covers(t)) {
            std::vector<TdoaMeasurement> aug =
                augment_tdoa(cluster, window->at(t), config.solver.user_z);
            for (const TdoaMeasurement& td : aug) {
              int col = column_of.at(td.anchor_id);
              if (!refreshed[col]) held[col] = td.alpha_s;
            }
          }
          m.frequency_log.push_back(
              {t, rd.p_avg, f_dyn,
               scenario.trajectory.progress_at(
                   std::min(t, scenario.trajectory.end_time()))});
        }
      } else {
        if (!round)
          ++m.unreferenced_rounds;
        else
          try_solve(initiator_id, round->tdoas);
      }
      next_due = std::max(due + 1.0 / f_dyn, t + 1e-9);
    }

    if (solved) last_fix = fix.xy;

    // The window created on the previous tick is the freshest one whose
    // horizon includes this tick.
    std::optional<PredictionWindow> prior_window = window;
    if (variant == Variant::proposed) {
      timeline.push({t, held, imu[k].accel, imu[k].gyro});
      if (timeline.ready()) {
        window = models.predictor->predict(timeline.sequence(), t);
        ++m.rnn_inferences;
        blocks.add_rnn(t);
      }
    }

    Vec2 est;
    EstimateSource source;
    if (variant == Variant::baseline_kf) {
      kalman.predict(kTickSeconds);
      if (solved) kalman.update(fix.xy);
      if (kalman.initialized()) {
        est = kalman.position();
        source = solved ? EstimateSource::least_squares
                        : EstimateSource::rnn_predicted;
      } else {
        est = cluster.centroid_xy();
        source = EstimateSource::rnn_predicted;
      }
    } else if (solved) {
      est = fix.xy;
      source = EstimateSource::least_squares;
    } else if (variant == Variant::proposed && prior_window &&
               prior_window->covers(t)) {
      est = prior_window->at(t);
      source = EstimateSource::rnn_predicted;
    } else if (last_fix) {
      est = *last_fix;
      source = EstimateSource::rnn_predicted;
    } else {
      est = cluster.centroid_xy();
      source = EstimateSource::rnn_predicted;
    }
    guess = est;

    stats.add(truth, est);
    double f_effective = gated ? 0.0 : f_dyn;
    m.tick_log.push_back(
        {t, truth, est, source, gated, round_exec, f_effective});
    blocks.add_rate(t, (k + 1) * kTickSeconds, f_effective);
  }

  blocks.flush(m.power, m.mean_f_dyn_hz);
  m.mean_current_ma = m.power.mean_current_ma();
  m.rmse_m = stats.n ? std::sqrt(stats.sum_sq / stats.n) : 0.0;
  m.mean_error_m = stats.n ? stats.sum_abs / stats.n : 0.0;
  m.max_error_m = stats.max_e;
  return m;
}

void write_ticks_csv(const RunMetrics& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("ticks: cannot open " + path);
  out << "t,truth_x,truth_y,est_x,est_y,source,gated,round,f_dyn_hz\n";
  for (const TickRecord& r : m.tick_log) {
    out << format_short(r.t) << ',' << format_short(r.truth.x) << ','
        << format_short(r.truth.y) << ',' << format_short(r.estimate.x) << ','
        << format_short(r.estimate.y) << ','
        << (r.source == EstimateSource::least_squares ? "least_squares"
                                                      : "rnn_predicted")
        << ',' << (r.gated ? 1 : 0) << ',' << (r.round_executed ? 1 : 0)
        << ',' << format_short(r.f_dyn_hz) << "\n";
  }
  if (!out) throw data_error("ticks: write failed for " + path);
}

void write_frequency_csv(const RunMetrics& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("frequency: cannot open " + path);
  out << "t,p_avg,f_dyn_hz,progress_m\n";
  for (const FrequencyEvent& e : m.frequency_log) {
    out << format_short(e.t) << ',' << format_short(e.p_avg) << ','
        << format_short(e.f_dyn_hz) << ',' << format_short(e.progress)
        << "\n";
  }
  if (!out) throw data_error("frequency: write failed for " + path);
}

void write_summary_json(const RunMetrics& m, const std::string& path) {
  nlohmann::json j;
  j["variant"] = m.variant;
  j["scenario_fingerprint"] = m.scenario_fingerprint;
  j["seed"] = m.seed;
  j["duration_s"] = m.duration_s;
  j["ticks"] = m.ticks;
  j["ranging_rounds"] = m.ranging_rounds;
  j["discarded_rounds"] = m.discarded_rounds;
  j["unreferenced_rounds"] = m.unreferenced_rounds;
  j["solver_failures"] = m.solver_failures;
  j["gated_ticks"] = m.gated_ticks;
  j["cnn_inferences"] = m.cnn_inferences;
  j["rnn_inferences"] = m.rnn_inferences;
  j["rmse_m"] = m.rmse_m;
  j["mean_error_m"] = m.mean_error_m;
  j["max_error_m"] = m.max_error_m;
  j["mean_current_ma"] = m.mean_current_ma;
  j["mean_f_dyn_hz"] = m.mean_f_dyn_hz;
  std::ofstream out(path);
  if (!out) throw data_error("summary: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw data_error("summary: write failed for " + path);
}

RunSummary summarize(const RunMetrics& m) {
  RunSummary s;
  s.variant = m.variant;
  s.scenario_fingerprint = m.scenario_fingerprint;
  s.seed = m.seed;
  s.rmse_m = m.rmse_m;
  s.mean_error_m = m.mean_error_m;
  s.mean_current_ma = m.mean_current_ma;
  s.mean_f_dyn_hz = m.mean_f_dyn_hz;
  s.ranging_rounds = m.ranging_rounds;
  return s;
}

RunSummary load_run_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("summary: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("summary: parse failure in " + path + ": " + e.what());
  }
  RunSummary s;
  try {
    s.variant = j.at("variant").get<std::string>();
    s.scenario_fingerprint = j.at("scenario_fingerprint").get<std::string>();
    s.seed = j.at("seed").get<uint64_t>();
    s.rmse_m = j.at("rmse_m").get<double>();
    s.mean_error_m = j.at("mean_error_m").get<double>();
    s.mean_current_ma = j.at("mean_current_ma").get<double>();
    s.mean_f_dyn_hz = j.at("mean_f_dyn_hz").get<double>();
    s.ranging_rounds = j.at("ranging_rounds").get<long>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error("summary: missing field in " + path + ": " + e.what());
  }
  return s;
}

std::vector<ComparisonRow> compare(const std::vector<RunSummary>& runs) {
  if (runs.size() < 2) throw config_error("compare: need at least two runs");
  for (const RunSummary& r : runs) {
    if (r.scenario_fingerprint != runs.front().scenario_fingerprint ||
        r.seed != runs.front().seed)
      throw config_error("compare: runs cover different scenarios or seeds");
  }
  std::vector<ComparisonRow> rows;
  const RunSummary& ref = runs.front();
  for (const RunSummary& r : runs) {
    ComparisonRow row;
    row.variant = r.variant;
    row.mean_error_cm = r.mean_error_m * 100.0;
    row.mean_current_ma = r.mean_current_ma;
    row.error_delta_pct =
        ref.mean_error_m > 0.0
            ? (r.mean_error_m - ref.mean_error_m) / ref.mean_error_m * 100.0
            : 0.0;
    row.current_delta_pct = ref.mean_current_ma > 0.0
                                ? (r.mean_current_ma - ref.mean_current_ma) /
                                      ref.mean_current_ma * 100.0
                                : 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace {

Trajectory random_walk(Rng& rng, const Rect& region, double duration) {
  const double margin = 0.6;
  Trajectory traj;
  Vec2 pos{rng.uniform(region.x0 + margin, region.x1 - margin),
           rng.uniform(region.y0 + margin, region.y1 - margin)};
  double t = 0.0;
  traj.waypoints.push_back({t, pos});
  while (t < duration + 2.0) {
    if (rng.uniform() < 0.25) {
      t += rng.uniform(2.0, 5.0);
      traj.waypoints.push_back({t, pos});
      continue;
    }
    Vec2 target;
    double dist = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      target = {rng.uniform(region.x0 + margin, region.x1 - margin),
                rng.uniform(region.y0 + margin, region.y1 - margin)};
      double dx = target.x - pos.x, dy = target.y - pos.y;
      dist = std::sqrt(dx * dx + dy * dy);
      if (dist >= 1.5) break;
    }
    double speed = rng.uniform(0.7, 1.3);
    t += dist / speed;
    pos = target;
    traj.waypoints.push_back({t, pos});
  }
  return traj;
}

}  // namespace

std::vector<SequenceSample> generate_training_sequences(
    const Scenario& base, int count, int n_out, uint64_t seed,
    const ChannelConfig& channel) {
  if (count < 1 || n_out < 1)
    throw std::invalid_argument("sequences: counts must be positive");
  const Cluster& cluster = base.cluster;
  const int initiator_id = cluster.initiator().id;
  std::vector<int> responder_ids;
  for (const Anchor& a : cluster.anchors)
    if (a.id != initiator_id) responder_ids.push_back(a.id);
  const int n_resp = static_cast<int>(responder_ids.size());
  std::map<int, int> column_of;
  for (int i = 0; i < n_resp; ++i) column_of[responder_ids[i]] = i;

  // Weighted toward the rates the adaptive controller actually settles at.
  const double frequencies[7] = {5.0, 2.5, 1.25, 1.0, 0.5, 0.25, 0.1};
  const double freq_weights[7] = {2.0, 3.0, 3.0, 2.0, 2.0, 1.0, 1.0};
  double weight_total = 0.0;
  for (double w : freq_weights) weight_total += w;

  std::vector<SequenceSample> out;
  out.reserve(count);
  long traj_index = 0;
  while (static_cast<int>(out.size()) < count) {
    Rng rng(derive_seed(seed, 0x77a1, traj_index));
    double duration = rng.uniform(20.0, 45.0);
    Scenario scn = base;
    scn.obstacles.clear();
    scn.trajectory = random_walk(rng, base.region, duration);
    scn.duration_s = duration;
    std::vector<ImuSample> imu = synthesize_imu(
        scn.trajectory, duration, derive_seed(seed, 0x1b10, traj_index));
    const long n_ticks = static_cast<long>(imu.size());
    const uint64_t round_master = derive_seed(seed, 0xc0de, traj_index);

    // Plan ranging stretches: frequency, duration, and the feature source
    // the live pipeline would be feeding at the time.
    enum class Mode { measured, mixed, augmented };
    struct RoundEvent {
      long tick;
      Mode mode;
      double f;
    };
    std::vector<RoundEvent> events;
    bool big_drift = rng.uniform() < 0.2;
    double t = rng.uniform(0.0, 1.0);
    while (t < duration) {
      double pick = rng.uniform(0.0, weight_total);
      int fi = 0;
      for (double acc = 0.0; fi < 6; ++fi) {
        acc += freq_weights[fi];
        if (pick < acc) break;
      }
      double f = frequencies[fi];
      double stretch_end = std::min(duration, t + rng.uniform(4.0, 10.0));
      double mode_pick = rng.uniform();
      Mode mode = mode_pick < 0.45
                      ? Mode::measured
                      : (mode_pick < 0.70 ? Mode::mixed : Mode::augmented);
      while (t < stretch_end) {
        long tick = static_cast<long>(std::ceil(t / kTickSeconds - 1e-9));
        if (tick < n_ticks &&
            (events.empty() || events.back().tick != tick))
          events.push_back({tick, mode, f});
        t += 1.0 / f;
      }
    }

    // Replay the tick grid, maintaining the held TDOA columns exactly as the
    // runtime feature builder does.
    std::vector<std::vector<double>> rows(n_ticks,
                                          std::vector<double>(n_resp, 0.0));
    std::vector<double> held(n_resp, 0.0);
    Vec2 drift{rng.normal(0.0, 0.03), rng.normal(0.0, 0.03)};
    double drift_step = big_drift ? 0.045 : 0.015;
    if (big_drift) drift = {drift.x * 3.0, drift.y * 3.0};
    size_t next_event = 0;
    int round_id = 0;
    for (long k = 0; k < n_ticks; ++k) {
      double tk = k * kTickSeconds;
      if (next_event < events.size() && events[next_event].tick == k) {
        const RoundEvent& ev = events[next_event++];
        Vec2 truth = scn.trajectory.position_at(
            std::min(tk, scn.trajectory.end_time()));
        drift = {0.98 * drift.x + rng.normal(0.0, drift_step),
                 0.98 * drift.y + rng.normal(0.0, drift_step)};
        std::vector<TdoaMeasurement> aug = augment_tdoa(
            cluster, {truth.x + drift.x, truth.y + drift.y});
        if (ev.mode == Mode::augmented) {
          for (const TdoaMeasurement& td : aug)
            held[column_of.at(td.anchor_id)] = td.alpha_s;
        } else {
          std::optional<RangingRound> round = measure_round(
              scn, truth, tk, round_id, round_master, channel);
          ++round_id;
          bool common_bias = rng.uniform() < 0.2;
          double bias = common_bias ? rng.exponential(1e-9) : 0.0;
          if (round) {
            for (const TdoaMeasurement& td : round->tdoas) {
              int col = column_of.at(td.anchor_id);
              if (ev.mode == Mode::mixed && rng.uniform() < 0.4)
                held[col] = aug[col].alpha_s;
              else
                held[col] = td.alpha_s - bias;
            }
          }
        }
      }
      rows[k] = held;
    }

    // Cut overlapping windows with a jittered stride.
    long k = kSequenceLength - 1;
    while (k + n_out < n_ticks && static_cast<int>(out.size()) < count) {
      SequenceSample sample;
      sample.features = nn::Tensor({kSequenceLength, n_resp + 6});
      for (int i = 0; i < kSequenceLength; ++i) {
        long src = k - kSequenceLength + 1 + i;
        double* row = &sample.features(i, 0);
        for (int j = 0; j < n_resp; ++j) row[j] = rows[src][j];
        row[n_resp + 0] = imu[src].accel.x;
        row[n_resp + 1] = imu[src].accel.y;
        row[n_resp + 2] = imu[src].accel.z;
        row[n_resp + 3] = imu[src].gyro.x;
        row[n_resp + 4] = imu[src].gyro.y;
        row[n_resp + 5] = imu[src].gyro.z;
      }
      sample.targets = nn::Tensor({n_out, 2});
      for (int j = 0; j < n_out; ++j) {
        double tt = std::min((k + 1 + j) * kTickSeconds,
                             scn.trajectory.end_time());
        Vec2 p = scn.trajectory.position_at(tt);
        sample.targets(j, 0) = p.x;
        sample.targets(j, 1) = p.y;
      }
      out.push_back(std::move(sample));
      k += 2 + (rng.uniform() < 0.5 ? 1 : 0);
    }
    ++traj_index;
  }
  return out;
}

}  // namespace uwbloc
