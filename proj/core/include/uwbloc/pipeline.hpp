#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uwbloc/channel.hpp"
#include "uwbloc/control.hpp"
#include "uwbloc/ecir.hpp"
#include "uwbloc/localizer.hpp"
#include "uwbloc/power.hpp"
#include "uwbloc/rnn.hpp"
#include "uwbloc/scenario.hpp"

namespace uwbloc {

enum class Variant { proposed, baseline_static_ls, baseline_kf };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct TickRecord {
  double t;
  Vec2 truth;
  Vec2 estimate;
  EstimateSource source;
  bool gated;
  bool round_executed;
  double f_dyn_hz;
};

struct FrequencyEvent {
  double t;
  double p_avg;
  double f_dyn_hz;
  double progress;  // fraction of the trajectory walked, for plot exports
};

struct RunMetrics {
  std::string variant;
  std::string scenario_fingerprint;
  uint64_t seed = 0;
  double duration_s = 0.0;
  long ticks = 0;
  long ranging_rounds = 0;
  long discarded_rounds = 0;  // rounds thrown away whole by the selector
  long unreferenced_rounds = 0;  // initiator message lost to outage
  long solver_failures = 0;
  long gated_ticks = 0;
  long cnn_inferences = 0;
  long rnn_inferences = 0;
  double rmse_m = 0.0;
  double mean_error_m = 0.0;
  double max_error_m = 0.0;
  double mean_current_ma = 0.0;
  double mean_f_dyn_hz = 0.0;
  std::vector<TickRecord> tick_log;
  std::vector<FrequencyEvent> frequency_log;
  PowerLedger power;
};

void write_ticks_csv(const RunMetrics& m, const std::string& path);
void write_frequency_csv(const RunMetrics& m, const std::string& path);
void write_summary_json(const RunMetrics& m, const std::string& path);

// Models injected into the proposed pipeline. nlos_prob must be a pure
// deterministic function of the eCIR; the predictor is stateful (window
// smoothing) and owned by the caller.
struct PipelineModels {
  std::function<double(const ECir&)> nlos_prob;
  PositionPredictor* predictor = nullptr;
};

struct PipelineConfig {
  ChannelConfig channel;
  PowerModelConfig power;
  SolverOptions solver;
  double p_th = kDefaultThreshold;
  double base_hz = kBaseFrequencyHz;
  double min_hz = kMinFrequencyHz;
  double block_s = 0.2;
  double motion_window_s = 1.0;
  double lpf_weight = 0.5;
  // Overrides the scenario's seed when set (CLI --seed plumbing).
  std::optional<uint64_t> seed;
};

// Runs one variant over the scenario on the 62.5 ms tick grid, emitting
// exactly one position estimate per tick. The proposed variant needs both
// models; the baselines need none.
RunMetrics run(const Scenario& scenario, Variant variant,
               const PipelineModels& models, const PipelineConfig& config);

// Summary slice used by the comparison command.
struct RunSummary {
  std::string variant;
  std::string scenario_fingerprint;
  uint64_t seed = 0;
  double rmse_m = 0.0;
  double mean_error_m = 0.0;
  double mean_current_ma = 0.0;
  double mean_f_dyn_hz = 0.0;
  long ranging_rounds = 0;
};

RunSummary summarize(const RunMetrics& m);
RunSummary load_run_summary(const std::string& path);

struct ComparisonRow {
  std::string variant;
  double mean_error_cm;
  double mean_current_ma;
  double error_delta_pct;    // vs first row
  double current_delta_pct;  // vs first row
};

// All runs must share scenario fingerprint and seed; the first entry is the
// reference for the percentage deltas.
std::vector<ComparisonRow> compare(const std::vector<RunSummary>& runs);

// Simulator-side curriculum for the predictor: randomized walks with pauses,
// ranging stretches over the whole frequency range, and feature rounds drawn
// from measured, position-drift-augmented, or mixed per-anchor sources so the
// model sees the same feature quirks the live pipeline produces (staleness,
// cold zeros, common-mode reference bias).
std::vector<SequenceSample> generate_training_sequences(
    const Scenario& base, int count, int n_out, uint64_t seed,
    const ChannelConfig& channel = {});

}  // namespace uwbloc
