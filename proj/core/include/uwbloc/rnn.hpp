#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "uwbloc/geometry.hpp"
#include "uwbloc/nn/layers.hpp"
#include "uwbloc/nn/lstm.hpp"
#include "uwbloc/scenario.hpp"

namespace uwbloc {

inline constexpr int kSequenceLength = 16;
inline constexpr int kDefaultPredictionSteps = 5;

// One tick's worth of predictor features in physical units: the per-responder
// arrival-time differences (seconds, ascending anchor id, zero-order held or
// augmented upstream) and the raw IMU sample.
struct FeatureRow {
  double t;
  std::vector<double> tdoa_s;
  Vec3 accel;
  Vec3 gyro;
};

// Rolling per-tick feature history; keeps just enough rows to cut sequences.
class FeatureTimeline {
 public:
  explicit FeatureTimeline(int tdoa_dim);
  void push(const FeatureRow& row);
  bool ready() const { return static_cast<int>(rows_.size()) >= kSequenceLength; }
  // The most recent kSequenceLength rows as a [16, tdoa_dim + 6] tensor in
  // physical units. Throws data_error when history is too short.
  nn::Tensor sequence() const;
  int tdoa_dim() const { return tdoa_dim_; }
  void clear() { rows_.clear(); }

 private:
  int tdoa_dim_;
  std::deque<FeatureRow> rows_;
};

// Positions predicted for the ticks after t_base: entry k targets
// t_base + (k + 1) * kTickSeconds.
struct PredictionWindow {
  double t_base = 0.0;
  std::vector<Vec2> positions;

  bool covers(double t) const;
  Vec2 at(double t) const;  // nearest entry for tick t (must be covered)
};

class PositionPredictor {
 public:
  virtual ~PositionPredictor() = default;
  virtual PredictionWindow predict(const nn::Tensor& sequence,
                                   double t_base) = 0;
  virtual void reset() = 0;
  virtual int n_out() const = 0;
};

// LSTM encoder-decoder: two 32-unit encoder layers consume the feature
// sequence; the second one's final state seeds a 32-unit decoder layer whose
// input repeats the encoder summary for each output step, followed by a
// 64-unit layer and a per-step dense(64) -> dense(2) head. Successive
// prediction windows are blended 50/50 against the previous window's entry
// for the same target tick; the furthest step has no predecessor and stays
// raw.
class RnnPredictor : public PositionPredictor {
 public:
  RnnPredictor(int tdoa_dim, int n_out, uint64_t seed);

  PredictionWindow predict(const nn::Tensor& sequence, double t_base) override;
  void reset() override;
  int n_out() const override { return n_out_; }
  int tdoa_dim() const { return tdoa_dim_; }
  int feat_dim() const { return tdoa_dim_ + 6; }

  // Training surface, operating in scaled network units.
  nn::Tensor scale_input(const nn::Tensor& sequence) const;
  nn::Tensor scale_targets(const nn::Tensor& positions_m) const;
  nn::Tensor forward_raw(const nn::Tensor& scaled_sequence);
  void backward_raw(const nn::Tensor& grad_out);
  std::vector<nn::Param*> params();
  void zero_grads();
  long parameter_count();

  void save(const std::string& path,
            const std::map<std::string, std::string>& meta = {});
  static RnnPredictor load(const std::string& path);

  // Feature units differ by orders of magnitude; these bring each block to
  // order one (time differences to decameter path differences, output
  // decameters back to meters).
  static constexpr double kOutputScaleM = 10.0;

 private:
  int tdoa_dim_, n_out_;
  nn::Lstm enc1_, enc2_, dec1_, dec2_;
  nn::Dense head1_, head2_;  // applied to the decoder output block row-wise
  bool has_prev_ = false;
  PredictionWindow prev_;
};

struct SequenceSample {
  nn::Tensor features;  // [16, feat_dim], physical units
  nn::Tensor targets;   // [n_out, 2], meters
};

struct RnnTrainOptions {
  int max_epochs = 50;
  int batch_size = 10;
  double lr = 1e-3;
  uint64_t seed = 1;
  int patience = 10;
  double min_delta = 1e-4;
  double val_fraction = 0.2;
  // Progress hook, called once per epoch after validation (RMSE in meters).
  std::function<void(int epoch, double train_rmse_m, double val_rmse_m)>
      on_epoch;
};

struct RnnTrainReport {
  double val_rmse_m = 0.0;
  double train_rmse_m = 0.0;
  int epochs_run = 0;
};

// Mini-batch Adam on mean-squared error over scaled coordinates, 80/20 split,
// early stopping on validation loss with best-weights restore.
RnnTrainReport train_predictor(RnnPredictor& net,
                               const std::vector<SequenceSample>& data,
                               const RnnTrainOptions& opt);

// Flattened CSV corpus of sequence samples. The sequence length is fixed at
// kSequenceLength; feature and output widths are recovered from the header.
void write_sequence_corpus(const std::string& path,
                           const std::vector<SequenceSample>& samples);
std::vector<SequenceSample> load_sequence_corpus(const std::string& path);

}  // namespace uwbloc
