#pragma once

#include <string>
#include <vector>

namespace uwbloc {

// Affine duty-cycle current model per ranging block. The listen coefficient
// is calibrated so an always-on 5 Hz schedule with no neural work draws
// 30.8 mA over an 8.0 mA idle floor; inference costs are per call per block.
struct PowerModelConfig {
  double idle_ma = 8.0;
  double listen_ma_per_hz = 4.56;
  double cnn_ma_per_inference = 0.12;
  double rnn_ma_per_inference = 0.25;
};

// Modeled device current for one block. f_dyn is the effective listening
// rate over the block (0 when the schedule is gated). Negative inputs are
// rejected.
double block_current_ma(double f_dyn, int n_cnn, int n_rnn,
                        const PowerModelConfig& cfg = {});

struct PowerBlock {
  double t0_s;
  double f_dyn_hz;
  int n_cnn;
  int n_rnn;
  double listen_ma;
  double inference_ma;
  double idle_ma;
  double total_ma;
};

// Per-block accumulator for one run; blocks are appended in time order.
class PowerLedger {
 public:
  explicit PowerLedger(PowerModelConfig cfg = {}) : cfg_(cfg) {}

  void add_block(double t0_s, double f_dyn_hz, int n_cnn, int n_rnn);
  double mean_current_ma() const;
  const std::vector<PowerBlock>& blocks() const { return blocks_; }
  const PowerModelConfig& config() const { return cfg_; }

  void write_csv(const std::string& path) const;

 private:
  PowerModelConfig cfg_;
  std::vector<PowerBlock> blocks_;
};

}  // namespace uwbloc
