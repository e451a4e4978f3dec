#include "uwbloc/power.hpp"

#include <fstream>
#include <stdexcept>

#include "uwbloc/csvio.hpp"
#include "uwbloc/errors.hpp"

namespace uwbloc {

double block_current_ma(double f_dyn, int n_cnn, int n_rnn,
                        const PowerModelConfig& cfg) {
  if (f_dyn < 0.0 || n_cnn < 0 || n_rnn < 0)
    throw std::invalid_argument("block_current_ma: negative activity");
  return cfg.idle_ma + cfg.listen_ma_per_hz * f_dyn +
         cfg.cnn_ma_per_inference * n_cnn + cfg.rnn_ma_per_inference * n_rnn;
}

void PowerLedger::add_block(double t0_s, double f_dyn_hz, int n_cnn,
                            int n_rnn) {
  PowerBlock b;
  b.t0_s = t0_s;
  b.f_dyn_hz = f_dyn_hz;
  b.n_cnn = n_cnn;
  b.n_rnn = n_rnn;
  b.listen_ma = cfg_.listen_ma_per_hz * f_dyn_hz;
  b.inference_ma =
      cfg_.cnn_ma_per_inference * n_cnn + cfg_.rnn_ma_per_inference * n_rnn;
  b.idle_ma = cfg_.idle_ma;
  b.total_ma = block_current_ma(f_dyn_hz, n_cnn, n_rnn, cfg_);
  blocks_.push_back(b);
}

double PowerLedger::mean_current_ma() const {
  if (blocks_.empty()) return 0.0;
  double sum = 0.0;
  for (const PowerBlock& b : blocks_) sum += b.total_ma;
  return sum / blocks_.size();
}

void PowerLedger::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw data_error("power ledger: cannot open " + path);
  out << "t0_s,f_dyn_hz,n_cnn,n_rnn,listen_ma,inference_ma,idle_ma,total_ma\n";
  for (const PowerBlock& b : blocks_) {
    out << format_short(b.t0_s) << "," << format_short(b.f_dyn_hz) << ","
        << b.n_cnn << "," << b.n_rnn << "," << format_short(b.listen_ma)
        << "," << format_short(b.inference_ma) << ","
        << format_short(b.idle_ma) << "," << format_short(b.total_ma) << "\n";
  }
  if (!out) throw data_error("power ledger: write failed for " + path);
}

}  // namespace uwbloc
