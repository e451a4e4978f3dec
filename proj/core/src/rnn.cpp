#include "uwbloc/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "uwbloc/channel.hpp"
#include "uwbloc/csvio.hpp"
#include "uwbloc/errors.hpp"
#include "uwbloc/nn/adam.hpp"
#include "uwbloc/nn/checkpoint.hpp"
#include "uwbloc/nn/losses.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc {

using nn::Tensor;

namespace {
constexpr double kAccelScale = 0.1;
constexpr double kGyroScale = 0.2;
constexpr size_t kTimelineCapacity = 64;
}  // namespace

FeatureTimeline::FeatureTimeline(int tdoa_dim) : tdoa_dim_(tdoa_dim) {
  if (tdoa_dim < 1)
    throw std::invalid_argument("timeline: tdoa_dim must be positive");
}

void FeatureTimeline::push(const FeatureRow& row) {
  if (static_cast<int>(row.tdoa_s.size()) != tdoa_dim_)
    throw std::invalid_argument("timeline: row width mismatch");
  rows_.push_back(row);
  while (rows_.size() > kTimelineCapacity) rows_.pop_front();
}

Tensor FeatureTimeline::sequence() const {
  if (!ready()) throw data_error("timeline: insufficient history");
  Tensor seq({kSequenceLength, tdoa_dim_ + 6});
  size_t first = rows_.size() - kSequenceLength;
  for (int i = 0; i < kSequenceLength; ++i) {
    const FeatureRow& row = rows_[first + i];
    double* out = &seq(i, 0);
    for (int j = 0; j < tdoa_dim_; ++j) out[j] = row.tdoa_s[j];
    out[tdoa_dim_ + 0] = row.accel.x;
    out[tdoa_dim_ + 1] = row.accel.y;
    out[tdoa_dim_ + 2] = row.accel.z;
    out[tdoa_dim_ + 3] = row.gyro.x;
    out[tdoa_dim_ + 4] = row.gyro.y;
    out[tdoa_dim_ + 5] = row.gyro.z;
  }
  return seq;
}

bool PredictionWindow::covers(double t) const {
  if (positions.empty()) return false;
  double lo = t_base + kTickSeconds - 1e-6;
  double hi = t_base + positions.size() * kTickSeconds + 1e-6;
  return t >= lo && t <= hi;
}

Vec2 PredictionWindow::at(double t) const {
  if (!covers(t)) throw std::out_of_range("prediction window: tick not covered");
  int k = static_cast<int>(std::lround((t - t_base) / kTickSeconds)) - 1;
  k = std::clamp(k, 0, static_cast<int>(positions.size()) - 1);
  return positions[k];
}

RnnPredictor::RnnPredictor(int tdoa_dim, int n_out, uint64_t seed)
    : tdoa_dim_(tdoa_dim),
      n_out_(n_out),
      enc1_(tdoa_dim + 6, 32, derive_seed(seed, 0x717, 0)),
      enc2_(32, 32, derive_seed(seed, 0x717, 1)),
      dec1_(32, 32, derive_seed(seed, 0x717, 2)),
      dec2_(32, 64, derive_seed(seed, 0x717, 3)),
      head1_(64, 64, derive_seed(seed, 0x717, 4)),
      head2_(64, 2, derive_seed(seed, 0x717, 5)) {
  if (tdoa_dim < 1 || n_out < 1)
    throw std::invalid_argument("predictor: dimensions must be positive");
  const char* names[6] = {"enc1", "enc2", "dec1", "dec2", "head1", "head2"};
  nn::Lstm* cells[4] = {&enc1_, &enc2_, &dec1_, &dec2_};
  for (int i = 0; i < 4; ++i) {
    cells[i]->params()[0]->name = std::string(names[i]) + ".w";
    cells[i]->params()[1]->name = std::string(names[i]) + ".b";
  }
  head1_.params()[0]->name = "head1.w";
  head1_.params()[1]->name = "head1.b";
  head2_.params()[0]->name = "head2.w";
  head2_.params()[1]->name = "head2.b";
}

Tensor RnnPredictor::scale_input(const Tensor& sequence) const {
  if (sequence.rank() != 2 || sequence.rows() != kSequenceLength ||
      sequence.cols() != feat_dim())
    throw std::invalid_argument("predictor: sequence shape mismatch");
  Tensor scaled = sequence;
  double tdoa_scale = kSpeedOfLight / kOutputScaleM;
  for (int i = 0; i < kSequenceLength; ++i) {
    double* row = &scaled(i, 0);
    for (int j = 0; j < tdoa_dim_; ++j) row[j] *= tdoa_scale;
    for (int j = 0; j < 3; ++j) row[tdoa_dim_ + j] *= kAccelScale;
    for (int j = 0; j < 3; ++j) row[tdoa_dim_ + 3 + j] *= kGyroScale;
  }
  return scaled;
}

Tensor RnnPredictor::scale_targets(const Tensor& positions_m) const {
  if (positions_m.rank() != 2 || positions_m.rows() != n_out_ ||
      positions_m.cols() != 2)
    throw std::invalid_argument("predictor: target shape mismatch");
  Tensor scaled = positions_m;
  for (double& v : scaled.data) v /= kOutputScaleM;
  return scaled;
}

Tensor RnnPredictor::forward_raw(const Tensor& scaled_sequence) {
  Tensor e1 = enc1_.forward(scaled_sequence);
  enc2_.forward(e1);
  const nn::Lstm::State& summary = enc2_.final_state();
  Tensor dec_in({n_out_, 32});
  for (int k = 0; k < n_out_; ++k)
    std::copy(summary.h.begin(), summary.h.end(), &dec_in(k, 0));
  Tensor d1 = dec1_.forward(dec_in, &summary);
  Tensor d2 = dec2_.forward(d1);
  Tensor h1 = head1_.forward(d2, false);
  return head2_.forward(h1, false);
}

void RnnPredictor::backward_raw(const Tensor& grad_out) {
  Tensor dh1 = head2_.backward(grad_out);
  Tensor dd2 = head1_.backward(dh1);
  Tensor dd1 = dec2_.backward(dd2);
  nn::Lstm::State dsummary;
  Tensor ddec_in = dec1_.backward(dd1, nullptr, nullptr, &dsummary);
  std::vector<double> dh(32), dc(32);
  for (int u = 0; u < 32; ++u) {
    double acc = dsummary.h[u];
    for (int k = 0; k < n_out_; ++k) acc += ddec_in(k, u);
    dh[u] = acc;
    dc[u] = dsummary.c[u];
  }
  Tensor zero_e2({kSequenceLength, 32});
  Tensor de1 = enc2_.backward(zero_e2, dh.data(), dc.data());
  enc1_.backward(de1);
}

PredictionWindow RnnPredictor::predict(const Tensor& sequence, double t_base) {
  Tensor y = forward_raw(scale_input(sequence));
  PredictionWindow window;
  window.t_base = t_base;
  window.positions.resize(n_out_);
  for (int k = 0; k < n_out_; ++k)
    window.positions[k] = {y(k, 0) * kOutputScaleM, y(k, 1) * kOutputScaleM};
  bool consecutive =
      has_prev_ && std::abs(prev_.t_base + kTickSeconds - t_base) < 1e-6;
  if (consecutive) {
    for (int k = 0; k + 1 < n_out_; ++k) {
      window.positions[k].x =
          0.5 * window.positions[k].x + 0.5 * prev_.positions[k + 1].x;
      window.positions[k].y =
          0.5 * window.positions[k].y + 0.5 * prev_.positions[k + 1].y;
    }
  }
  prev_ = window;
  has_prev_ = true;
  return window;
}

void RnnPredictor::reset() {
  has_prev_ = false;
  prev_ = PredictionWindow{};
}

std::vector<nn::Param*> RnnPredictor::params() {
  std::vector<nn::Param*> out;
  for (nn::Param* p : enc1_.params()) out.push_back(p);
  for (nn::Param* p : enc2_.params()) out.push_back(p);
  for (nn::Param* p : dec1_.params()) out.push_back(p);
  for (nn::Param* p : dec2_.params()) out.push_back(p);
  for (nn::Param* p : head1_.params()) out.push_back(p);
  for (nn::Param* p : head2_.params()) out.push_back(p);
  return out;
}

void RnnPredictor::zero_grads() {
  for (nn::Param* p : params()) p->grad.fill(0.0);
}

long RnnPredictor::parameter_count() {
  long n = 0;
  for (nn::Param* p : params()) n += p->value.numel();
  return n;
}

void RnnPredictor::save(const std::string& path,
                        const std::map<std::string, std::string>& meta) {
  nn::Checkpoint ckpt;
  ckpt.kind = "rnn-predictor";
  ckpt.meta = meta;
  ckpt.meta["tdoa_dim"] = std::to_string(tdoa_dim_);
  ckpt.meta["n_out"] = std::to_string(n_out_);
  for (nn::Param* p : params()) ckpt.tensors.emplace_back(p->name, p->value);
  nn::save_checkpoint(path, ckpt);
}

RnnPredictor RnnPredictor::load(const std::string& path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  if (ckpt.kind != "rnn-predictor")
    throw data_error("predictor: wrong checkpoint kind '" + ckpt.kind + "'");
  auto meta_int = [&](const char* key) {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end())
      throw data_error(std::string("predictor: checkpoint missing meta ") +
                       key);
    return static_cast<int>(parse_long(it->second));
  };
  RnnPredictor net(meta_int("tdoa_dim"), meta_int("n_out"), 0);
  for (nn::Param* p : net.params()) {
    const Tensor* t = ckpt.find(p->name);
    if (!t) throw data_error("predictor: checkpoint missing " + p->name);
    if (t->shape != p->value.shape)
      throw data_error("predictor: shape mismatch for " + p->name);
    p->value = *t;
  }
  return net;
}

RnnTrainReport train_predictor(RnnPredictor& net,
                               const std::vector<SequenceSample>& data,
                               const RnnTrainOptions& opt) {
  if (data.size() < 2)
    throw std::invalid_argument("train: need at least two sequences");
  if (opt.batch_size < 1 || opt.max_epochs < 0)
    throw std::invalid_argument("train: malformed options");

  int n = static_cast<int>(data.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng split_rng(derive_seed(opt.seed, 0x5412, 0));
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[split_rng.uniform_int(0, i)]);
  int n_val = std::clamp(static_cast<int>(n * opt.val_fraction), 1, n - 1);
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());

  std::vector<Tensor> scaled_x(n), scaled_t(n);
  for (int i = 0; i < n; ++i) {
    scaled_x[i] = net.scale_input(data[i].features);
    scaled_t[i] = net.scale_targets(data[i].targets);
  }

  auto master = net.params();
  nn::Adam adam(master, {opt.lr});
  auto snapshot = [&] {
    std::vector<Tensor> vals;
    for (nn::Param* p : master) vals.push_back(p->value);
    return vals;
  };
  auto restore = [&](const std::vector<Tensor>& vals) {
    for (size_t i = 0; i < vals.size(); ++i) master[i]->value = vals[i];
  };
  auto eval_mse = [&](const std::vector<int>& idx) {
    double acc = 0.0;
    for (int i : idx) acc += nn::mse_loss(net.forward_raw(scaled_x[i]),
                                          scaled_t[i]);
    return acc / idx.size();
  };

  RnnTrainReport report;
  std::vector<Tensor> best = snapshot();
  double best_val = std::numeric_limits<double>::infinity();
  double best_train = 0.0;
  int stale = 0;
  int n_train = static_cast<int>(train_idx.size());

  for (int epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    Rng epoch_rng(derive_seed(opt.seed, 0xe90d, epoch));
    for (int i = n_train - 1; i > 0; --i)
      std::swap(train_idx[i], train_idx[epoch_rng.uniform_int(0, i)]);
    double epoch_loss = 0.0;
    for (int start = 0; start < n_train; start += opt.batch_size) {
      int b = std::min(opt.batch_size, n_train - start);
      net.zero_grads();
      for (int i = 0; i < b; ++i) {
        int s = train_idx[start + i];
        Tensor y = net.forward_raw(scaled_x[s]);
        epoch_loss += nn::mse_loss(y, scaled_t[s]);
        Tensor g = nn::mse_grad(y, scaled_t[s]);
        for (double& v : g.data) v /= b;
        net.backward_raw(g);
      }
      adam.step();
    }
    report.epochs_run = epoch;
    epoch_loss /= n_train;
    double val = eval_mse(val_idx);
    if (val < best_val - opt.min_delta) {
      best_val = val;
      best_train = epoch_loss;
      best = snapshot();
      stale = 0;
    } else {
      ++stale;
      if (stale >= opt.patience) break;
    }
  }

  if (opt.max_epochs > 0) restore(best);
  report.val_rmse_m = std::sqrt(eval_mse(val_idx)) * RnnPredictor::kOutputScaleM;
  report.train_rmse_m = std::sqrt(best_train) * RnnPredictor::kOutputScaleM;
  return report;
}

void write_sequence_corpus(const std::string& path,
                           const std::vector<SequenceSample>& samples) {
  if (samples.empty())
    throw std::invalid_argument("sequence corpus: nothing to write");
  std::ofstream out(path);
  if (!out) throw data_error("sequence corpus: cannot open " + path);
  int nf = samples.front().features.numel();
  int nt = samples.front().targets.numel();
  for (int i = 0; i < nf; ++i) out << (i ? "," : "") << "f_" << i;
  for (int i = 0; i < nt; ++i) out << ",t_" << i;
  out << "\n";
  for (const SequenceSample& s : samples) {
    if (s.features.numel() != nf || s.targets.numel() != nt)
      throw std::invalid_argument("sequence corpus: ragged sample shapes");
    bool first = true;
    for (double v : s.features.data) {
      out << (first ? "" : ",") << format_full(v);
      first = false;
    }
    for (double v : s.targets.data) out << "," << format_full(v);
    out << "\n";
  }
  if (!out) throw data_error("sequence corpus: write failed for " + path);
}

std::vector<SequenceSample> load_sequence_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("sequence corpus: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw data_error("sequence corpus: empty file " + path);
  std::vector<std::string> header = split_csv_line(line);
  int nf = 0, nt = 0;
  for (const std::string& h : header) {
    if (h.rfind("f_", 0) == 0)
      ++nf;
    else if (h.rfind("t_", 0) == 0)
      ++nt;
    else
      throw data_error("sequence corpus: unexpected column " + h);
  }
  if (nf < kSequenceLength || nf % kSequenceLength != 0 || nt < 2 ||
      nt % 2 != 0)
    throw data_error("sequence corpus: inconsistent header widths");
  int feat_dim = nf / kSequenceLength;
  int n_out = nt / 2;
  std::vector<SequenceSample> samples;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != static_cast<size_t>(nf + nt))
      throw data_error("sequence corpus: wrong column count at line " +
                       std::to_string(line_no));
    SequenceSample s;
    s.features = Tensor({kSequenceLength, feat_dim});
    s.targets = Tensor({n_out, 2});
    for (int i = 0; i < nf; ++i) s.features.data[i] = parse_double(f[i]);
    for (int i = 0; i < nt; ++i) s.targets.data[i] = parse_double(f[nf + i]);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw data_error("sequence corpus: no samples in " + path);
  return samples;
}

}  // namespace uwbloc
