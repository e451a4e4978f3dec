#include "uwbloc/nlos.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "uwbloc/channel.hpp"
#include "uwbloc/csvio.hpp"
#include "uwbloc/errors.hpp"
#include "uwbloc/nn/adam.hpp"
#include "uwbloc/nn/checkpoint.hpp"
#include "uwbloc/nn/losses.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc {

using nn::LayerSpec;
using nn::Sequential;
using nn::Tensor;

std::vector<LayerSpec> classifier_spec() {
  std::vector<LayerSpec> specs;
  const int kernels[4] = {9, 13, 17, 17};
  const int filters[4] = {64, 64, 128, 256};
  for (int i = 0; i < 4; ++i) {
    specs.push_back(LayerSpec::conv(kernels[i], filters[i]));
    specs.push_back(LayerSpec::norm());
    specs.push_back(LayerSpec::relu());
    specs.push_back(LayerSpec::dropout(0.1));
    specs.push_back(LayerSpec::maxpool(2));
  }
  specs.push_back(LayerSpec::flatten());
  specs.push_back(LayerSpec::dense(64));
  specs.push_back(LayerSpec::dense(1));
  specs.push_back(LayerSpec::sigmoid());
  return specs;
}

Sequential build_classifier(uint64_t seed) {
  return nn::build_stack(classifier_spec(), kECirLength, 1, seed);
}

namespace {

Tensor ecir_tensor(const ECir& ecir) {
  Tensor x({kECirLength, 1});
  for (int i = 0; i < kECirLength; ++i) x.data[i] = ecir.values[i];
  return x;
}

}  // namespace

double predict_nlos(Sequential& net, const ECir& ecir) {
  Tensor y = net.forward(ecir_tensor(ecir), false);
  return y.data[0];
}

NlosLpf::NlosLpf(double w) : w_(w) {
  if (w <= 0.0 || w > 1.0)
    throw std::invalid_argument("lpf: weight must lie in (0, 1]");
}

double NlosLpf::apply(int anchor_id, double p_raw) {
  auto it = state_.find(anchor_id);
  double out = it == state_.end() ? p_raw : w_ * p_raw + (1.0 - w_) * it->second;
  state_[anchor_id] = out;
  return out;
}

void NlosLpf::reset() { state_.clear(); }

std::vector<NlosSample> load_cir_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("corpus: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("corpus: empty file " + path);
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() != static_cast<size_t>(5 + kCirTaps) ||
      header[0] != "round_id" || header[4] != "label")
    throw data_error("corpus: unexpected header in " + path);
  std::vector<NlosSample> samples;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size())
      throw data_error("corpus: wrong column count at line " +
                       std::to_string(line_no));
    CirFrame frame;
    frame.anchor_id = static_cast<int>(parse_long(f[1]));
    frame.fp_index = static_cast<int>(parse_long(f[2]));
    frame.max_noise = parse_double(f[3]);
    if (f[4] == "LOS")
      frame.truth = ChannelState::los;
    else if (f[4] == "NLOS")
      frame.truth = ChannelState::nlos;
    else
      throw data_error("corpus: unknown label at line " +
                       std::to_string(line_no));
    frame.taps.resize(kCirTaps);
    for (int i = 0; i < kCirTaps; ++i) frame.taps[i] = parse_double(f[5 + i]);
    NlosSample s;
    try {
      s.ecir = extract_ecir(frame);
    } catch (const std::invalid_argument& e) {
      throw data_error("corpus: line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    s.label = frame.truth == ChannelState::nlos ? 1 : 0;
    samples.push_back(std::move(s));
  }
  return samples;
}

namespace {

// Batches are cut into fixed sample chunks so gradient accumulation order
// never depends on the worker count; jobs only sets how many chunks run
// concurrently.
constexpr int kChunks = 8;

struct WorkerPool {
  std::vector<Sequential> nets;

  explicit WorkerPool(const Sequential& master) {
    nets.reserve(kChunks);
    for (int i = 0; i < kChunks; ++i) nets.push_back(master.clone());
  }

  void sync_from(Sequential& master) {
    auto src = master.params();
    for (Sequential& net : nets) {
      auto dst = net.params();
      for (size_t i = 0; i < src.size(); ++i) {
        dst[i]->value.data = src[i]->value.data;
        dst[i]->grad.fill(0.0);
      }
    }
  }
};

double run_train_sample(Sequential& net, const NlosSample& s,
                        double inv_batch, uint64_t drop_seed) {
  net.reseed_dropout(drop_seed);
  Tensor y = net.forward(ecir_tensor(s.ecir), true);
  double p = y.data[0];
  Tensor dl({1});
  dl.data[0] = nn::bce_grad(p, s.label) * inv_batch;
  net.backward(dl);
  return nn::bce_loss(p, s.label);
}

template <typename Fn>
void for_each_chunk(int count, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (int c = 0; c < kChunks; ++c) fn(c, count);
    return;
  }
  std::vector<std::thread> threads;
  for (int w = 0; w < jobs; ++w) {
    threads.emplace_back([&, w] {
      for (int c = w; c < kChunks; c += jobs) fn(c, count);
    });
  }
  for (std::thread& t : threads) t.join();
}

struct ValMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
  long tn = 0, fp = 0, fn = 0, tp = 0;
};

ValMetrics evaluate(WorkerPool& pool, const std::vector<NlosSample>& data,
                    const std::vector<int>& idx, int jobs) {
  int n = static_cast<int>(idx.size());
  std::vector<double> losses(n);
  std::vector<int> predicted(n);
  for_each_chunk(n, jobs, [&](int c, int count) {
    int begin = static_cast<int>(static_cast<long>(c) * count / kChunks);
    int end = static_cast<int>(static_cast<long>(c + 1) * count / kChunks);
    for (int i = begin; i < end; ++i) {
      const NlosSample& s = data[idx[i]];
      Tensor y = pool.nets[c].forward(ecir_tensor(s.ecir), false);
      double p = y.data[0];
      losses[i] = nn::bce_loss(p, s.label);
      predicted[i] = p >= 0.5 ? 1 : 0;
    }
  });
  ValMetrics m;
  long correct = 0;
  for (int i = 0; i < n; ++i) {
    m.loss += losses[i];
    int label = data[idx[i]].label;
    if (predicted[i] == label) ++correct;
    if (label == 1)
      predicted[i] == 1 ? ++m.tp : ++m.fn;
    else
      predicted[i] == 0 ? ++m.tn : ++m.fp;
  }
  m.loss /= n;
  m.accuracy = static_cast<double>(correct) / n;
  return m;
}

}  // namespace

NlosTrainReport train_classifier(Sequential& net,
                                 const std::vector<NlosSample>& data,
                                 const NlosTrainOptions& opt) {
  if (data.size() < 2)
    throw data_error("train: need at least two samples");
  bool has_pos = false, has_neg = false;
  for (const NlosSample& s : data) (s.label ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw data_error("train: dataset must contain both classes");
  if (opt.batch_size < 1 || opt.max_epochs < 0 || opt.jobs < 1)
    throw std::invalid_argument("train: malformed options");
  int jobs = std::min(opt.jobs, kChunks);

  int n = static_cast<int>(data.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng split_rng(derive_seed(opt.seed, 0x5411, 0));
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[split_rng.uniform_int(0, i)]);
  int n_val = std::clamp(static_cast<int>(n * opt.val_fraction), 1, n - 1);
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());

  WorkerPool pool(net);
  auto master_params = net.params();
  nn::Adam adam(master_params, {opt.lr});

  auto snapshot = [&] {
    std::vector<Tensor> vals;
    vals.reserve(master_params.size());
    for (nn::Param* p : master_params) vals.push_back(p->value);
    return vals;
  };
  auto restore = [&](const std::vector<Tensor>& vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      master_params[i]->value = vals[i];
  };

  NlosTrainReport report;
  std::vector<Tensor> best = snapshot();
  double best_val = std::numeric_limits<double>::infinity();
  double best_train = 0.0;
  int stale = 0;
  int n_train = static_cast<int>(train_idx.size());

  for (int epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    Rng epoch_rng(derive_seed(opt.seed, 0xe90c, epoch));
    for (int i = n_train - 1; i > 0; --i)
      std::swap(train_idx[i], train_idx[epoch_rng.uniform_int(0, i)]);

    double epoch_loss = 0.0;
    for (int start = 0; start < n_train; start += opt.batch_size) {
      int b = std::min(opt.batch_size, n_train - start);
      double inv_b = 1.0 / b;
      pool.sync_from(net);
      std::vector<double> chunk_loss(kChunks, 0.0);
      for_each_chunk(b, jobs, [&](int c, int count) {
        int begin = static_cast<int>(static_cast<long>(c) * count / kChunks);
        int end = static_cast<int>(static_cast<long>(c + 1) * count / kChunks);
        for (int i = begin; i < end; ++i) {
          int pos = start + i;
          uint64_t drop_seed =
              derive_seed(opt.seed, 0xd409 + static_cast<uint64_t>(epoch),
                          static_cast<uint64_t>(pos));
          chunk_loss[c] += run_train_sample(
              pool.nets[c], data[train_idx[pos]], inv_b, drop_seed);
        }
      });
      for (nn::Param* p : master_params) p->grad.fill(0.0);
      for (int c = 0; c < kChunks; ++c) {
        auto worker_params = pool.nets[c].params();
        for (size_t i = 0; i < master_params.size(); ++i) {
          double* dst = master_params[i]->grad.data.data();
          const double* src = worker_params[i]->grad.data.data();
          int len = master_params[i]->grad.numel();
          for (int k = 0; k < len; ++k) dst[k] += src[k];
        }
        epoch_loss += chunk_loss[c];
      }
      adam.step();
    }
    report.epochs_run = epoch;
    epoch_loss /= n_train;

    pool.sync_from(net);
    ValMetrics vm = evaluate(pool, data, val_idx, jobs);
    if (opt.on_epoch) opt.on_epoch(epoch, epoch_loss, vm.loss, vm.accuracy);
    if (vm.loss < best_val - opt.min_delta) {
      best_val = vm.loss;
      best_train = epoch_loss;
      best = snapshot();
      stale = 0;
    } else {
      ++stale;
      if (stale >= opt.patience) break;
    }
  }

  if (opt.max_epochs > 0) restore(best);
  pool.sync_from(net);
  ValMetrics vm = evaluate(pool, data, val_idx, jobs);
  report.val_accuracy = vm.accuracy;
  report.val_loss = vm.loss;
  report.train_loss = best_train;
  report.tn = vm.tn;
  report.fp = vm.fp;
  report.fn = vm.fn;
  report.tp = vm.tp;
  return report;
}

void save_classifier(const std::string& path, Sequential& net,
                     const std::map<std::string, std::string>& meta) {
  nn::Checkpoint ckpt;
  ckpt.kind = "nlos-classifier";
  ckpt.meta = meta;
  ckpt.meta["input_length"] = std::to_string(kECirLength);
  for (nn::Param* p : net.params()) ckpt.tensors.emplace_back(p->name, p->value);
  nn::save_checkpoint(path, ckpt);
}

Sequential load_classifier(const std::string& path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  if (ckpt.kind != "nlos-classifier")
    throw data_error("classifier: wrong checkpoint kind '" + ckpt.kind + "'");
  Sequential net = build_classifier(0);
  for (nn::Param* p : net.params()) {
    const Tensor* t = ckpt.find(p->name);
    if (!t) throw data_error("classifier: checkpoint missing " + p->name);
    if (t->shape != p->value.shape)
      throw data_error("classifier: shape mismatch for " + p->name);
    p->value = *t;
  }
  return net;
}

}  // namespace uwbloc
