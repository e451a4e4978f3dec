#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "uwbloc/ecir.hpp"
#include "uwbloc/nn/sequential.hpp"

namespace uwbloc {

// Obstruction classifier: four conv blocks (kernel/filters per the tuned
// configuration), each followed by instance norm, relu, dropout 0.1 and a
// halving max pool, then flatten, a 64-unit dense layer and a sigmoid unit.
// Input is one effective CIR as a [200, 1] tensor; output is the probability
// that the frame crossed an obstruction.
std::vector<nn::LayerSpec> classifier_spec();
nn::Sequential build_classifier(uint64_t seed);

// Forward pass in eval mode; returns the raw probability.
double predict_nlos(nn::Sequential& net, const ECir& ecir);

struct ChannelAssessment {
  int anchor_id;
  long round_id;
  double p_raw;
  double p_filtered;
};

// Per-anchor exponential smoothing of the raw probability: the filtered
// value is w * raw + (1 - w) * previous filtered, seeded with the first raw
// value. States are independent across anchors.
class NlosLpf {
 public:
  explicit NlosLpf(double w = 0.5);
  double apply(int anchor_id, double p_raw);
  void reset();
  double weight() const { return w_; }

 private:
  double w_;
  std::map<int, double> state_;
};

struct NlosSample {
  ECir ecir;
  int label;  // 1 = obstructed
};

// Reads a CIR corpus CSV (the simulator's export format) and reduces each row
// to its effective window. Throws data_error on malformed rows.
std::vector<NlosSample> load_cir_corpus(const std::string& path);

struct NlosTrainOptions {
  int max_epochs = 100;
  int batch_size = 50;
  double lr = 1e-3;
  uint64_t seed = 1;
  int patience = 10;
  double min_delta = 1e-3;
  double val_fraction = 0.2;
  int jobs = 1;
  // Progress hook, called once per epoch after validation.
  std::function<void(int epoch, double train_loss, double val_loss,
                     double val_accuracy)>
      on_epoch;
};

struct NlosTrainReport {
  double val_accuracy = 0.0;
  double val_loss = 0.0;
  double train_loss = 0.0;
  int epochs_run = 0;
  long tn = 0, fp = 0, fn = 0, tp = 0;
};

// Mini-batch Adam on binary cross-entropy with a seeded shuffle, an 80/20
// train/validation split, early stopping on validation loss and best-weights
// restore. Requires both classes in the dataset. jobs > 1 fans batch work out
// over fixed sample chunks; results are deterministic for a fixed jobs value.
NlosTrainReport train_classifier(nn::Sequential& net,
                                 const std::vector<NlosSample>& data,
                                 const NlosTrainOptions& opt);

// Checkpoint adapters (kind "nlos-classifier"). Loading validates that every
// architecture parameter is present with the right shape.
void save_classifier(const std::string& path, nn::Sequential& net,
                     const std::map<std::string, std::string>& meta = {});
nn::Sequential load_classifier(const std::string& path);

}  // namespace uwbloc
