#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "uwbloc/nn/layers.hpp"

namespace uwbloc::nn {

struct LayerSpec {
  enum class Kind {
    conv1d,
    instance_norm,
    relu,
    dropout,
    maxpool,
    flatten,
    dense,
    sigmoid,
  };
  Kind kind;
  int kernel = 0;   // conv1d, maxpool
  int filters = 0;  // conv1d
  int units = 0;    // dense
  double rate = 0;  // dropout

  static LayerSpec conv(int kernel, int filters) {
    return {Kind::conv1d, kernel, filters, 0, 0};
  }
  static LayerSpec norm() { return {Kind::instance_norm, 0, 0, 0, 0}; }
  static LayerSpec relu() { return {Kind::relu, 0, 0, 0, 0}; }
  static LayerSpec dropout(double rate) {
    return {Kind::dropout, 0, 0, 0, rate};
  }
  static LayerSpec maxpool(int kernel) {
    return {Kind::maxpool, kernel, 0, 0, 0};
  }
  static LayerSpec flatten() { return {Kind::flatten, 0, 0, 0, 0}; }
  static LayerSpec dense(int units) { return {Kind::dense, 0, 0, units, 0}; }
  static LayerSpec sigmoid() { return {Kind::sigmoid, 0, 0, 0, 0}; }
};

// A plain layer stack. Parameters are exposed with stable names like
// "conv1.w" or "dense2.b" (1-based per layer kind, in stack order) so
// checkpoints survive refactors that do not change the architecture.
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  void add(std::unique_ptr<Layer> layer);
  Tensor forward(const Tensor& x, bool training = false);
  // dloss is the gradient w.r.t. the final output; parameter gradients
  // accumulate across calls until zero_grads().
  Tensor backward(const Tensor& dloss);
  std::vector<Param*> params();
  void zero_grads();
  long parameter_count();
  // Reseeds every dropout layer from one stream, offset by position.
  void reseed_dropout(uint64_t seed);
  Sequential clone() const;
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  void name_params();
};

// Builds a stack for inputs of shape [length, channels], checking that every
// layer is dimensionally consistent with what the previous one produces.
// Weight seeds derive from `seed` by layer position.
Sequential build_stack(const std::vector<LayerSpec>& specs, int length,
                       int channels, uint64_t seed);

}  // namespace uwbloc::nn
