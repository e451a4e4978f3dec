#pragma once

#include <vector>

#include "uwbloc/nn/tensor.hpp"

namespace uwbloc::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. step() consumes the gradients currently stored
// in the params; the caller zeroes them between batches.
class Adam {
 public:
  explicit Adam(std::vector<Param*> params, AdamConfig cfg = {});
  void step();
  long steps_taken() const { return t_; }

 private:
  std::vector<Param*> params_;
  std::vector<Tensor> m_, v_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace uwbloc::nn
