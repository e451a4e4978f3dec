#pragma once

#include <cstdint>
#include <vector>

#include "uwbloc/nn/tensor.hpp"

namespace uwbloc::nn {

// Single LSTM layer run over a whole sequence. Weights are packed as one
// matrix w [4 * units, input_dim + units] acting on [x_t; h_{t-1}], with gate
// row blocks ordered input, forget, cell, output; the forget bias starts at 1.
class Lstm {
 public:
  struct State {
    std::vector<double> h, c;
  };

  Lstm(int input_dim, int units, uint64_t seed);

  // seq is [T, input_dim]; returns [T, units]. Passing s0 starts from that
  // state instead of zeros.
  Tensor forward(const Tensor& seq, const State* s0 = nullptr);

  // grad_out is [T, units]. dh_last / dc_last inject extra gradient arriving
  // at the final state (for downstream consumers of final_state()); dstate0
  // receives the gradient w.r.t. the initial state when non-null. Accumulates
  // parameter gradients and returns the gradient w.r.t. the input sequence.
  Tensor backward(const Tensor& grad_out, const double* dh_last = nullptr,
                  const double* dc_last = nullptr, State* dstate0 = nullptr);

  const State& final_state() const { return final_; }
  std::vector<Param*> params() { return {&w_, &b_}; }
  int units() const { return units_; }
  int input_dim() const { return input_dim_; }

 private:
  int input_dim_, units_;
  Param w_, b_;
  State s0_, final_;
  Tensor seq_;
  // per-step activation caches, each [T, units]
  Tensor gi_, gf_, gg_, go_, cs_, hs_, tc_;
};

}  // namespace uwbloc::nn
