#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "uwbloc/nn/tensor.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc::nn {

// Feed-forward layer interface. forward() caches whatever backward() needs,
// so the two must be called in matched pairs on the same instance. backward()
// accumulates into param gradients and returns the gradient w.r.t. the input.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool training) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  virtual const char* kind() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
};

// 1-D convolution over input [length, channels_in] with same padding and
// stride 1, producing [length, channels_out]. Weights live in the im2col
// matmul layout [kernel * channels_in, channels_out].
class Conv1d : public Layer {
 public:
  Conv1d(int kernel, int channels_in, int channels_out, uint64_t seed);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }
  const char* kind() const override { return "conv1d"; }
  std::unique_ptr<Layer> clone() const override;

  int kernel() const { return kernel_; }
  int channels_in() const { return c_in_; }
  int channels_out() const { return c_out_; }

 private:
  int kernel_, c_in_, c_out_, pad_;
  Param w_, b_;
  Tensor cols_;
  int length_ = 0;
};

// Per-channel normalization over the length axis of [length, channels],
// with learnable scale and shift. Uses the biased variance.
class InstanceNorm1d : public Layer {
 public:
  explicit InstanceNorm1d(int channels);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&gamma_, &beta_}; }
  const char* kind() const override { return "instance_norm"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  int channels_;
  Param gamma_, beta_;
  Tensor xhat_;
  std::vector<double> inv_std_;
};

class Relu : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  const char* kind() const override { return "relu"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  std::vector<uint8_t> mask_;
};

// Inverted dropout: active outputs are scaled by 1/keep during training so
// evaluation is the identity. The mask stream is reseedable per sample to
// keep training runs reproducible regardless of evaluation order.
class Dropout : public Layer {
 public:
  explicit Dropout(double rate);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  const char* kind() const override { return "dropout"; }
  std::unique_ptr<Layer> clone() const override;

  void reseed(uint64_t seed) { rng_ = Rng(seed); }
  double rate() const { return rate_; }

 private:
  double rate_;
  Rng rng_;
  std::vector<double> mask_;
  bool trained_ = false;
};

// Non-overlapping max pooling along the length axis; a trailing window
// shorter than the kernel is dropped.
class MaxPool1d : public Layer {
 public:
  explicit MaxPool1d(int kernel);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  const char* kind() const override { return "maxpool"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  int kernel_;
  int in_length_ = 0, channels_ = 0;
  std::vector<int> argmax_;
};

class Flatten : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  const char* kind() const override { return "flatten"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  std::vector<int> in_shape_;
};

// Fully connected layer. Accepts a rank-1 input [in] or a rank-2 input
// [rows, in] applied row-wise; the output keeps the input's rank.
class Dense : public Layer {
 public:
  Dense(int in, int out, uint64_t seed);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }
  const char* kind() const override { return "dense"; }
  std::unique_ptr<Layer> clone() const override;

  int in() const { return in_; }
  int out() const { return out_; }

 private:
  int in_, out_;
  Param w_, b_;
  Tensor x_;
  bool flat_input_ = false;
};

class Sigmoid : public Layer {
 public:
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  const char* kind() const override { return "sigmoid"; }
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor y_;
};

// Uniform He initialization: limit sqrt(6 / fan_in).
void he_uniform_init(Tensor& t, int fan_in, Rng& rng);

}  // namespace uwbloc::nn
