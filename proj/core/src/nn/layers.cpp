#include "uwbloc/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwbloc::nn {

void he_uniform_init(Tensor& t, int fan_in, Rng& rng) {
  double limit = std::sqrt(6.0 / fan_in);
  for (double& v : t.data) v = rng.uniform(-limit, limit);
}

Conv1d::Conv1d(int kernel, int channels_in, int channels_out, uint64_t seed)
    : kernel_(kernel),
      c_in_(channels_in),
      c_out_(channels_out),
      pad_((kernel - 1) / 2),
      w_("w", Tensor({kernel * channels_in, channels_out})),
      b_("b", Tensor({channels_out})) {
  if (kernel < 1 || kernel % 2 == 0)
    throw std::invalid_argument("conv1d: kernel must be odd and positive");
  if (channels_in < 1 || channels_out < 1)
    throw std::invalid_argument("conv1d: channel counts must be positive");
  Rng rng(seed);
  he_uniform_init(w_.value, kernel * channels_in, rng);
}

Tensor Conv1d::forward(const Tensor& x, bool) {
  if (x.rank() != 2 || x.cols() != c_in_)
    throw std::invalid_argument("conv1d: input shape mismatch");
  length_ = x.rows();
  int kc = kernel_ * c_in_;
  cols_ = Tensor({length_, kc});
  for (int i = 0; i < length_; ++i) {
    double* row = &cols_(i, 0);
    for (int k = 0; k < kernel_; ++k) {
      int src = i + k - pad_;
      if (src < 0 || src >= length_) continue;
      const double* xr = &x(src, 0);
      std::copy(xr, xr + c_in_, row + k * c_in_);
    }
  }
  Tensor y({length_, c_out_});
  for (int i = 0; i < length_; ++i)
    std::copy(b_.value.data.begin(), b_.value.data.end(), &y(i, 0));
  gemm(length_, kc, c_out_, cols_.data.data(), w_.value.data.data(),
       y.data.data(), true);
  return y;
}

Tensor Conv1d::backward(const Tensor& grad_out) {
  int kc = kernel_ * c_in_;
  gemm_tn(kc, length_, c_out_, cols_.data.data(), grad_out.data.data(),
          w_.grad.data.data(), true);
  for (int i = 0; i < length_; ++i)
    for (int j = 0; j < c_out_; ++j) b_.grad[j] += grad_out(i, j);
  Tensor dcols({length_, kc});
  gemm_nt(length_, c_out_, kc, grad_out.data.data(), w_.value.data.data(),
          dcols.data.data(), false);
  Tensor dx({length_, c_in_});
  for (int k = 0; k < kernel_; ++k) {
    for (int i = 0; i < length_; ++i) {
      int dst = i + k - pad_;
      if (dst < 0 || dst >= length_) continue;
      const double* src = &dcols(i, k * c_in_);
      double* out = &dx(dst, 0);
      for (int c = 0; c < c_in_; ++c) out[c] += src[c];
    }
  }
  return dx;
}

std::unique_ptr<Layer> Conv1d::clone() const {
  auto copy = std::make_unique<Conv1d>(kernel_, c_in_, c_out_, 0);
  copy->w_.value = w_.value;
  copy->b_.value = b_.value;
  return copy;
}

InstanceNorm1d::InstanceNorm1d(int channels)
    : channels_(channels),
      gamma_("gamma", Tensor({channels})),
      beta_("beta", Tensor({channels})) {
  if (channels < 1)
    throw std::invalid_argument("instance_norm: channels must be positive");
  gamma_.value.fill(1.0);
}

Tensor InstanceNorm1d::forward(const Tensor& x, bool) {
  if (x.rank() != 2 || x.cols() != channels_)
    throw std::invalid_argument("instance_norm: input shape mismatch");
  int len = x.rows();
  xhat_ = Tensor({len, channels_});
  inv_std_.assign(channels_, 0.0);
  Tensor y({len, channels_});
  const double eps = 1e-5;
  for (int c = 0; c < channels_; ++c) {
    double mean = 0.0;
    for (int i = 0; i < len; ++i) mean += x(i, c);
    mean /= len;
    double var = 0.0;
    for (int i = 0; i < len; ++i) {
      double d = x(i, c) - mean;
      var += d * d;
    }
    var /= len;
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std_[c] = inv;
    double g = gamma_.value[c], b = beta_.value[c];
    for (int i = 0; i < len; ++i) {
      double xh = (x(i, c) - mean) * inv;
      xhat_(i, c) = xh;
      y(i, c) = g * xh + b;
    }
  }
  return y;
}

Tensor InstanceNorm1d::backward(const Tensor& grad_out) {
  int len = grad_out.rows();
  Tensor dx({len, channels_});
  for (int c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < len; ++i) {
      double dy = grad_out(i, c);
      sum_dy += dy;
      sum_dy_xhat += dy * xhat_(i, c);
    }
    gamma_.grad[c] += sum_dy_xhat;
    beta_.grad[c] += sum_dy;
    double mean_dy = sum_dy / len;
    double mean_dy_xhat = sum_dy_xhat / len;
    double scale = gamma_.value[c] * inv_std_[c];
    for (int i = 0; i < len; ++i)
      dx(i, c) = scale *
                 (grad_out(i, c) - mean_dy - xhat_(i, c) * mean_dy_xhat);
  }
  return dx;
}

std::unique_ptr<Layer> InstanceNorm1d::clone() const {
  auto copy = std::make_unique<InstanceNorm1d>(channels_);
  copy->gamma_.value = gamma_.value;
  copy->beta_.value = beta_.value;
  return copy;
}

Tensor Relu::forward(const Tensor& x, bool) {
  Tensor y = x;
  mask_.assign(x.data.size(), 0);
  for (size_t i = 0; i < y.data.size(); ++i) {
    if (y.data[i] > 0.0)
      mask_[i] = 1;
    else
      y.data[i] = 0.0;
  }
  return y;
}

Tensor Relu::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (size_t i = 0; i < dx.data.size(); ++i)
    if (!mask_[i]) dx.data[i] = 0.0;
  return dx;
}

std::unique_ptr<Layer> Relu::clone() const {
  return std::make_unique<Relu>();
}

Dropout::Dropout(double rate) : rate_(rate), rng_(0) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout: rate must lie in [0, 1)");
}

Tensor Dropout::forward(const Tensor& x, bool training) {
  trained_ = training && rate_ > 0.0;
  if (!trained_) return x;
  double keep = 1.0 - rate_;
  double scale = 1.0 / keep;
  mask_.assign(x.data.size(), 0.0);
  Tensor y = x;
  for (size_t i = 0; i < y.data.size(); ++i) {
    double m = rng_.bernoulli(keep) ? scale : 0.0;
    mask_[i] = m;
    y.data[i] *= m;
  }
  return y;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  if (!trained_) return grad_out;
  Tensor dx = grad_out;
  for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
  return dx;
}

std::unique_ptr<Layer> Dropout::clone() const {
  return std::make_unique<Dropout>(rate_);
}

MaxPool1d::MaxPool1d(int kernel) : kernel_(kernel) {
  if (kernel < 1) throw std::invalid_argument("maxpool: kernel must be positive");
}

Tensor MaxPool1d::forward(const Tensor& x, bool) {
  if (x.rank() != 2) throw std::invalid_argument("maxpool: rank-2 input required");
  in_length_ = x.rows();
  channels_ = x.cols();
  int out_len = in_length_ / kernel_;
  if (out_len < 1) throw std::invalid_argument("maxpool: input shorter than kernel");
  argmax_.assign(static_cast<size_t>(out_len) * channels_, 0);
  Tensor y({out_len, channels_});
  for (int o = 0; o < out_len; ++o) {
    for (int c = 0; c < channels_; ++c) {
      int base = o * kernel_;
      int best = base;
      double bv = x(base, c);
      for (int k = 1; k < kernel_; ++k) {
        double v = x(base + k, c);
        if (v > bv) {
          bv = v;
          best = base + k;
        }
      }
      y(o, c) = bv;
      argmax_[static_cast<size_t>(o) * channels_ + c] = best;
    }
  }
  return y;
}

Tensor MaxPool1d::backward(const Tensor& grad_out) {
  Tensor dx({in_length_, channels_});
  int out_len = grad_out.rows();
  for (int o = 0; o < out_len; ++o)
    for (int c = 0; c < channels_; ++c)
      dx(argmax_[static_cast<size_t>(o) * channels_ + c], c) += grad_out(o, c);
  return dx;
}

std::unique_ptr<Layer> MaxPool1d::clone() const {
  return std::make_unique<MaxPool1d>(kernel_);
}

Tensor Flatten::forward(const Tensor& x, bool) {
  in_shape_ = x.shape;
  Tensor y = x;
  y.shape = {x.numel()};
  return y;
}

Tensor Flatten::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  dx.shape = in_shape_;
  return dx;
}

std::unique_ptr<Layer> Flatten::clone() const {
  return std::make_unique<Flatten>();
}

Dense::Dense(int in, int out, uint64_t seed)
    : in_(in), out_(out), w_("w", Tensor({in, out})), b_("b", Tensor({out})) {
  if (in < 1 || out < 1)
    throw std::invalid_argument("dense: dimensions must be positive");
  Rng rng(seed);
  he_uniform_init(w_.value, in, rng);
}

Tensor Dense::forward(const Tensor& x, bool) {
  flat_input_ = x.rank() == 1;
  int rows = flat_input_ ? 1 : x.rows();
  int cols = flat_input_ ? x.numel() : x.cols();
  if (cols != in_) throw std::invalid_argument("dense: input width mismatch");
  x_ = x;
  Tensor y({rows, out_});
  for (int i = 0; i < rows; ++i)
    std::copy(b_.value.data.begin(), b_.value.data.end(), &y(i, 0));
  gemm(rows, in_, out_, x.data.data(), w_.value.data.data(), y.data.data(),
       true);
  if (flat_input_) y.shape = {out_};
  return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
  int rows = flat_input_ ? 1 : x_.rows();
  gemm_tn(in_, rows, out_, x_.data.data(), grad_out.data.data(),
          w_.grad.data.data(), true);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < out_; ++j)
      b_.grad[j] += grad_out.data[static_cast<size_t>(i) * out_ + j];
  Tensor dx(x_.shape);
  gemm_nt(rows, out_, in_, grad_out.data.data(), w_.value.data.data(),
          dx.data.data(), false);
  return dx;
}

std::unique_ptr<Layer> Dense::clone() const {
  auto copy = std::make_unique<Dense>(in_, out_, 0);
  copy->w_.value = w_.value;
  copy->b_.value = b_.value;
  return copy;
}

Tensor Sigmoid::forward(const Tensor& x, bool) {
  Tensor y = x;
  // Clamped a hair inside (0, 1): at |logit| > 36 the exact value rounds to
  // 0.0 or 1.0 in double, the s*(1-s) backward factor becomes exactly zero
  // and a saturated unit can never recover. The clamp matches the cross
  // entropy guard, so the combined gradient degrades to (p - y) instead of
  // vanishing.
  constexpr double kEps = 1e-7;
  for (double& v : y.data)
    v = std::clamp(1.0 / (1.0 + std::exp(-v)), kEps, 1.0 - kEps);
  y_ = y;
  return y;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  for (size_t i = 0; i < dx.data.size(); ++i) {
    double s = y_.data[i];
    dx.data[i] *= s * (1.0 - s);
  }
  return dx;
}

std::unique_ptr<Layer> Sigmoid::clone() const {
  return std::make_unique<Sigmoid>();
}

}  // namespace uwbloc::nn
