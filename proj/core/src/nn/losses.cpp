#include "uwbloc/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwbloc::nn {

namespace {
constexpr double kClamp = 1e-7;
}

double bce_loss(double p, double y) {
  p = std::clamp(p, kClamp, 1.0 - kClamp);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

double bce_grad(double p, double y) {
  p = std::clamp(p, kClamp, 1.0 - kClamp);
  return (p - y) / (p * (1.0 - p));
}

double mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target))
    throw std::invalid_argument("mse: shape mismatch");
  double acc = 0.0;
  for (int i = 0; i < pred.numel(); ++i) {
    double d = pred.data[i] - target.data[i];
    acc += d * d;
  }
  return acc / pred.numel();
}

Tensor mse_grad(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target))
    throw std::invalid_argument("mse: shape mismatch");
  Tensor g(pred.shape);
  double scale = 2.0 / pred.numel();
  for (int i = 0; i < pred.numel(); ++i)
    g.data[i] = scale * (pred.data[i] - target.data[i]);
  return g;
}

}  // namespace uwbloc::nn
