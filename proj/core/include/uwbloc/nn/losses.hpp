#pragma once

#include "uwbloc/nn/tensor.hpp"

namespace uwbloc::nn {

// Binary cross-entropy for a scalar probability. Predictions are clamped to
// [1e-7, 1 - 1e-7] in both the loss and its derivative.
double bce_loss(double p, double y);
double bce_grad(double p, double y);

// Mean squared error over all elements, and its gradient w.r.t. pred.
double mse_loss(const Tensor& pred, const Tensor& target);
Tensor mse_grad(const Tensor& pred, const Tensor& target);

}  // namespace uwbloc::nn
