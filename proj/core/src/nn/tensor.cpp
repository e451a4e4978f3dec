#include "uwbloc/nn/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace uwbloc::nn {

Tensor::Tensor(std::vector<int> shp) : shape(std::move(shp)) {
  long n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= d;
  }
  data.assign(static_cast<size_t>(n), 0.0);
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

void gemm(int m, int k, int n, const double* a, const double* b, double* c,
          bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<long>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<long>(i) * k;
    double* crow = c + static_cast<long>(i) * n;
    for (int l = 0; l < k; ++l) {
      double av = arow[l];
      if (av == 0.0) continue;
      const double* __restrict brow = b + static_cast<long>(l) * n;
      double* __restrict cr = crow;
      for (int j = 0; j < n; ++j) cr[j] += av * brow[j];
    }
  }
}

void gemm_tn(int m, int k, int n, const double* a, const double* b, double* c,
             bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<long>(m) * n, 0.0);
  for (int l = 0; l < k; ++l) {
    const double* arow = a + static_cast<long>(l) * m;
    const double* brow = b + static_cast<long>(l) * n;
    for (int i = 0; i < m; ++i) {
      double av = arow[i];
      if (av == 0.0) continue;
      double* __restrict cr = c + static_cast<long>(i) * n;
      const double* __restrict br = brow;
      for (int j = 0; j < n; ++j) cr[j] += av * br[j];
    }
  }
}

void gemm_nt(int m, int k, int n, const double* a, const double* b, double* c,
             bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<long>(i) * k;
    double* crow = c + static_cast<long>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* __restrict brow = b + static_cast<long>(j) * k;
      const double* __restrict ar = arow;
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += ar[l] * brow[l];
      if (accumulate)
        crow[j] += acc;
      else
        crow[j] = acc;
    }
  }
}

}  // namespace uwbloc::nn
