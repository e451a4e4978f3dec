#pragma once

#include <string>
#include <vector>

namespace uwbloc::nn {

// Dense row-major tensor. Rank 1 and 2 cover every shape in this library;
// convolution weights are kept pre-flattened to their matmul layout.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> shp);

  static Tensor zeros(std::vector<int> shp) { return Tensor(std::move(shp)); }

  int numel() const { return static_cast<int>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int rows() const { return shape.at(0); }
  int cols() const { return shape.at(1); }

  double& operator()(int i, int j) { return data[i * shape[1] + j]; }
  const double& operator()(int i, int j) const {
    return data[i * shape[1] + j];
  }
  double& operator[](int i) { return data[i]; }
  double operator[](int i) const { return data[i]; }

  void fill(double v);
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// A named trainable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape) {}
};

// c[m,n] = (or +=) a[m,k] * b[k,n]
void gemm(int m, int k, int n, const double* a, const double* b, double* c,
          bool accumulate);
// c[m,n] = (or +=) a^T * b where a is stored [k, m]
void gemm_tn(int m, int k, int n, const double* a, const double* b, double* c,
             bool accumulate);
// c[m,n] = (or +=) a[m,k] * b^T where b is stored [n, k]
void gemm_nt(int m, int k, int n, const double* a, const double* b, double* c,
             bool accumulate);

}  // namespace uwbloc::nn
