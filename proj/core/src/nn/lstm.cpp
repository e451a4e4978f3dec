#include "uwbloc/nn/lstm.hpp"

#include <cmath>
#include <stdexcept>

#include "uwbloc/nn/layers.hpp"
#include "uwbloc/rng.hpp"

namespace uwbloc::nn {

namespace {
double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

Lstm::Lstm(int input_dim, int units, uint64_t seed)
    : input_dim_(input_dim),
      units_(units),
      w_("w", Tensor({4 * units, input_dim + units})),
      b_("b", Tensor({4 * units})) {
  if (input_dim < 1 || units < 1)
    throw std::invalid_argument("lstm: dimensions must be positive");
  Rng rng(seed);
  he_uniform_init(w_.value, input_dim + units, rng);
  for (int u = 0; u < units; ++u) b_.value[units + u] = 1.0;
}

Tensor Lstm::forward(const Tensor& seq, const State* s0) {
  if (seq.rank() != 2 || seq.cols() != input_dim_)
    throw std::invalid_argument("lstm: input shape mismatch");
  int steps = seq.rows();
  seq_ = seq;
  if (s0) {
    if (static_cast<int>(s0->h.size()) != units_ ||
        static_cast<int>(s0->c.size()) != units_)
      throw std::invalid_argument("lstm: initial state size mismatch");
    s0_ = *s0;
  } else {
    s0_.h.assign(units_, 0.0);
    s0_.c.assign(units_, 0.0);
  }
  gi_ = Tensor({steps, units_});
  gf_ = Tensor({steps, units_});
  gg_ = Tensor({steps, units_});
  go_ = Tensor({steps, units_});
  cs_ = Tensor({steps, units_});
  hs_ = Tensor({steps, units_});
  tc_ = Tensor({steps, units_});

  int width = input_dim_ + units_;
  std::vector<double> zin(width);
  std::vector<double> z(4 * units_);
  const double* h_prev = s0_.h.data();
  const double* c_prev = s0_.c.data();
  for (int t = 0; t < steps; ++t) {
    const double* xt = &seq(t, 0);
    std::copy(xt, xt + input_dim_, zin.begin());
    std::copy(h_prev, h_prev + units_, zin.begin() + input_dim_);
    for (int r = 0; r < 4 * units_; ++r) {
      const double* wr = &w_.value(r, 0);
      double acc = b_.value[r];
      for (int j = 0; j < width; ++j) acc += wr[j] * zin[j];
      z[r] = acc;
    }
    for (int u = 0; u < units_; ++u) {
      double i = sigmoid(z[u]);
      double f = sigmoid(z[units_ + u]);
      double g = std::tanh(z[2 * units_ + u]);
      double o = sigmoid(z[3 * units_ + u]);
      double c = f * c_prev[u] + i * g;
      double th = std::tanh(c);
      gi_(t, u) = i;
      gf_(t, u) = f;
      gg_(t, u) = g;
      go_(t, u) = o;
      cs_(t, u) = c;
      tc_(t, u) = th;
      hs_(t, u) = o * th;
    }
    h_prev = &hs_(t, 0);
    c_prev = &cs_(t, 0);
  }
  final_.h.assign(&hs_(steps - 1, 0), &hs_(steps - 1, 0) + units_);
  final_.c.assign(&cs_(steps - 1, 0), &cs_(steps - 1, 0) + units_);
  return hs_;
}

Tensor Lstm::backward(const Tensor& grad_out, const double* dh_last,
                      const double* dc_last, State* dstate0) {
  int steps = seq_.rows();
  if (grad_out.rank() != 2 || grad_out.rows() != steps ||
      grad_out.cols() != units_)
    throw std::invalid_argument("lstm: gradient shape mismatch");
  Tensor dseq({steps, input_dim_});
  std::vector<double> dh_next(units_, 0.0), dc_next(units_, 0.0);
  if (dh_last)
    for (int u = 0; u < units_; ++u) dh_next[u] = dh_last[u];
  if (dc_last)
    for (int u = 0; u < units_; ++u) dc_next[u] = dc_last[u];
  std::vector<double> dz(4 * units_), zin(input_dim_ + units_);
  int width = input_dim_ + units_;
  for (int t = steps - 1; t >= 0; --t) {
    const double* h_prev = t > 0 ? &hs_(t - 1, 0) : s0_.h.data();
    const double* c_prev = t > 0 ? &cs_(t - 1, 0) : s0_.c.data();
    const double* xt = &seq_(t, 0);
    std::copy(xt, xt + input_dim_, zin.begin());
    std::copy(h_prev, h_prev + units_, zin.begin() + input_dim_);
    for (int u = 0; u < units_; ++u) {
      double dh = grad_out(t, u) + dh_next[u];
      double o = go_(t, u), th = tc_(t, u);
      double dc = dh * o * (1.0 - th * th) + dc_next[u];
      double i = gi_(t, u), f = gf_(t, u), g = gg_(t, u);
      dz[u] = dc * g * i * (1.0 - i);
      dz[units_ + u] = dc * c_prev[u] * f * (1.0 - f);
      dz[2 * units_ + u] = dc * i * (1.0 - g * g);
      dz[3 * units_ + u] = dh * th * o * (1.0 - o);
      dc_next[u] = dc * f;
    }
    for (int r = 0; r < 4 * units_; ++r) {
      double d = dz[r];
      b_.grad[r] += d;
      if (d == 0.0) continue;
      double* wg = &w_.grad(r, 0);
      for (int j = 0; j < width; ++j) wg[j] += d * zin[j];
    }
    double* dx = &dseq(t, 0);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (int r = 0; r < 4 * units_; ++r) {
      double d = dz[r];
      if (d == 0.0) continue;
      const double* wr = &w_.value(r, 0);
      for (int j = 0; j < input_dim_; ++j) dx[j] += d * wr[j];
      for (int u = 0; u < units_; ++u) dh_next[u] += d * wr[input_dim_ + u];
    }
  }
  if (dstate0) {
    dstate0->h = dh_next;
    dstate0->c = dc_next;
  }
  return dseq;
}

}  // namespace uwbloc::nn
