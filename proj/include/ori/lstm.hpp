#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/matrix.hpp"
#include "ori/rng.hpp"

namespace ori {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One gated recurrent cell. Gate weights act on the concatenation
// [x_t ; h_{t-1}], so each weight matrix is hidden_dim x (input_dim +
// hidden_dim).
struct LstmCellParams {
  int input_dim = 0;
  int hidden_dim = 0;
  Matrix w_input, w_forget, w_output, w_candidate;
  Matrix b_input, b_forget, b_output, b_candidate;

  LstmCellParams() = default;
  LstmCellParams(int d, int h)
      : input_dim(d),
        hidden_dim(h),
        w_input(static_cast<std::size_t>(h), static_cast<std::size_t>(d + h)),
        w_forget(static_cast<std::size_t>(h), static_cast<std::size_t>(d + h)),
        w_output(static_cast<std::size_t>(h), static_cast<std::size_t>(d + h)),
        w_candidate(static_cast<std::size_t>(h), static_cast<std::size_t>(d + h)),
        b_input(1, static_cast<std::size_t>(h)),
        b_forget(1, static_cast<std::size_t>(h)),
        b_output(1, static_cast<std::size_t>(h)),
        b_candidate(1, static_cast<std::size_t>(h)) {
    if (d < 1 || h < 1) throw std::invalid_argument("lstm: dims must be positive");
  }
};

// Uniform init in +-1/sqrt(fan_in); forget-gate bias starts at 1 so early
// training does not wipe the cell state.
inline LstmCellParams init_lstm_cell(int input_dim, int hidden_dim, Rng& rng) {
  LstmCellParams p(input_dim, hidden_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim + hidden_dim));
  for (Matrix* w : {&p.w_input, &p.w_forget, &p.w_output, &p.w_candidate})
    for (std::size_t i = 0; i < w->size(); ++i)
      (*w)[i] = rng.next_uniform(-bound, bound);
  p.b_forget.fill(1.0);
  return p;
}

inline void zero_params(LstmCellParams& p) {
  for (Matrix* m : {&p.w_input, &p.w_forget, &p.w_output, &p.w_candidate, &p.b_input,
                    &p.b_forget, &p.b_output, &p.b_candidate})
    m->fill(0.0);
}

// Per-step activations kept from the forward pass; everything backprop needs
// can be rebuilt from post-activation gate values.
struct LstmSequenceCache {
  Matrix gate_i, gate_f, gate_o, gate_g;  // post-activation, steps x h
  Matrix cell, tanh_cell, hidden;         // steps x h
  int steps = 0;

  void reset(int n_steps, int hidden_dim) {
    const auto t = static_cast<std::size_t>(n_steps);
    const auto h = static_cast<std::size_t>(hidden_dim);
    if (gate_i.rows() != t || gate_i.cols() != h) {
      gate_i = Matrix(t, h);
      gate_f = Matrix(t, h);
      gate_o = Matrix(t, h);
      gate_g = Matrix(t, h);
      cell = Matrix(t, h);
      tanh_cell = Matrix(t, h);
      hidden = Matrix(t, h);
    }
    steps = n_steps;
  }
};

namespace detail {

// z = [x ; h_prev] must already be assembled by the caller.
inline void lstm_step(const LstmCellParams& p, const double* z, const double* c_prev,
                      double* gi, double* gf, double* go, double* gg, double* c_out,
                      double* tanh_out, double* h_out) {
  const std::size_t h = static_cast<std::size_t>(p.hidden_dim);
  const std::size_t zdim = static_cast<std::size_t>(p.input_dim + p.hidden_dim);
  for (std::size_t r = 0; r < h; ++r) {
    gi[r] = sigmoid(p.b_input[r] + dot(p.w_input.row(r), z, zdim));
    gf[r] = sigmoid(p.b_forget[r] + dot(p.w_forget.row(r), z, zdim));
    go[r] = sigmoid(p.b_output[r] + dot(p.w_output.row(r), z, zdim));
    gg[r] = std::tanh(p.b_candidate[r] + dot(p.w_candidate.row(r), z, zdim));
    c_out[r] = gf[r] * c_prev[r] + gi[r] * gg[r];
    tanh_out[r] = std::tanh(c_out[r]);
    h_out[r] = go[r] * tanh_out[r];
  }
}

inline void check_finite_row(const double* v, std::size_t n, const char* layer) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(v[i]))
      throw std::runtime_error(std::string("non-finite value in ") + layer);
}

}  // namespace detail

// Single cell update, exposed for step-level checks. Returns (h', c') and
// optionally the post-activation gate values.
struct LstmGateValues {
  std::vector<double> gate_i, gate_f, gate_o, gate_g;
};

inline void lstm_cell_forward(const LstmCellParams& p, std::span<const double> x,
                              std::span<const double> h_prev, std::span<const double> c_prev,
                              std::span<double> h_out, std::span<double> c_out,
                              LstmGateValues* gates = nullptr) {
  const std::size_t d = static_cast<std::size_t>(p.input_dim);
  const std::size_t h = static_cast<std::size_t>(p.hidden_dim);
  if (x.size() != d || h_prev.size() != h || c_prev.size() != h || h_out.size() != h ||
      c_out.size() != h)
    throw std::invalid_argument("lstm_cell_forward: dimension mismatch");
  detail::check_finite_row(x.data(), d, "cell input");
  std::vector<double> z(d + h);
  std::copy(x.begin(), x.end(), z.begin());
  std::copy(h_prev.begin(), h_prev.end(), z.begin() + static_cast<long>(d));
  std::vector<double> gi(h), gf(h), go(h), gg(h), tanh_c(h);
  detail::lstm_step(p, z.data(), c_prev.data(), gi.data(), gf.data(), go.data(), gg.data(),
                    c_out.data(), tanh_c.data(), h_out.data());
  if (gates) {
    gates->gate_i = gi;
    gates->gate_f = gf;
    gates->gate_o = go;
    gates->gate_g = gg;
  }
}

// Runs the cell over a sequence; xs(t) must return a pointer to the t-th
// input frame (input_dim doubles). State starts at zero.
template <class XsFn>
inline void lstm_forward(const LstmCellParams& p, XsFn&& xs, int steps,
                         LstmSequenceCache& cache) {
  if (steps < 1) throw std::invalid_argument("lstm_forward: need at least one step");
  cache.reset(steps, p.hidden_dim);
  const std::size_t d = static_cast<std::size_t>(p.input_dim);
  const std::size_t h = static_cast<std::size_t>(p.hidden_dim);
  std::vector<double> z(d + h, 0.0);
  const std::vector<double> zeros(h, 0.0);
  for (int t = 0; t < steps; ++t) {
    const std::size_t st = static_cast<std::size_t>(t);
    const double* x = xs(t);
    detail::check_finite_row(x, d, "lstm input");
    std::copy(x, x + d, z.begin());
    if (t == 0)
      std::fill(z.begin() + static_cast<long>(d), z.end(), 0.0);
    else
      std::copy(cache.hidden.row(st - 1), cache.hidden.row(st - 1) + h,
                z.begin() + static_cast<long>(d));
    const double* c_prev = t == 0 ? zeros.data() : cache.cell.row(st - 1);
    detail::lstm_step(p, z.data(), c_prev, cache.gate_i.row(st), cache.gate_f.row(st),
                      cache.gate_o.row(st), cache.gate_g.row(st), cache.cell.row(st),
                      cache.tanh_cell.row(st), cache.hidden.row(st));
    detail::check_finite_row(cache.hidden.row(st), h, "lstm hidden state");
  }
}

// Backprop through time. dh_extra(t, :) is the loss gradient flowing into
// h_t from outside the recurrence. Gradients accumulate into grads, which
// must be shaped like the parameters.
template <class XsFn>
inline void lstm_backward(const LstmCellParams& p, XsFn&& xs, int steps,
                          const LstmSequenceCache& cache, const Matrix& dh_extra,
                          LstmCellParams& grads) {
  const std::size_t d = static_cast<std::size_t>(p.input_dim);
  const std::size_t h = static_cast<std::size_t>(p.hidden_dim);
  if (cache.steps != steps) throw std::invalid_argument("lstm_backward: stale cache");
  if (dh_extra.rows() != static_cast<std::size_t>(steps) || dh_extra.cols() != h)
    throw std::invalid_argument("lstm_backward: dh_extra shape mismatch");

  std::vector<double> dh_carry(h, 0.0), dc_carry(h, 0.0);
  std::vector<double> dpre_i(h), dpre_f(h), dpre_o(h), dpre_g(h);
  std::vector<double> z(d + h), dz(d + h);
  for (int t = steps - 1; t >= 0; --t) {
    const std::size_t st = static_cast<std::size_t>(t);
    for (std::size_t r = 0; r < h; ++r) {
      const double dh = dh_extra(st, r) + dh_carry[r];
      const double o = cache.gate_o(st, r);
      const double tc = cache.tanh_cell(st, r);
      const double i = cache.gate_i(st, r);
      const double f = cache.gate_f(st, r);
      const double g = cache.gate_g(st, r);
      const double c_prev = t == 0 ? 0.0 : cache.cell(st - 1, r);
      dpre_o[r] = dh * tc * o * (1.0 - o);
      const double dc = dh * o * (1.0 - tc * tc) + dc_carry[r];
      dpre_i[r] = dc * g * i * (1.0 - i);
      dpre_g[r] = dc * i * (1.0 - g * g);
      dpre_f[r] = dc * c_prev * f * (1.0 - f);
      dc_carry[r] = dc * f;
    }
    const double* x = xs(t);
    std::copy(x, x + d, z.begin());
    if (t == 0)
      std::fill(z.begin() + static_cast<long>(d), z.end(), 0.0);
    else
      std::copy(cache.hidden.row(st - 1), cache.hidden.row(st - 1) + h,
                z.begin() + static_cast<long>(d));

    outer_add(grads.w_input, dpre_i.data(), z.data());
    outer_add(grads.w_forget, dpre_f.data(), z.data());
    outer_add(grads.w_output, dpre_o.data(), z.data());
    outer_add(grads.w_candidate, dpre_g.data(), z.data());
    axpy(1.0, dpre_i.data(), grads.b_input.data(), h);
    axpy(1.0, dpre_f.data(), grads.b_forget.data(), h);
    axpy(1.0, dpre_o.data(), grads.b_output.data(), h);
    axpy(1.0, dpre_g.data(), grads.b_candidate.data(), h);

    std::fill(dz.begin(), dz.end(), 0.0);
    matvec_transpose_add(p.w_input, dpre_i.data(), dz.data());
    matvec_transpose_add(p.w_forget, dpre_f.data(), dz.data());
    matvec_transpose_add(p.w_output, dpre_o.data(), dz.data());
    matvec_transpose_add(p.w_candidate, dpre_g.data(), dz.data());
    std::copy(dz.begin() + static_cast<long>(d), dz.end(), dh_carry.begin());
  }
}

}  // namespace ori
