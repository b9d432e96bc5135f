#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/matrix.hpp"

namespace ori {

// Named view into a model's parameter (or gradient) blocks. Models expose
// their blocks in a fixed order; optimizer state and checkpoints follow it.
struct ParamRef {
  std::string name;
  Matrix* value;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<Matrix> m;  // first-moment accumulators, one per block
  std::vector<Matrix> v;  // second-moment accumulators
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
};

inline AdamState make_adam_state(const std::vector<ParamRef>& params, double learning_rate = 1e-3,
                                 double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8) {
  AdamState st;
  st.learning_rate = learning_rate;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.epsilon = epsilon;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const auto& p : params) {
    st.m.emplace_back(p.value->rows(), p.value->cols(), 0.0);
    st.v.emplace_back(p.value->rows(), p.value->cols(), 0.0);
  }
  return st;
}

// One bias-corrected Adam update over all blocks. Gradients must be finite
// and shape-aligned with the parameters.
inline void adam_step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
                      AdamState& st) {
  if (params.size() != grads.size() || params.size() != st.m.size())
    throw std::invalid_argument("adam_step: block count mismatch");
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (!params[b].value->same_shape(*grads[b].value) || !params[b].value->same_shape(st.m[b]))
      throw std::invalid_argument("adam_step: shape mismatch in block '" + params[b].name + "'");
    if (!grads[b].value->all_finite())
      throw std::runtime_error("adam_step: non-finite gradient in block '" + params[b].name + "'");
  }
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t b = 0; b < params.size(); ++b) {
    double* p = params[b].value->data();
    const double* g = grads[b].value->data();
    double* m = st.m[b].data();
    double* v = st.v[b].data();
    const std::size_t n = params[b].value->size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= st.learning_rate * mhat / (std::sqrt(vhat) + st.epsilon);
    }
  }
}

// Central-difference gradient of a scalar function of the referenced
// parameters. The function is re-evaluated with each coordinate nudged by
// +/- h; parameters are restored exactly afterwards.
inline std::vector<Matrix> finite_diff_grad(const std::function<double()>& f,
                                            const std::vector<ParamRef>& params, double h = 1e-5) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    Matrix g(p.value->rows(), p.value->cols(), 0.0);
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      double saved = (*p.value)[i];
      (*p.value)[i] = saved + h;
      double fp = f();
      (*p.value)[i] = saved - h;
      double fm = f();
      (*p.value)[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("finite_diff_grad: non-finite evaluation in block '" + p.name +
                                 "'");
      g[i] = (fp - fm) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Same as finite_diff_grad but only for the listed coordinates of one block.
inline std::vector<double> finite_diff_grad_coords(const std::function<double()>& f,
                                                   Matrix& block,
                                                   const std::vector<std::size_t>& coords,
                                                   double h = 1e-5) {
  std::vector<double> out;
  out.reserve(coords.size());
  for (std::size_t i : coords) {
    double saved = block[i];
    block[i] = saved + h;
    double fp = f();
    block[i] = saved - h;
    double fm = f();
    block[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("finite_diff_grad: non-finite evaluation");
    out.push_back((fp - fm) / (2.0 * h));
  }
  return out;
}

}  // namespace ori
