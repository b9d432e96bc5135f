#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/features.hpp"
#include "ori/lstm.hpp"
#include "ori/matrix.hpp"
#include "ori/optim.hpp"
#include "ori/rng.hpp"

namespace ori {

enum class ModelKind { linear, simple, keyframe };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::linear: return "linear";
    case ModelKind::simple: return "simple";
    case ModelKind::keyframe: return "keyframe";
  }
  throw std::logic_error("model_kind_name: bad enum");
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "linear") return ModelKind::linear;
  if (s == "simple") return ModelKind::simple;
  if (s == "keyframe") return ModelKind::keyframe;
  throw std::invalid_argument("unknown model kind '" + s + "', expected linear|simple|keyframe");
}

inline constexpr int kSimpleHiddenDim = 64;
inline constexpr int kKeyFrameHiddenDim = 32;

namespace detail {

inline void check_window(const SequenceWindow& w, int input_dim) {
  if (w.length != kWindowFrames)
    throw std::invalid_argument("wrong window length: " + std::to_string(w.length) +
                                ", models take " + std::to_string(kWindowFrames) + " frames");
  if (static_cast<int>(w.dims()) != input_dim)
    throw std::invalid_argument("window has " + std::to_string(w.dims()) +
                                " feature dims, model expects " + std::to_string(input_dim));
}

inline Matrix init_linear_head(int fan_in, Rng& rng) {
  Matrix m(1, static_cast<std::size_t>(fan_in));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.next_uniform(-bound, bound);
  return m;
}

inline void append_cell_refs(const std::string& prefix, LstmCellParams& c,
                             std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w_input", &c.w_input});
  out.push_back({prefix + ".w_forget", &c.w_forget});
  out.push_back({prefix + ".w_output", &c.w_output});
  out.push_back({prefix + ".w_candidate", &c.w_candidate});
  out.push_back({prefix + ".b_input", &c.b_input});
  out.push_back({prefix + ".b_forget", &c.b_forget});
  out.push_back({prefix + ".b_output", &c.b_output});
  out.push_back({prefix + ".b_candidate", &c.b_candidate});
}

}  // namespace detail

// Recurrent model: one cell over the window, sigmoid readout of the final
// hidden state.
struct SimpleModelParams {
  LstmCellParams cell;
  Matrix head_weight{1, 1};
  Matrix head_bias{1, 1};

  int input_dim() const { return cell.input_dim; }
  std::vector<ParamRef> param_refs() {
    std::vector<ParamRef> out;
    detail::append_cell_refs("cell", cell, out);
    out.push_back({"head.weight", &head_weight});
    out.push_back({"head.bias", &head_bias});
    return out;
  }
};

inline SimpleModelParams make_simple_model(int input_dim, Rng& rng,
                                           int hidden_dim = kSimpleHiddenDim) {
  SimpleModelParams m;
  m.cell = init_lstm_cell(input_dim, hidden_dim, rng);
  m.head_weight = detail::init_linear_head(hidden_dim, rng);
  m.head_bias = Matrix(1, 1, 0.0);
  return m;
}

inline SimpleModelParams make_like_zero(const SimpleModelParams& p) {
  SimpleModelParams z;
  z.cell = LstmCellParams(p.cell.input_dim, p.cell.hidden_dim);
  z.head_weight = Matrix(1, p.head_weight.cols());
  z.head_bias = Matrix(1, 1);
  return z;
}

struct SimpleWorkspace {
  LstmSequenceCache cache;
  Matrix dh{1, 1};
};

inline double predict_simple(const SimpleModelParams& p, const SequenceWindow& w,
                             SimpleWorkspace& ws) {
  detail::check_window(w, p.cell.input_dim);
  lstm_forward(p.cell, [&w](int t) { return w.frame(t); }, w.length, ws.cache);
  const std::size_t h = static_cast<std::size_t>(p.cell.hidden_dim);
  const double* h_last = ws.cache.hidden.row(static_cast<std::size_t>(w.length - 1));
  return sigmoid(dot(p.head_weight.row(0), h_last, h) + p.head_bias[0]);
}

inline double predict_simple(const SimpleModelParams& p, const SequenceWindow& w) {
  SimpleWorkspace ws;
  return predict_simple(p, w, ws);
}

// Accumulates the gradient of |prediction - target| into grads and returns
// the prediction. The subgradient at zero residual is zero.
inline double backprop_simple(const SimpleModelParams& p, const SequenceWindow& w,
                              double target, SimpleModelParams& grads, SimpleWorkspace& ws) {
  const double y = predict_simple(p, w, ws);
  const double g0 = y > target ? 1.0 : (y < target ? -1.0 : 0.0);
  const std::size_t h = static_cast<std::size_t>(p.cell.hidden_dim);
  const std::size_t last = static_cast<std::size_t>(w.length - 1);
  const double dpre = g0 * y * (1.0 - y);
  const double* h_last = ws.cache.hidden.row(last);
  axpy(dpre, h_last, grads.head_weight.data(), h);
  grads.head_bias[0] += dpre;
  if (ws.dh.rows() != static_cast<std::size_t>(w.length) || ws.dh.cols() != h)
    ws.dh = Matrix(static_cast<std::size_t>(w.length), h);
  else
    ws.dh.fill(0.0);
  axpy(dpre, p.head_weight.row(0), ws.dh.row(last), h);
  lstm_backward(p.cell, [&w](int t) { return w.frame(t); }, w.length, ws.cache, ws.dh,
                grads.cell);
  return y;
}

// Bidirectional model: per-frame sigmoid ratings and softmaxed weight logits
// over the window; the output is their dot product.
struct KeyFrameModelParams {
  LstmCellParams forward_cell;
  LstmCellParams backward_cell;
  Matrix rating_weight{1, 1};
  Matrix rating_bias{1, 1};
  Matrix weight_weight{1, 1};
  Matrix weight_bias{1, 1};

  int input_dim() const { return forward_cell.input_dim; }
  int concat_dim() const { return forward_cell.hidden_dim + backward_cell.hidden_dim; }
  std::vector<ParamRef> param_refs() {
    std::vector<ParamRef> out;
    detail::append_cell_refs("forward", forward_cell, out);
    detail::append_cell_refs("backward", backward_cell, out);
    out.push_back({"rating_head.weight", &rating_weight});
    out.push_back({"rating_head.bias", &rating_bias});
    out.push_back({"weight_head.weight", &weight_weight});
    out.push_back({"weight_head.bias", &weight_bias});
    return out;
  }
};

inline KeyFrameModelParams make_keyframe_model(int input_dim, Rng& rng,
                                               int hidden_dim = kKeyFrameHiddenDim) {
  KeyFrameModelParams m;
  m.forward_cell = init_lstm_cell(input_dim, hidden_dim, rng);
  m.backward_cell = init_lstm_cell(input_dim, hidden_dim, rng);
  m.rating_weight = detail::init_linear_head(2 * hidden_dim, rng);
  m.rating_bias = Matrix(1, 1, 0.0);
  m.weight_weight = detail::init_linear_head(2 * hidden_dim, rng);
  m.weight_bias = Matrix(1, 1, 0.0);
  return m;
}

inline KeyFrameModelParams make_like_zero(const KeyFrameModelParams& p) {
  KeyFrameModelParams z;
  z.forward_cell = LstmCellParams(p.forward_cell.input_dim, p.forward_cell.hidden_dim);
  z.backward_cell = LstmCellParams(p.backward_cell.input_dim, p.backward_cell.hidden_dim);
  z.rating_weight = Matrix(1, p.rating_weight.cols());
  z.rating_bias = Matrix(1, 1);
  z.weight_weight = Matrix(1, p.weight_weight.cols());
  z.weight_bias = Matrix(1, 1);
  return z;
}

struct KeyFramePrediction {
  double ori_unit = 0.0;
  std::vector<double> ratings;  // per frame, in (0,1)
  std::vector<double> weights;  // softmax, sums to 1
};

struct KeyFrameWorkspace {
  LstmSequenceCache fwd, bwd;
  Matrix concat{1, 1};  // steps x (2h)
  Matrix dh_fwd{1, 1}, dh_bwd{1, 1};
  std::vector<double> ratings, logits, weights;
};

inline KeyFramePrediction predict_keyframe(const KeyFrameModelParams& p,
                                           const SequenceWindow& w, KeyFrameWorkspace& ws) {
  detail::check_window(w, p.forward_cell.input_dim);
  if (p.forward_cell.hidden_dim != p.backward_cell.hidden_dim)
    throw std::invalid_argument("keyframe model: direction hidden dims differ");
  const int T = w.length;
  const std::size_t h = static_cast<std::size_t>(p.forward_cell.hidden_dim);
  lstm_forward(p.forward_cell, [&w](int t) { return w.frame(t); }, T, ws.fwd);
  lstm_forward(p.backward_cell, [&w, T](int t) { return w.frame(T - 1 - t); }, T, ws.bwd);

  if (ws.concat.rows() != static_cast<std::size_t>(T) || ws.concat.cols() != 2 * h)
    ws.concat = Matrix(static_cast<std::size_t>(T), 2 * h);
  ws.ratings.resize(static_cast<std::size_t>(T));
  ws.logits.resize(static_cast<std::size_t>(T));
  ws.weights.resize(static_cast<std::size_t>(T));

  for (int t = 0; t < T; ++t) {
    const std::size_t st = static_cast<std::size_t>(t);
    double* u = ws.concat.row(st);
    const double* hf = ws.fwd.hidden.row(st);
    const double* hb = ws.bwd.hidden.row(static_cast<std::size_t>(T - 1 - t));
    std::copy(hf, hf + h, u);
    std::copy(hb, hb + h, u + h);
    ws.ratings[st] = sigmoid(dot(p.rating_weight.row(0), u, 2 * h) + p.rating_bias[0]);
    ws.logits[st] = dot(p.weight_weight.row(0), u, 2 * h) + p.weight_bias[0];
  }

  const double max_logit = *std::max_element(ws.logits.begin(), ws.logits.end());
  double denom = 0.0;
  for (int t = 0; t < T; ++t) {
    ws.weights[static_cast<std::size_t>(t)] =
        std::exp(ws.logits[static_cast<std::size_t>(t)] - max_logit);
    denom += ws.weights[static_cast<std::size_t>(t)];
  }
  double y = 0.0;
  for (int t = 0; t < T; ++t) {
    ws.weights[static_cast<std::size_t>(t)] /= denom;
    y += ws.weights[static_cast<std::size_t>(t)] * ws.ratings[static_cast<std::size_t>(t)];
  }

  KeyFramePrediction out;
  out.ori_unit = y;
  out.ratings = ws.ratings;
  out.weights = ws.weights;
  return out;
}

inline KeyFramePrediction predict_keyframe(const KeyFrameModelParams& p,
                                           const SequenceWindow& w) {
  KeyFrameWorkspace ws;
  return predict_keyframe(p, w, ws);
}

inline double backprop_keyframe(const KeyFrameModelParams& p, const SequenceWindow& w,
                                double target, KeyFrameModelParams& grads,
                                KeyFrameWorkspace& ws) {
  const KeyFramePrediction pred = predict_keyframe(p, w, ws);
  const double y = pred.ori_unit;
  const double g0 = y > target ? 1.0 : (y < target ? -1.0 : 0.0);
  const int T = w.length;
  const std::size_t h = static_cast<std::size_t>(p.forward_cell.hidden_dim);

  if (ws.dh_fwd.rows() != static_cast<std::size_t>(T) || ws.dh_fwd.cols() != h) {
    ws.dh_fwd = Matrix(static_cast<std::size_t>(T), h);
    ws.dh_bwd = Matrix(static_cast<std::size_t>(T), h);
  } else {
    ws.dh_fwd.fill(0.0);
    ws.dh_bwd.fill(0.0);
  }

  for (int t = 0; t < T; ++t) {
    const std::size_t st = static_cast<std::size_t>(t);
    const double a = ws.weights[st];
    const double r = ws.ratings[st];
    const double dpre_r = g0 * a * r * (1.0 - r);
    const double ds = g0 * a * (r - y);
    const double* u = ws.concat.row(st);
    axpy(dpre_r, u, grads.rating_weight.data(), 2 * h);
    grads.rating_bias[0] += dpre_r;
    axpy(ds, u, grads.weight_weight.data(), 2 * h);
    grads.weight_bias[0] += ds;
    // du = dpre_r * rating_weight + ds * weight_weight, split into the two
    // direction states.
    double* df = ws.dh_fwd.row(st);
    double* db = ws.dh_bwd.row(static_cast<std::size_t>(T - 1 - t));
    const double* wr = p.rating_weight.row(0);
    const double* wsw = p.weight_weight.row(0);
    for (std::size_t j = 0; j < h; ++j) {
      df[j] += dpre_r * wr[j] + ds * wsw[j];
      db[j] += dpre_r * wr[j + h] + ds * wsw[j + h];
    }
  }

  lstm_backward(p.forward_cell, [&w](int t) { return w.frame(t); }, T, ws.fwd, ws.dh_fwd,
                grads.forward_cell);
  lstm_backward(p.backward_cell, [&w, T](int t) { return w.frame(T - 1 - t); }, T, ws.bwd,
                ws.dh_bwd, grads.backward_cell);
  return y;
}

// Frame-wise model with no temporal context. Predictions are clamped to the
// unit interval.
struct LinearBaselineParams {
  Matrix weight{1, 1};
  Matrix bias{1, 1};
  double epsilon = 0.05;

  int input_dim() const { return static_cast<int>(weight.cols()); }
  std::vector<ParamRef> param_refs() {
    return {{"linear.weight", &weight}, {"linear.bias", &bias}};
  }
};

inline LinearBaselineParams make_linear_model(int input_dim, double epsilon = 0.05) {
  LinearBaselineParams m;
  m.weight = Matrix(1, static_cast<std::size_t>(input_dim), 0.0);
  m.bias = Matrix(1, 1, 0.0);
  m.epsilon = epsilon;
  return m;
}

inline double predict_linear(const LinearBaselineParams& p, const double* x) {
  const double y = dot(p.weight.row(0), x, p.weight.cols()) + p.bias[0];
  return std::clamp(y, 0.0, 1.0);
}

struct LinearTrainConfig {
  int epochs = 30;
  double learning_rate = 0.01;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// One stochastic subgradient pass over the frames in the given order.
inline void linear_sgd_epoch(LinearBaselineParams& p, const Matrix& frames,
                             const std::vector<double>& targets, double lr, double l2,
                             const std::vector<std::size_t>& order) {
  const std::size_t d = frames.cols();
  for (std::size_t i : order) {
    const double* x = frames.row(i);
    const double r = dot(p.weight.row(0), x, d) + p.bias[0] - targets[i];
    double g = 0.0;
    if (r > p.epsilon)
      g = 1.0;
    else if (r < -p.epsilon)
      g = -1.0;
    double* wdata = p.weight.data();
    for (std::size_t j = 0; j < d; ++j) wdata[j] -= lr * (g * x[j] + l2 * wdata[j]);
    p.bias[0] -= lr * g;
  }
}

// Epsilon-insensitive regression by stochastic subgradient descent over
// frames in shuffled order.
inline void fit_linear(LinearBaselineParams& p, const Matrix& frames,
                       const std::vector<double>& targets, const LinearTrainConfig& cfg) {
  if (frames.rows() != targets.size())
    throw std::invalid_argument("fit_linear: frame/target count mismatch");
  if (frames.cols() != p.weight.cols())
    throw std::invalid_argument("fit_linear: dimension mismatch");
  if (frames.rows() == 0) throw std::invalid_argument("fit_linear: empty dataset");
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(frames.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    const double lr = cfg.learning_rate / (1.0 + 0.1 * static_cast<double>(epoch));
    linear_sgd_epoch(p, frames, targets, lr, cfg.l2, order);
  }
}

}  // namespace ori
