#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ori/features.hpp"
#include "ori/matrix.hpp"
#include "ori/models.hpp"
#include "ori/optim.hpp"
#include "ori/rng.hpp"

namespace ori {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int window_stride = 1;      // training windows per clip: every stride-th frame
  int val_stride = 1;
  double linear_learning_rate = 0.01;
  double linear_l2 = 1e-4;
  double linear_epsilon = 0.05;
};

struct EpochLog {
  int epoch = 0;
  double train_mae = 0.0;  // 5-point scale
  double val_mae = 0.0;
  double seconds = 0.0;
};

struct Checkpoint {
  int format_version = 1;
  ModelKind kind = ModelKind::simple;
  StreamMask mask;
  std::uint64_t seed = 0;
  std::variant<LinearBaselineParams, SimpleModelParams, KeyFrameModelParams> params;

  int input_dim() const {
    return std::visit([](const auto& p) { return p.input_dim(); }, params);
  }
};

struct PredictContext {
  SimpleWorkspace simple;
  KeyFrameWorkspace keyframe;
};

inline double predict_unit(const Checkpoint& ck, const SequenceWindow& w,
                           PredictContext& ctx) {
  switch (ck.kind) {
    case ModelKind::linear:
      return predict_linear(std::get<LinearBaselineParams>(ck.params),
                            w.frame(w.length - 1));
    case ModelKind::simple:
      return predict_simple(std::get<SimpleModelParams>(ck.params), w, ctx.simple);
    case ModelKind::keyframe:
      return predict_keyframe(std::get<KeyFrameModelParams>(ck.params), w, ctx.keyframe)
          .ori_unit;
  }
  throw std::logic_error("predict_unit: bad model kind");
}

inline double predict_unit(const Checkpoint& ck, const SequenceWindow& w) {
  PredictContext ctx;
  return predict_unit(ck, w, ctx);
}

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLog> log;
  int best_epoch = -1;
  double best_val_mae = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double mean_abs_5pt(const std::vector<double>& abs_errors) {
  double sum = 0.0, comp = 0.0;
  for (double e : abs_errors) {
    const double y = e - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return 4.0 * sum / static_cast<double>(abs_errors.size());
}

inline void scale_blocks(std::vector<ParamRef>& refs, double s) {
  for (auto& r : refs) {
    double* d = r.value->data();
    for (std::size_t i = 0; i < r.value->size(); ++i) d[i] *= s;
  }
}

inline void zero_blocks(std::vector<ParamRef>& refs) {
  for (auto& r : refs) r.value->fill(0.0);
}

template <class Model>
struct RecurrentOutcome {
  Model best;
  std::vector<EpochLog> log;
  int best_epoch = -1;
  double best_val_mae = std::numeric_limits<double>::infinity();
};

template <class Model, class Workspace, class BackFn, class PredFn>
inline RecurrentOutcome<Model> train_recurrent(
    Model model, BackFn back, PredFn pred, const std::vector<SequenceWindow>& train_w,
    const std::vector<SequenceWindow>& val_w, const TrainConfig& cfg) {
  if (train_w.empty() || val_w.empty())
    throw std::invalid_argument("train: empty train or validation window set");
  Model grads = make_like_zero(model);
  auto prefs = model.param_refs();
  auto grefs = grads.param_refs();
  AdamState adam = make_adam_state(prefs, cfg.learning_rate);
  Workspace ws;
  Rng seq(cfg.seed);
  std::vector<std::size_t> order(train_w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  RecurrentOutcome<Model> out;
  out.best = model;
  std::vector<double> val_err(val_w.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng ep = seq.substream("shuffle", epoch);
    ep.shuffle(order);

    double abs_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
      const std::size_t nb =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - i);
      for (std::size_t b = 0; b < nb; ++b) {
        const SequenceWindow& w = train_w[order[i + b]];
        const double y = back(model, w, w.target_unit, grads, ws);
        abs_sum += std::abs(y - w.target_unit);
      }
      scale_blocks(grefs, 1.0 / static_cast<double>(nb));
      adam_step(prefs, grefs, adam);
      zero_blocks(grefs);
      i += nb;
    }

    for (std::size_t v = 0; v < val_w.size(); ++v)
      val_err[v] = std::abs(pred(model, val_w[v], ws) - val_w[v].target_unit);

    EpochLog row;
    row.epoch = epoch;
    row.train_mae = 4.0 * abs_sum / static_cast<double>(train_w.size());
    row.val_mae = mean_abs_5pt(val_err);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!std::isfinite(row.train_mae) || !std::isfinite(row.val_mae))
      throw std::runtime_error("train: diverged at epoch " + std::to_string(epoch) +
                               " (non-finite loss)");
    out.log.push_back(row);
    if (row.val_mae < out.best_val_mae) {
      out.best_val_mae = row.val_mae;
      out.best_epoch = epoch;
      out.best = model;
    }
  }
  return out;
}

struct FrameTable {
  Matrix x{0, 1};
  std::vector<double> y;
};

inline FrameTable frame_table(const ClipDataset& ds, int stride) {
  std::size_t count = 0;
  for (const auto& e : ds.entries)
    count += (e.frames.rows() + static_cast<std::size_t>(stride) - 1) /
             static_cast<std::size_t>(stride);
  if (ds.entries.empty() || count == 0)
    throw std::invalid_argument("train: empty dataset");
  FrameTable t;
  t.x = Matrix(count, ds.entries.front().frames.cols());
  t.y.resize(count);
  std::size_t at = 0;
  for (const auto& e : ds.entries)
    for (std::size_t f = 0; f < e.frames.rows(); f += static_cast<std::size_t>(stride)) {
      std::copy(e.frames.row(f), e.frames.row(f) + e.frames.cols(), t.x.row(at));
      t.y[at] = e.target_unit[f];
      ++at;
    }
  return t;
}

}  // namespace detail

// Trains the requested architecture deterministically and returns the
// checkpoint with the lowest validation MAE along with the per-epoch log.
inline TrainResult train_model(ModelKind kind, const ClipDataset& train_set,
                               const ClipDataset& val_set, const StreamMask& mask,
                               const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.window_stride < 1 || cfg.val_stride < 1)
    throw std::invalid_argument("train: epochs, batch size and strides must be positive");
  if (train_set.entries.empty() || val_set.entries.empty())
    throw std::invalid_argument("train: empty dataset");
  const int input_dim = static_cast<int>(train_set.entries.front().frames.cols());
  if (input_dim != mask.dims())
    throw std::invalid_argument("train: dataset dims do not match the stream mask");

  TrainResult result;
  result.best.kind = kind;
  result.best.mask = mask;
  result.best.seed = cfg.seed;

  if (kind == ModelKind::linear) {
    const auto train_t = detail::frame_table(train_set, cfg.window_stride);
    const auto val_t = detail::frame_table(val_set, cfg.val_stride);
    LinearBaselineParams model = make_linear_model(input_dim, cfg.linear_epsilon);
    LinearBaselineParams best = model;
    Rng rng = Rng(cfg.seed).substream("linear");
    std::vector<std::size_t> order(train_t.x.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> verr(val_t.x.rows()), terr(train_t.x.rows());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      const double lr = cfg.linear_learning_rate / (1.0 + 0.1 * static_cast<double>(epoch));
      rng.shuffle(order);
      linear_sgd_epoch(model, train_t.x, train_t.y, lr, cfg.linear_l2, order);
      for (std::size_t i = 0; i < train_t.x.rows(); ++i)
        terr[i] = std::abs(predict_linear(model, train_t.x.row(i)) - train_t.y[i]);
      for (std::size_t i = 0; i < val_t.x.rows(); ++i)
        verr[i] = std::abs(predict_linear(model, val_t.x.row(i)) - val_t.y[i]);
      EpochLog row;
      row.epoch = epoch;
      row.train_mae = detail::mean_abs_5pt(terr);
      row.val_mae = detail::mean_abs_5pt(verr);
      row.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!std::isfinite(row.train_mae) || !std::isfinite(row.val_mae))
        throw std::runtime_error("train: diverged at epoch " + std::to_string(epoch));
      result.log.push_back(row);
      if (row.val_mae < result.best_val_mae) {
        result.best_val_mae = row.val_mae;
        result.best_epoch = epoch;
        best = model;
      }
    }
    result.best.params = best;
    return result;
  }

  const auto train_w = train_set.windows(cfg.window_stride);
  const auto val_w = val_set.windows(cfg.val_stride);
  Rng init = Rng(cfg.seed).substream("init");

  if (kind == ModelKind::simple) {
    auto out = detail::train_recurrent<SimpleModelParams, SimpleWorkspace>(
        make_simple_model(input_dim, init),
        [](const SimpleModelParams& m, const SequenceWindow& w, double t,
           SimpleModelParams& g, SimpleWorkspace& ws) {
          return backprop_simple(m, w, t, g, ws);
        },
        [](const SimpleModelParams& m, const SequenceWindow& w, SimpleWorkspace& ws) {
          return predict_simple(m, w, ws);
        },
        train_w, val_w, cfg);
    result.best.params = out.best;
    result.log = out.log;
    result.best_epoch = out.best_epoch;
    result.best_val_mae = out.best_val_mae;
    return result;
  }

  auto out = detail::train_recurrent<KeyFrameModelParams, KeyFrameWorkspace>(
      make_keyframe_model(input_dim, init),
      [](const KeyFrameModelParams& m, const SequenceWindow& w, double t,
         KeyFrameModelParams& g, KeyFrameWorkspace& ws) {
        return backprop_keyframe(m, w, t, g, ws);
      },
      [](const KeyFrameModelParams& m, const SequenceWindow& w, KeyFrameWorkspace& ws) {
        return predict_keyframe(m, w, ws).ori_unit;
      },
      train_w, val_w, cfg);
  result.best.params = out.best;
  result.log = out.log;
  result.best_epoch = out.best_epoch;
  result.best_val_mae = out.best_val_mae;
  return result;
}

}  // namespace ori
