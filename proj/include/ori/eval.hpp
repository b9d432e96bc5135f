#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/features.hpp"
#include "ori/stats.hpp"
#include "ori/synth.hpp"
#include "ori/train.hpp"

namespace ori {

// Every drive must appear in exactly one split.
inline void validate_drive_disjoint(const std::vector<ClipMeta>& meta) {
  std::map<std::string, std::string> split_of_drive;
  for (const auto& m : meta) {
    if (m.split != "train" && m.split != "val" && m.split != "test")
      throw std::invalid_argument("unknown split '" + m.split + "' for clip " + m.clip_id);
    auto [it, inserted] = split_of_drive.try_emplace(m.drive_id, m.split);
    if (!inserted && it->second != m.split)
      throw std::invalid_argument("drive " + m.drive_id + " appears in splits '" +
                                  it->second + "' and '" + m.split + "'");
  }
}

// Unmasked view of one clip plus its per-frame targets; the pointed-to data
// must outlive the view.
struct RawClip {
  std::string clip_id;
  const std::vector<FrameFeatures>* frames = nullptr;
  const std::vector<double>* target_unit = nullptr;
};

struct SplitData {
  std::vector<RawClip> train, val, test;
};

// Groups a corpus by split, targeting the generator's true curve.
inline SplitData split_corpus(const Corpus& corpus) {
  validate_drive_disjoint(corpus.meta);
  SplitData out;
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    RawClip rc;
    rc.clip_id = corpus.clips[i].clip_id;
    rc.frames = &corpus.clips[i].frames;
    rc.target_unit = &corpus.clips[i].truth.unit_values;
    if (corpus.meta[i].split == "train")
      out.train.push_back(rc);
    else if (corpus.meta[i].split == "val")
      out.val.push_back(rc);
    else
      out.test.push_back(rc);
  }
  return out;
}

inline ClipDataset project_dataset(std::span<const RawClip> clips, const StreamMask& mask) {
  ClipDataset ds;
  for (const auto& rc : clips)
    ds.add(rc.clip_id, flatten_clip(*rc.frames, mask), *rc.target_unit);
  return ds;
}

// MAE on the 1..5 scale over a window set, reorder-invariant by compensated
// summation.
inline double evaluate_mae(const Checkpoint& ck, std::span<const SequenceWindow> windows) {
  if (windows.empty()) throw std::invalid_argument("evaluate_mae: empty test set");
  PredictContext ctx;
  double sum = 0.0, comp = 0.0;
  for (const auto& w : windows) {
    const double e = std::abs(4.0 * (predict_unit(ck, w, ctx) - w.target_unit));
    const double y = e - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(windows.size());
}

inline double mean_target_unit(std::span<const SequenceWindow> windows) {
  if (windows.empty()) throw std::invalid_argument("mean_target_unit: empty window set");
  double sum = 0.0, comp = 0.0;
  for (const auto& w : windows) {
    const double y = w.target_unit - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(windows.size());
}

// MAE of the predictor that always answers `constant_unit`.
inline double constant_predictor_mae(double constant_unit,
                                     std::span<const SequenceWindow> windows) {
  if (windows.empty()) throw std::invalid_argument("constant_predictor_mae: empty window set");
  double sum = 0.0, comp = 0.0;
  for (const auto& w : windows) {
    const double e = std::abs(4.0 * (constant_unit - w.target_unit));
    const double y = e - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(windows.size());
}

// Stride-1 per-frame predictions over one clip.
inline std::vector<double> predict_frames(const Checkpoint& ck, const Matrix& frames,
                                          const std::vector<double>& target_unit) {
  const auto windows = make_windows(frames, target_unit);
  PredictContext ctx;
  std::vector<double> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = predict_unit(ck, windows[i], ctx);
  return out;
}

// Mean absolute frame-to-frame delta of a prediction curve.
inline double smoothness_diagnostic(std::span<const double> predictions) {
  if (predictions.size() < 2)
    throw std::invalid_argument("smoothness_diagnostic: need at least 2 frames");
  double sum = 0.0;
  for (std::size_t i = 1; i < predictions.size(); ++i)
    sum += std::abs(predictions[i] - predictions[i - 1]);
  return sum / static_cast<double>(predictions.size() - 1);
}

struct CorrelationEntry {
  std::string name;
  double r = 0.0;  // NaN when the dimension has zero variance
};

// Pearson correlation of every feature dimension with the target series.
inline std::vector<CorrelationEntry> correlate_features(const Matrix& frames,
                                                        const std::vector<double>& target,
                                                        const std::vector<std::string>& names) {
  if (frames.rows() != target.size())
    throw std::invalid_argument("correlate_features: frame/target count mismatch");
  if (frames.rows() < 2) throw std::invalid_argument("correlate_features: need >= 2 frames");
  if (names.size() != frames.cols())
    throw std::invalid_argument("correlate_features: one name per dimension required");
  std::vector<CorrelationEntry> out(frames.cols());
  std::vector<double> col(frames.rows());
  for (std::size_t j = 0; j < frames.cols(); ++j) {
    for (std::size_t i = 0; i < frames.rows(); ++i) col[i] = frames(i, j);
    out[j].name = names[j];
    out[j].r = pearson(col, target);
  }
  return out;
}

struct AblationSpec {
  StreamMask streams;
  ModelKind model = ModelKind::keyframe;
};

struct AblationCell {
  StreamMask streams;
  ModelKind model = ModelKind::keyframe;
  double mae = 0.0;
};

// The seven stream combinations of the reference ablation grid.
inline std::vector<StreamMask> ablation_grid_masks() {
  return {
      make_mask(true, false, false, false),  // gaze
      make_mask(false, true, false, false),  // hand
      make_mask(false, false, true, false),  // pose
      make_mask(false, false, false, true),  // foot
      make_mask(true, true, false, false),   // gaze+hand
      make_mask(true, true, true, false),    // gaze+hand+pose
      make_mask(true, true, true, true),     // all
  };
}

// Trains and scores one model per spec; every cell shares the same seed and
// training configuration for comparability.
inline std::vector<AblationCell> run_ablation(const SplitData& data,
                                              const std::vector<AblationSpec>& specs,
                                              const TrainConfig& cfg, int test_stride = 1) {
  if (specs.empty()) throw std::invalid_argument("run_ablation: empty spec set");
  std::vector<AblationCell> out;
  for (const auto& spec : specs) {
    if (!spec.streams.any()) throw std::invalid_argument("run_ablation: empty stream set");
    const ClipDataset train_ds = project_dataset(data.train, spec.streams);
    const ClipDataset val_ds = project_dataset(data.val, spec.streams);
    const ClipDataset test_ds = project_dataset(data.test, spec.streams);
    const TrainResult r = train_model(spec.model, train_ds, val_ds, spec.streams, cfg);
    const auto test_w = test_ds.windows(test_stride);
    AblationCell cell;
    cell.streams = spec.streams;
    cell.model = spec.model;
    cell.mae = evaluate_mae(r.best, test_w);
    out.push_back(cell);
  }
  return out;
}

}  // namespace ori
