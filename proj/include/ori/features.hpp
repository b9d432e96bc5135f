#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/matrix.hpp"

namespace ori {

inline constexpr int kGazeDims = 9;
inline constexpr int kHandCamDims = 18;
inline constexpr int kHandDepthDims = 5;
inline constexpr int kPoseDims = 20;
inline constexpr int kFootDims = 2;
inline constexpr int kFrameDims = kGazeDims + kHandCamDims + kHandDepthDims + kPoseDims + kFootDims;

inline constexpr int kFrameRate = 30;
inline constexpr int kSegmentFrames = 2 * kFrameRate;
inline constexpr int kWindowFrames = 2 * kFrameRate;

inline constexpr std::array<const char*, kGazeDims> kGazeZoneNames = {
    "forward",   "left_shoulder", "left_mirror",       "lap",          "speedometer",
    "infotainment", "rearview_mirror", "right_mirror", "right_shoulder"};

inline constexpr std::array<const char*, 4> kHandJointNames = {
    "left_elbow", "left_wrist", "right_elbow", "right_wrist"};

inline constexpr std::array<const char*, 4> kLeftActivityNames = {
    "on_lap", "in_air", "hover_wheel", "on_wheel"};

inline constexpr std::array<const char*, 6> kRightActivityNames = {
    "on_lap", "in_air", "hover_wheel", "on_wheel", "infotainment", "cup_holder"};

inline constexpr std::array<const char*, 4> kHeldObjectNames = {
    "no_object", "phone_tablet", "beverage_food", "other"};

inline constexpr std::array<const char*, 10> kPoseKeypointNames = {
    "nose",          "neck",         "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow",   "left_wrist",     "right_eye",   "left_eye"};

struct GazeFeatures {
  std::array<double, kGazeDims> zone_probs{};
};

struct HandCamFeatures {
  std::array<double, 8> joint_xy{};       // left/right elbow+wrist image coords
  std::array<double, 4> left_activity{};  // probabilities
  std::array<double, 6> right_activity{};
};

struct HandDepthFeatures {
  double wheel_distance = 0.0;         // closest hand to wheel, scaled
  std::array<double, 4> held_object{}; // probabilities
};

struct PoseFeatures {
  std::array<double, kPoseDims> keypoint_xy{};
};

struct FootFeatures {
  double gas_distance = 0.0;
  double brake_distance = 0.0;
};

struct FrameFeatures {
  GazeFeatures gaze;
  HandCamFeatures hand_cam;
  HandDepthFeatures hand_depth;
  PoseFeatures pose;
  FootFeatures foot;
};

// Which feature streams feed a model. The "hand" stream of the ablation
// grid bundles the camera and depth hand blocks; they stay individually
// selectable here.
struct StreamMask {
  bool gaze = true;
  bool hand_cam = true;
  bool hand_depth = true;
  bool pose = true;
  bool foot = true;

  int dims() const {
    return (gaze ? kGazeDims : 0) + (hand_cam ? kHandCamDims : 0) +
           (hand_depth ? kHandDepthDims : 0) + (pose ? kPoseDims : 0) + (foot ? kFootDims : 0);
  }
  bool any() const { return gaze || hand_cam || hand_depth || pose || foot; }
  bool all() const { return gaze && hand_cam && hand_depth && pose && foot; }
  bool hand() const { return hand_cam && hand_depth; }
  bool operator==(const StreamMask&) const = default;
};

inline StreamMask full_mask() { return StreamMask{}; }

inline StreamMask make_mask(bool gaze, bool hand, bool pose, bool foot) {
  return StreamMask{gaze, hand, hand, pose, foot};
}

// Accepts a comma-separated stream list; "hand" selects both hand blocks,
// "hand_cam"/"hand_depth" select them individually.
inline StreamMask parse_stream_mask(const std::string& csv) {
  StreamMask m{false, false, false, false, false};
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    const std::string tok = csv.substr(start, end - start);
    if (tok == "gaze")
      m.gaze = true;
    else if (tok == "hand")
      m.hand_cam = m.hand_depth = true;
    else if (tok == "hand_cam")
      m.hand_cam = true;
    else if (tok == "hand_depth")
      m.hand_depth = true;
    else if (tok == "pose")
      m.pose = true;
    else if (tok == "foot")
      m.foot = true;
    else if (!tok.empty())
      throw std::invalid_argument("unknown feature stream '" + tok +
                                  "', expected gaze|hand|hand_cam|hand_depth|pose|foot");
    if (end == csv.size()) break;
    start = end + 1;
  }
  if (!m.any()) throw std::invalid_argument("stream list selects nothing");
  return m;
}

inline std::string stream_mask_name(const StreamMask& m) {
  std::string out;
  auto add = [&out](const char* s) {
    if (!out.empty()) out += ',';
    out += s;
  };
  if (m.gaze) add("gaze");
  if (m.hand_cam && m.hand_depth)
    add("hand");
  else {
    if (m.hand_cam) add("hand_cam");
    if (m.hand_depth) add("hand_depth");
  }
  if (m.pose) add("pose");
  if (m.foot) add("foot");
  return out;
}

// Names for the 54 frame dimensions, in flattening order.
inline std::vector<std::string> frame_dim_names() {
  std::vector<std::string> names;
  names.reserve(kFrameDims);
  for (const char* z : kGazeZoneNames) names.push_back(std::string("gaze:") + z);
  for (const char* j : kHandJointNames) {
    names.push_back(std::string("hand_cam:") + j + "_x");
    names.push_back(std::string("hand_cam:") + j + "_y");
  }
  for (const char* a : kLeftActivityNames) names.push_back(std::string("hand_cam:left_") + a);
  for (const char* a : kRightActivityNames) names.push_back(std::string("hand_cam:right_") + a);
  names.push_back("hand_depth:wheel_distance");
  for (const char* o : kHeldObjectNames) names.push_back(std::string("hand_depth:") + o);
  for (const char* p : kPoseKeypointNames) {
    names.push_back(std::string("pose:") + p + "_x");
    names.push_back(std::string("pose:") + p + "_y");
  }
  names.push_back("foot:gas_distance");
  names.push_back("foot:brake_distance");
  return names;
}

namespace detail {

inline void check_unit(double v, const std::string& what, std::vector<std::string>& out) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    out.push_back(what + " outside [0, 1]: " + std::to_string(v));
}

template <std::size_t N>
inline void check_simplex(const std::array<double, N>& p, const std::string& what,
                          std::vector<std::string>& out) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      out.push_back(what + " entry outside [0, 1]: " + std::to_string(v));
      return;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    out.push_back(what + " does not sum to 1: " + std::to_string(sum));
}

}  // namespace detail

// Returns human-readable violations; empty means the frame is well formed.
inline std::vector<std::string> validate(const FrameFeatures& f) {
  std::vector<std::string> out;
  detail::check_simplex(f.gaze.zone_probs, "gaze zone probabilities", out);
  for (std::size_t i = 0; i < f.hand_cam.joint_xy.size(); ++i)
    detail::check_unit(f.hand_cam.joint_xy[i], "hand joint coordinate " + std::to_string(i), out);
  detail::check_simplex(f.hand_cam.left_activity, "left hand activity probabilities", out);
  detail::check_simplex(f.hand_cam.right_activity, "right hand activity probabilities", out);
  detail::check_unit(f.hand_depth.wheel_distance, "wheel distance", out);
  detail::check_simplex(f.hand_depth.held_object, "held object probabilities", out);
  for (std::size_t i = 0; i < f.pose.keypoint_xy.size(); ++i)
    detail::check_unit(f.pose.keypoint_xy[i], "pose coordinate " + std::to_string(i), out);
  detail::check_unit(f.foot.gas_distance, "gas pedal distance", out);
  detail::check_unit(f.foot.brake_distance, "brake pedal distance", out);
  return out;
}

// Writes the selected streams into out (must hold mask.dims() doubles),
// in the fixed order gaze, hand_cam, hand_depth, pose, foot.
inline void flatten(const FrameFeatures& f, const StreamMask& mask, double* out) {
  std::size_t p = 0;
  if (mask.gaze)
    for (double v : f.gaze.zone_probs) out[p++] = v;
  if (mask.hand_cam) {
    for (double v : f.hand_cam.joint_xy) out[p++] = v;
    for (double v : f.hand_cam.left_activity) out[p++] = v;
    for (double v : f.hand_cam.right_activity) out[p++] = v;
  }
  if (mask.hand_depth) {
    out[p++] = f.hand_depth.wheel_distance;
    for (double v : f.hand_depth.held_object) out[p++] = v;
  }
  if (mask.pose)
    for (double v : f.pose.keypoint_xy) out[p++] = v;
  if (mask.foot) {
    out[p++] = f.foot.gas_distance;
    out[p++] = f.foot.brake_distance;
  }
}

inline Matrix flatten_clip(const std::vector<FrameFeatures>& frames, const StreamMask& mask) {
  if (!mask.any()) throw std::invalid_argument("flatten_clip: no streams selected");
  Matrix m(frames.size(), static_cast<std::size_t>(mask.dims()));
  for (std::size_t t = 0; t < frames.size(); ++t) flatten(frames[t], mask, m.row(t));
  return m;
}

// One training/eval window: the sequence of frames ending at end_frame with
// the frame's target. Frames before the clip start repeat the first frame.
struct SequenceWindow {
  const Matrix* frames = nullptr;
  std::size_t end_frame = 0;
  double target_unit = 0.0;
  int length = kWindowFrames;

  const double* frame(int i) const {
    const long start = static_cast<long>(end_frame) - (length - 1);
    long idx = start + i;
    if (idx < 0) idx = 0;
    return frames->row(static_cast<std::size_t>(idx));
  }
  std::size_t dims() const { return frames->cols(); }
};

// Windows at end frames 0, stride, 2*stride, ... With stride 1 there is one
// window per frame of the clip.
inline std::vector<SequenceWindow> make_windows(const Matrix& frames,
                                                const std::vector<double>& target_unit,
                                                int length = kWindowFrames, int stride = 1) {
  if (frames.rows() != target_unit.size())
    throw std::invalid_argument("make_windows: " + std::to_string(frames.rows()) +
                                " frames vs " + std::to_string(target_unit.size()) + " targets");
  if (length <= 0 || stride <= 0)
    throw std::invalid_argument("make_windows: length and stride must be positive");
  std::vector<SequenceWindow> out;
  out.reserve(frames.rows() / static_cast<std::size_t>(stride) + 1);
  for (std::size_t t = 0; t < frames.rows(); t += static_cast<std::size_t>(stride))
    out.push_back(SequenceWindow{&frames, t, target_unit[t], length});
  return out;
}

// Owns masked per-clip frame matrices plus per-frame unit-scale targets.
// Entries live in a deque so windows can hold stable pointers.
struct ClipDataset {
  struct Entry {
    std::string clip_id;
    Matrix frames;
    std::vector<double> target_unit;
  };
  std::deque<Entry> entries;

  void add(std::string clip_id, Matrix frames, std::vector<double> target_unit) {
    if (frames.rows() != target_unit.size())
      throw std::invalid_argument("ClipDataset: frame/target count mismatch for " + clip_id);
    if (!entries.empty() && frames.cols() != entries.front().frames.cols())
      throw std::invalid_argument("ClipDataset: clip " + clip_id + " has " +
                                  std::to_string(frames.cols()) + " feature dims, expected " +
                                  std::to_string(entries.front().frames.cols()));
    entries.push_back(Entry{std::move(clip_id), std::move(frames), std::move(target_unit)});
  }

  std::size_t total_frames() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.frames.rows();
    return n;
  }

  std::vector<SequenceWindow> windows(int stride = 1, int length = kWindowFrames) const {
    std::vector<SequenceWindow> out;
    for (const auto& e : entries) {
      auto w = make_windows(e.frames, e.target_unit, length, stride);
      out.insert(out.end(), w.begin(), w.end());
    }
    return out;
  }
};

}  // namespace ori
