#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/features.hpp"
#include "ori/matrix.hpp"
#include "ori/ratings.hpp"
#include "ori/rng.hpp"

namespace ori {

inline constexpr int kNumStates = 6;

enum class DriverState : int {
  vigilant = 0,
  talking = 1,
  gesturing = 2,
  infotainment = 3,
  drinking = 4,
  phone = 5,
};

inline constexpr std::array<const char*, kNumStates> kStateNames = {
    "vigilant", "talking", "gesturing", "infotainment", "drinking", "phone"};

// Mean behavior of one latent state; simplex entries are positive template
// probabilities perturbed in logit space, the rest are clamped Gaussian means.
struct EmissionTemplate {
  std::array<double, kGazeDims> gaze{};
  std::array<double, 8> joint_xy{};
  std::array<double, 4> left_activity{};
  std::array<double, 6> right_activity{};
  double wheel_distance = 0.0;
  std::array<double, 4> held_object{};
  std::array<double, kPoseDims> pose{};
  double gas_distance = 0.0;
  double brake_distance = 0.0;
};

// A rater applies a strictly increasing distortion to the true segment score,
// adds Gaussian noise, then rounds to the 5-point scale.
struct SimulatedRater {
  std::string rater_id;
  double response_gamma = 1.0;  // exponent on the unit scale
  double response_gain = 1.0;   // slope on the unit scale
  double offset = 0.0;          // additive shift on the 1..5 scale
  double noise_std = 0.0;

  double distort(double score) const {
    const double u = ori_to_unit(score);
    return 1.0 + 4.0 * response_gain * std::pow(u, response_gamma) + offset;
  }
};

struct GeneratorConfig {
  int frame_rate = kFrameRate;
  int clip_seconds = 30;
  int initial_state = static_cast<int>(DriverState::vigilant);
  std::array<double, kNumStates> readiness{};      // per-state score in [1, 5]
  Matrix transition{kNumStates, kNumStates};       // per-frame, rows sum to 1
  std::array<EmissionTemplate, kNumStates> emissions{};
  double gaze_logit_noise = 0.35;
  double activity_logit_noise = 0.35;
  double object_logit_noise = 0.30;
  double coord_noise = 0.02;
  double distance_noise = 0.03;
  std::vector<SimulatedRater> raters;

  int frames_per_clip() const { return frame_rate * clip_seconds; }
  int segments_per_clip() const { return clip_seconds / 2; }
};

inline void validate_config(const GeneratorConfig& c) {
  if (c.frame_rate < 1) throw std::invalid_argument("config: frame_rate must be positive");
  if (c.clip_seconds < 8 || c.clip_seconds % 2 != 0)
    throw std::invalid_argument("config: clip_seconds must be even and at least 8");
  if (c.initial_state < 0 || c.initial_state >= kNumStates)
    throw std::invalid_argument("config: initial_state out of range");
  for (double r : c.readiness)
    if (!(r >= 1.0 && r <= 5.0))
      throw std::invalid_argument("config: readiness levels must lie in [1, 5]");
  if (c.transition.rows() != kNumStates || c.transition.cols() != kNumStates)
    throw std::invalid_argument("config: transition matrix must be 6x6");
  for (int i = 0; i < kNumStates; ++i) {
    double sum = 0.0;
    for (int j = 0; j < kNumStates; ++j) {
      const double p = c.transition(i, j);
      if (!(p >= 0.0)) throw std::invalid_argument("config: negative transition probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("config: transition row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
  }
  auto check_positive = [](const auto& probs, const char* what) {
    for (double p : probs)
      if (!(p > 0.0)) throw std::invalid_argument(std::string("config: ") + what +
                                                  " template entries must be positive");
  };
  for (const auto& e : c.emissions) {
    check_positive(e.gaze, "gaze");
    check_positive(e.left_activity, "left activity");
    check_positive(e.right_activity, "right activity");
    check_positive(e.held_object, "held object");
  }
  for (const auto& r : c.raters) {
    if (r.rater_id.empty()) throw std::invalid_argument("config: rater needs an id");
    if (!(r.response_gamma > 0.0) || !(r.response_gain > 0.0))
      throw std::invalid_argument("config: rater '" + r.rater_id +
                                  "' distortion is not strictly increasing");
    if (r.noise_std < 0.0)
      throw std::invalid_argument("config: rater '" + r.rater_id + "' noise must be >= 0");
  }
}

namespace detail {

inline EmissionTemplate vigilant_template() {
  EmissionTemplate e;
  e.gaze = {0.70, 0.01, 0.06, 0.01, 0.06, 0.02, 0.06, 0.06, 0.02};
  e.joint_xy = {0.30, 0.60, 0.40, 0.45, 0.70, 0.60, 0.60, 0.45};
  e.left_activity = {0.05, 0.03, 0.07, 0.85};
  e.right_activity = {0.04, 0.02, 0.06, 0.85, 0.01, 0.02};
  e.wheel_distance = 0.05;
  e.held_object = {0.96, 0.01, 0.01, 0.02};
  e.pose = {0.50, 0.22, 0.50, 0.35, 0.62, 0.38, 0.68, 0.55, 0.60, 0.48,
            0.38, 0.38, 0.32, 0.55, 0.40, 0.48, 0.53, 0.18, 0.47, 0.18};
  e.gas_distance = 0.10;
  e.brake_distance = 0.30;
  return e;
}

inline EmissionTemplate talking_template() {
  EmissionTemplate e = vigilant_template();
  e.gaze = {0.55, 0.03, 0.05, 0.03, 0.04, 0.03, 0.08, 0.05, 0.14};
  e.joint_xy = {0.32, 0.58, 0.42, 0.47, 0.68, 0.58, 0.58, 0.47};
  e.left_activity = {0.08, 0.07, 0.10, 0.75};
  e.right_activity = {0.10, 0.15, 0.10, 0.60, 0.02, 0.03};
  e.wheel_distance = 0.12;
  e.held_object = {0.94, 0.01, 0.02, 0.03};
  e.pose[0] = 0.52;
  e.pose[1] = 0.23;
  e.gas_distance = 0.15;
  e.brake_distance = 0.40;
  return e;
}

inline EmissionTemplate gesturing_template() {
  EmissionTemplate e = vigilant_template();
  e.gaze = {0.50, 0.04, 0.04, 0.05, 0.03, 0.04, 0.06, 0.06, 0.18};
  e.joint_xy = {0.35, 0.40, 0.45, 0.30, 0.65, 0.40, 0.55, 0.30};
  e.left_activity = {0.10, 0.55, 0.20, 0.15};
  e.right_activity = {0.10, 0.60, 0.15, 0.10, 0.02, 0.03};
  e.wheel_distance = 0.45;
  e.held_object = {0.90, 0.02, 0.02, 0.06};
  e.pose[8] = 0.55;
  e.pose[9] = 0.35;
  e.gas_distance = 0.18;
  e.brake_distance = 0.45;
  return e;
}

inline EmissionTemplate infotainment_template() {
  EmissionTemplate e = vigilant_template();
  e.gaze = {0.25, 0.01, 0.02, 0.06, 0.05, 0.52, 0.03, 0.04, 0.02};
  e.joint_xy = {0.30, 0.60, 0.40, 0.45, 0.66, 0.62, 0.55, 0.72};
  e.left_activity = {0.15, 0.10, 0.15, 0.60};
  e.right_activity = {0.10, 0.15, 0.08, 0.12, 0.50, 0.05};
  e.wheel_distance = 0.55;
  e.held_object = {0.85, 0.05, 0.02, 0.08};
  e.pose[0] = 0.54;
  e.pose[1] = 0.26;
  e.gas_distance = 0.25;
  e.brake_distance = 0.50;
  return e;
}

inline EmissionTemplate drinking_template() {
  EmissionTemplate e = vigilant_template();
  e.gaze = {0.55, 0.02, 0.04, 0.04, 0.05, 0.05, 0.08, 0.10, 0.07};
  e.joint_xy = {0.30, 0.60, 0.40, 0.45, 0.68, 0.45, 0.55, 0.30};
  e.left_activity = {0.10, 0.08, 0.12, 0.70};
  e.right_activity = {0.08, 0.20, 0.07, 0.15, 0.05, 0.45};
  e.wheel_distance = 0.40;
  e.held_object = {0.15, 0.03, 0.72, 0.10};
  e.pose[4] = 0.56;
  e.pose[5] = 0.32;
  e.gas_distance = 0.20;
  e.brake_distance = 0.45;
  return e;
}

inline EmissionTemplate phone_template() {
  EmissionTemplate e = vigilant_template();
  e.gaze = {0.18, 0.02, 0.02, 0.50, 0.06, 0.08, 0.05, 0.05, 0.04};
  e.joint_xy = {0.35, 0.62, 0.45, 0.68, 0.65, 0.62, 0.55, 0.68};
  e.left_activity = {0.35, 0.30, 0.20, 0.15};
  e.right_activity = {0.25, 0.45, 0.08, 0.10, 0.07, 0.05};
  e.wheel_distance = 0.75;
  e.held_object = {0.08, 0.80, 0.02, 0.10};
  e.pose = {0.50, 0.28, 0.50, 0.38, 0.62, 0.40, 0.66, 0.58, 0.57, 0.62,
            0.38, 0.40, 0.34, 0.58, 0.43, 0.62, 0.53, 0.24, 0.47, 0.24};
  e.gas_distance = 0.30;
  e.brake_distance = 0.55;
  return e;
}

// Off-diagonal per-frame transition rates; the diagonal absorbs the rest so
// rows sum to 1 exactly. Self-transition masses put mean dwell times in the
// three-to-eight second range at 30 fps.
inline Matrix default_transition() {
  Matrix t(kNumStates, kNumStates, 0.0);
  auto row = [&t](int i, std::array<double, kNumStates> off) {
    double sum = 0.0;
    for (int j = 0; j < kNumStates; ++j)
      if (j != i) {
        t(i, j) = off[j];
        sum += off[j];
      }
    t(i, i) = 1.0 - sum;
  };
  row(0, {0.0, 0.0012, 0.0006, 0.0009, 0.0006, 0.0009});
  row(1, {0.0053, 0.0, 0.0015, 0.0005, 0.0005, 0.0005});
  row(2, {0.0041, 0.0060, 0.0, 0.0003, 0.0004, 0.0003});
  row(3, {0.0063, 0.0007, 0.0003, 0.0, 0.0005, 0.0005});
  row(4, {0.0081, 0.0010, 0.0005, 0.0010, 0.0, 0.0005});
  row(5, {0.0047, 0.0005, 0.0003, 0.0007, 0.0005, 0.0});
  return t;
}

inline int sample_categorical(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

template <std::size_t N>
inline std::array<double, N> noisy_simplex(const std::array<double, N>& tmpl, double noise,
                                           Rng& rng) {
  std::array<double, N> logits;
  double max_logit = -1e300;
  for (std::size_t i = 0; i < N; ++i) {
    logits[i] = std::log(tmpl[i]) + noise * rng.next_gaussian();
    max_logit = std::max(max_logit, logits[i]);
  }
  double sum = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - max_logit);
    sum += l;
  }
  for (auto& l : logits) l /= sum;
  return logits;
}

inline double noisy_unit(double mean, double noise, Rng& rng) {
  return std::clamp(mean + noise * rng.next_gaussian(), 0.0, 1.0);
}

}  // namespace detail

inline std::vector<SimulatedRater> default_raters(int k) {
  if (k < 1) throw std::invalid_argument("default_raters: need at least one rater");
  const std::vector<SimulatedRater> pool = {
      {"rater_a", 1.00, 1.00, 0.00, 0.25},
      {"rater_b", 0.85, 1.00, 0.30, 0.30},
      {"rater_c", 1.25, 1.00, -0.30, 0.30},
      {"rater_d", 1.00, 0.80, 0.40, 0.35},
      {"rater_e", 1.10, 1.05, -0.15, 0.40},
  };
  std::vector<SimulatedRater> out;
  for (int i = 0; i < k; ++i) {
    SimulatedRater r = pool[static_cast<std::size_t>(i) % pool.size()];
    if (i >= static_cast<int>(pool.size())) {
      r.rater_id = "rater_" + std::to_string(i);
      r.offset += 0.05 * static_cast<double>(i / static_cast<int>(pool.size()));
    }
    out.push_back(r);
  }
  return out;
}

inline GeneratorConfig default_config(int k_raters = 5) {
  GeneratorConfig c;
  c.readiness = {5.0, 4.0, 3.2, 2.2, 2.8, 1.3};
  c.transition = detail::default_transition();
  c.emissions = {detail::vigilant_template(),     detail::talking_template(),
                 detail::gesturing_template(),    detail::infotainment_template(),
                 detail::drinking_template(),     detail::phone_template()};
  c.raters = default_raters(k_raters);
  validate_config(c);
  return c;
}

struct SyntheticClip {
  std::string clip_id;
  std::vector<int> states;            // latent state per frame
  std::vector<FrameFeatures> frames;
  OriSeries truth;
};

// Draws the latent state chain, emits frame features, and derives the true
// score curve by pushing per-frame readiness through the same segment-mean
// plus interpolation operator used for rated clips.
inline SyntheticClip generate_clip(const GeneratorConfig& cfg, const std::string& clip_id,
                                   Rng rng) {
  validate_config(cfg);
  const int frames = cfg.frames_per_clip();
  SyntheticClip clip;
  clip.clip_id = clip_id;
  clip.states.resize(static_cast<std::size_t>(frames));
  clip.frames.resize(static_cast<std::size_t>(frames));

  Rng chain = rng.substream("states");
  int state = cfg.initial_state;
  for (int t = 0; t < frames; ++t) {
    if (t > 0) {
      const double* row = cfg.transition.row(static_cast<std::size_t>(state));
      state = detail::sample_categorical(std::span<const double>(row, kNumStates),
                                         chain.next_unit());
    }
    clip.states[static_cast<std::size_t>(t)] = state;
  }

  Rng emit = rng.substream("emissions");
  for (int t = 0; t < frames; ++t) {
    const auto& e = cfg.emissions[static_cast<std::size_t>(
        clip.states[static_cast<std::size_t>(t)])];
    FrameFeatures& f = clip.frames[static_cast<std::size_t>(t)];
    f.gaze.zone_probs = detail::noisy_simplex(e.gaze, cfg.gaze_logit_noise, emit);
    for (std::size_t i = 0; i < 8; ++i)
      f.hand_cam.joint_xy[i] = detail::noisy_unit(e.joint_xy[i], cfg.coord_noise, emit);
    f.hand_cam.left_activity =
        detail::noisy_simplex(e.left_activity, cfg.activity_logit_noise, emit);
    f.hand_cam.right_activity =
        detail::noisy_simplex(e.right_activity, cfg.activity_logit_noise, emit);
    f.hand_depth.wheel_distance =
        detail::noisy_unit(e.wheel_distance, cfg.distance_noise, emit);
    f.hand_depth.held_object =
        detail::noisy_simplex(e.held_object, cfg.object_logit_noise, emit);
    for (std::size_t i = 0; i < kPoseDims; ++i)
      f.pose.keypoint_xy[i] = detail::noisy_unit(e.pose[i], cfg.coord_noise, emit);
    f.foot.gas_distance = detail::noisy_unit(e.gas_distance, cfg.distance_noise, emit);
    f.foot.brake_distance = detail::noisy_unit(e.brake_distance, cfg.distance_noise, emit);
  }

  const int seg_frames = 2 * cfg.frame_rate;
  std::vector<double> seg_means(static_cast<std::size_t>(cfg.segments_per_clip()));
  for (std::size_t s = 0; s < seg_means.size(); ++s) {
    double sum = 0.0;
    for (int t = 0; t < seg_frames; ++t)
      sum += cfg.readiness[static_cast<std::size_t>(
          clip.states[s * static_cast<std::size_t>(seg_frames) + static_cast<std::size_t>(t)])];
    seg_means[s] = sum / static_cast<double>(seg_frames);
  }
  clip.truth = interpolate_ori(clip_id, seg_means, cfg.frame_rate);
  return clip;
}

// True per-segment score of a generated clip: the mean of the per-frame
// curve over each two-second segment.
inline std::vector<double> segment_means(const SyntheticClip& clip, int frame_rate) {
  const int seg_frames = 2 * frame_rate;
  const std::size_t n_seg = clip.truth.values.size() / static_cast<std::size_t>(seg_frames);
  std::vector<double> out(n_seg, 0.0);
  for (std::size_t s = 0; s < n_seg; ++s) {
    double sum = 0.0;
    for (int t = 0; t < seg_frames; ++t)
      sum += clip.truth.values[s * static_cast<std::size_t>(seg_frames) +
                               static_cast<std::size_t>(t)];
    out[s] = sum / static_cast<double>(seg_frames);
  }
  return out;
}

// Produces the panel's discrete ratings for the given clips. assignment[i]
// lists indices into raters for clip i. Noise streams are keyed by clip and
// rater id, so results do not depend on iteration order.
inline std::vector<SegmentRating> simulate_rater_panel(
    const std::vector<SyntheticClip>& clips, const std::vector<SimulatedRater>& raters,
    const std::vector<std::vector<int>>& assignment, int frame_rate, Rng rng) {
  if (assignment.size() != clips.size())
    throw std::invalid_argument("simulate_rater_panel: one assignment list per clip required");
  std::vector<SegmentRating> out;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    const auto means = segment_means(clips[ci], frame_rate);
    for (int ri : assignment[ci]) {
      if (ri < 0 || ri >= static_cast<int>(raters.size()))
        throw std::invalid_argument("simulate_rater_panel: rater index out of range");
      const SimulatedRater& rater = raters[static_cast<std::size_t>(ri)];
      Rng stream = rng.substream(clips[ci].clip_id).substream(rater.rater_id);
      for (std::size_t s = 0; s < means.size(); ++s) {
        double v = rater.distort(means[s]) + rater.noise_std * stream.next_gaussian();
        v = std::clamp(v, 1.0, 5.0);
        SegmentRating r;
        r.clip_id = clips[ci].clip_id;
        r.segment_index = static_cast<int>(s);
        r.rater_id = rater.rater_id;
        r.value = static_cast<int>(std::lround(v));
        out.push_back(r);
      }
    }
  }
  return out;
}

struct ClipMeta {
  std::string clip_id;
  std::string drive_id;
  std::string split;  // train, val or test
};

struct CorpusSpec {
  int n_train = 172, n_val = 32, n_test = 56;
  int d_train = 22, d_val = 5, d_test = 6;
  int n_common = 20;  // leading train clips rated by the full panel
  std::uint64_t seed = 0;
  GeneratorConfig gen;

  int total_clips() const { return n_train + n_val + n_test; }
};

// Scales the default 260-clip corpus layout down (or up) proportionally.
inline CorpusSpec make_corpus_spec(int total_clips, int k_raters, std::uint64_t seed) {
  if (total_clips < 3) throw std::invalid_argument("corpus: need at least 3 clips");
  CorpusSpec spec;
  spec.seed = seed;
  spec.gen = default_config(k_raters);
  if (total_clips != 260) {
    const double f = static_cast<double>(total_clips) / 260.0;
    spec.n_train = std::max(1, static_cast<int>(std::lround(172.0 * f)));
    spec.n_val = std::max(1, static_cast<int>(std::lround(32.0 * f)));
    spec.n_test = total_clips - spec.n_train - spec.n_val;
    while (spec.n_test < 1) {
      if (spec.n_train > 1)
        --spec.n_train;
      else
        --spec.n_val;
      spec.n_test = total_clips - spec.n_train - spec.n_val;
    }
    spec.d_train = std::clamp(static_cast<int>(std::lround(22.0 * f)), 1, spec.n_train);
    spec.d_val = std::clamp(static_cast<int>(std::lround(5.0 * f)), 1, spec.n_val);
    spec.d_test = std::clamp(static_cast<int>(std::lround(6.0 * f)), 1, spec.n_test);
    spec.n_common = std::min(20, spec.n_train);
  }
  return spec;
}

struct Corpus {
  CorpusSpec spec;
  std::vector<SyntheticClip> clips;
  std::vector<ClipMeta> meta;           // parallel to clips
  std::vector<SegmentRating> ratings;   // full panel on the common set, pairs elsewhere
  std::vector<std::string> common_clips;
};

namespace detail {

inline std::string padded_id(const char* prefix, int i, int width) {
  std::string digits = std::to_string(i);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return std::string(prefix) + digits;
}

}  // namespace detail

inline Corpus generate_corpus(const CorpusSpec& spec) {
  validate_config(spec.gen);
  if (spec.n_train < 1 || spec.n_val < 1 || spec.n_test < 1)
    throw std::invalid_argument("corpus: every split needs at least one clip");
  if (spec.d_train > spec.n_train || spec.d_val > spec.n_val || spec.d_test > spec.n_test)
    throw std::invalid_argument("corpus: more drives than clips in a split");
  if (spec.n_common > spec.n_train)
    throw std::invalid_argument("corpus: common set larger than the training split");
  if (spec.gen.raters.size() < 2)
    throw std::invalid_argument("corpus: need at least two raters");

  Corpus corpus;
  corpus.spec = spec;
  Rng master(spec.seed);

  const int total = spec.total_clips();
  corpus.clips.reserve(static_cast<std::size_t>(total));
  corpus.meta.reserve(static_cast<std::size_t>(total));
  std::vector<std::vector<int>> assignment;
  const int k = static_cast<int>(spec.gen.raters.size());
  for (int i = 0; i < total; ++i) {
    const std::string clip_id = detail::padded_id("clip_", i, 4);
    corpus.clips.push_back(generate_clip(spec.gen, clip_id, master.substream("clip", i)));
    ClipMeta m;
    m.clip_id = clip_id;
    if (i < spec.n_train) {
      m.split = "train";
      m.drive_id = detail::padded_id("drive_", i % spec.d_train, 3);
    } else if (i < spec.n_train + spec.n_val) {
      m.split = "val";
      m.drive_id = detail::padded_id("drive_", spec.d_train + (i - spec.n_train) % spec.d_val, 3);
    } else {
      m.split = "test";
      m.drive_id = detail::padded_id(
          "drive_", spec.d_train + spec.d_val + (i - spec.n_train - spec.n_val) % spec.d_test, 3);
    }
    corpus.meta.push_back(m);

    if (i < spec.n_common) {
      std::vector<int> all(static_cast<std::size_t>(k));
      for (int r = 0; r < k; ++r) all[static_cast<std::size_t>(r)] = r;
      assignment.push_back(all);
      corpus.common_clips.push_back(clip_id);
    } else {
      assignment.push_back({i % k, (i + 1) % k});
    }
  }
  corpus.ratings = simulate_rater_panel(corpus.clips, spec.gen.raters, assignment,
                                        spec.gen.frame_rate, master.substream("panel"));
  return corpus;
}

}  // namespace ori
