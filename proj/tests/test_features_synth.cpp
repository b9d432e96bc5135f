#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "ori/eval.hpp"
#include "ori/features.hpp"
#include "ori/synth.hpp"

namespace {

using ori::FrameFeatures;
using ori::StreamMask;

FrameFeatures clean_frame() {
  FrameFeatures f;
  f.gaze.zone_probs = {1, 0, 0, 0, 0, 0, 0, 0, 0};
  f.hand_cam.joint_xy = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  f.hand_cam.left_activity = {0.25, 0.25, 0.25, 0.25};
  f.hand_cam.right_activity = {0.5, 0.1, 0.1, 0.1, 0.1, 0.1};
  f.hand_depth.wheel_distance = 0.4;
  f.hand_depth.held_object = {0.7, 0.1, 0.1, 0.1};
  for (std::size_t i = 0; i < ori::kPoseDims; ++i)
    f.pose.keypoint_xy[i] = 0.01 * static_cast<double>(i + 1);
  f.foot.gas_distance = 0.2;
  f.foot.brake_distance = 0.9;
  return f;
}

TEST(Features, ValidateAcceptsCleanFrame) {
  EXPECT_TRUE(ori::validate(clean_frame()).empty());
}

TEST(Features, ValidateReportsViolations) {
  auto f = clean_frame();
  f.gaze.zone_probs[0] = 0.5;  // sum now 0.5
  f.hand_depth.wheel_distance = 1.5;
  f.pose.keypoint_xy[3] = -0.2;
  const auto v = ori::validate(f);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NE(v[0].find("gaze"), std::string::npos);
  EXPECT_NE(v[1].find("wheel distance"), std::string::npos);
}

TEST(Features, FlattenCanonicalIndices) {
  const auto f = clean_frame();
  StreamMask all;
  ASSERT_EQ(all.dims(), ori::kFrameDims);
  std::vector<double> out(ori::kFrameDims);
  ori::flatten(f, all, out.data());
  EXPECT_DOUBLE_EQ(out[0], 1.0);                            // gaze forward
  EXPECT_DOUBLE_EQ(out[9], 0.1);                            // first joint coord
  EXPECT_DOUBLE_EQ(out[17], 0.25);                          // left on_lap
  EXPECT_DOUBLE_EQ(out[24], 0.1);                           // right on_wheel
  EXPECT_DOUBLE_EQ(out[27], 0.4);                           // wheel distance
  EXPECT_DOUBLE_EQ(out[29], 0.1);                           // phone/tablet
  EXPECT_DOUBLE_EQ(out[32], 0.01);                          // first pose coord
  EXPECT_DOUBLE_EQ(out[52], 0.2);                           // gas distance
  EXPECT_DOUBLE_EQ(out[53], 0.9);                           // brake distance

  const auto names = ori::frame_dim_names();
  ASSERT_EQ(names.size(), static_cast<std::size_t>(ori::kFrameDims));
  EXPECT_EQ(names[0], "gaze:forward");
  EXPECT_EQ(names[24], "hand_cam:right_on_wheel");
  EXPECT_EQ(names[27], "hand_depth:wheel_distance");
  EXPECT_EQ(names[29], "hand_depth:phone_tablet");
  EXPECT_EQ(names[52], "foot:gas_distance");
}

TEST(Features, PartialMasksSelectBlocks) {
  const auto f = clean_frame();
  StreamMask pose_only{false, false, false, true, false};
  ASSERT_EQ(pose_only.dims(), ori::kPoseDims);
  std::vector<double> out(ori::kPoseDims);
  ori::flatten(f, pose_only, out.data());
  EXPECT_DOUBLE_EQ(out[0], 0.01);
  EXPECT_DOUBLE_EQ(out[19], 0.20);

  StreamMask depth_only{false, false, true, false, false};
  ASSERT_EQ(depth_only.dims(), ori::kHandDepthDims);
  std::vector<double> d(ori::kHandDepthDims);
  ori::flatten(f, depth_only, d.data());
  EXPECT_DOUBLE_EQ(d[0], 0.4);
  EXPECT_DOUBLE_EQ(d[2], 0.1);
}

TEST(Features, StreamMaskParsing) {
  const auto m = ori::parse_stream_mask("gaze,hand");
  EXPECT_TRUE(m.gaze);
  EXPECT_TRUE(m.hand_cam);
  EXPECT_TRUE(m.hand_depth);
  EXPECT_FALSE(m.pose);
  EXPECT_FALSE(m.foot);
  EXPECT_EQ(ori::stream_mask_name(m), "gaze,hand");

  const auto cam = ori::parse_stream_mask("hand_cam,foot");
  EXPECT_TRUE(cam.hand_cam);
  EXPECT_FALSE(cam.hand_depth);
  EXPECT_EQ(ori::stream_mask_name(cam), "hand_cam,foot");

  EXPECT_EQ(ori::stream_mask_name(ori::parse_stream_mask("gaze,hand,pose,foot")),
            "gaze,hand,pose,foot");
  EXPECT_THROW(ori::parse_stream_mask("gaze,sonar"), std::invalid_argument);
  EXPECT_THROW(ori::parse_stream_mask(""), std::invalid_argument);
}

TEST(Windows, CountsAndLeftEdgeClamp) {
  const std::size_t frames = 150;
  ori::Matrix x(frames, 2);
  std::vector<double> target(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    x(t, 0) = static_cast<double>(t);
    x(t, 1) = 1.0;
    target[t] = static_cast<double>(t) / static_cast<double>(frames);
  }
  const auto w1 = ori::make_windows(x, target, 60, 1);
  EXPECT_EQ(w1.size(), frames);
  const auto w7 = ori::make_windows(x, target, 60, 7);
  EXPECT_EQ(w7.size(), (frames + 6) / 7);

  // Window ending at frame 0 sees frame 0 repeated via the clamp.
  const auto& w0 = w1[0];
  EXPECT_EQ(w0.end_frame, 0u);
  for (int i = 0; i < 60; ++i) EXPECT_DOUBLE_EQ(w0.frame(i)[0], 0.0);
  EXPECT_DOUBLE_EQ(w0.target_unit, 0.0);

  // A late window sees the true trailing frames.
  const auto& wl = w1[140];
  EXPECT_DOUBLE_EQ(wl.frame(59)[0], 140.0);
  EXPECT_DOUBLE_EQ(wl.frame(0)[0], 81.0);
  EXPECT_DOUBLE_EQ(wl.target_unit, target[140]);
}

TEST(Windows, DatasetAccumulatesClips) {
  ori::ClipDataset ds;
  ori::Matrix a(100, 3), b(70, 3);
  ds.add("a", std::move(a), std::vector<double>(100, 0.5));
  ds.add("b", std::move(b), std::vector<double>(70, 0.25));
  EXPECT_EQ(ds.total_frames(), 170u);
  const auto w = ds.windows(10);
  EXPECT_EQ(w.size(), 10u + 7u);
  EXPECT_THROW(ds.add("c", ori::Matrix(5, 4), std::vector<double>(5, 0.0)),
               std::invalid_argument);
}

TEST(Generator, DeterministicAndValid) {
  const auto cfg = ori::default_config(5);
  ori::Rng rng(55);
  const auto c1 = ori::generate_clip(cfg, "clip_x", rng.substream("clip", 3));
  const auto c2 = ori::generate_clip(cfg, "clip_x", rng.substream("clip", 3));
  ASSERT_EQ(c1.frames.size(), 900u);
  ASSERT_EQ(c1.truth.values.size(), 900u);
  EXPECT_EQ(c1.states, c2.states);
  for (std::size_t t = 0; t < c1.frames.size(); ++t) {
    StreamMask all;
    std::vector<double> f1(ori::kFrameDims), f2(ori::kFrameDims);
    ori::flatten(c1.frames[t], all, f1.data());
    ori::flatten(c2.frames[t], all, f2.data());
    ASSERT_EQ(f1, f2) << "frame " << t;
  }
  for (std::size_t t = 0; t < c1.frames.size(); t += 97)
    EXPECT_TRUE(ori::validate(c1.frames[t]).empty()) << "frame " << t;

  const auto c3 = ori::generate_clip(cfg, "clip_x", rng.substream("clip", 4));
  EXPECT_NE(c1.states, c3.states);
}

TEST(Generator, AbsorbingChainGivesConstantTruth) {
  auto cfg = ori::default_config(2);
  cfg.transition = ori::identity(ori::kNumStates);
  cfg.initial_state = static_cast<int>(ori::DriverState::phone);
  const auto clip = ori::generate_clip(cfg, "clip_c", ori::Rng(9));
  const double expect = cfg.readiness[static_cast<std::size_t>(ori::DriverState::phone)];
  for (int s : clip.states) EXPECT_EQ(s, cfg.initial_state);
  for (double v : clip.truth.values) EXPECT_NEAR(v, expect, 1e-12);
}

TEST(Generator, SegmentMeansMatchTruthCurve) {
  const auto cfg = ori::default_config(3);
  const auto clip = ori::generate_clip(cfg, "clip_m", ori::Rng(17));
  const auto means = ori::segment_means(clip, cfg.frame_rate);
  ASSERT_EQ(means.size(), 15u);
  for (std::size_t s = 0; s < means.size(); ++s) {
    double sum = 0.0;
    for (std::size_t t = 0; t < 60; ++t) sum += clip.truth.values[s * 60 + t];
    EXPECT_NEAR(means[s], sum / 60.0, 1e-12);
  }
}

TEST(Generator, ConfigValidation) {
  auto cfg = ori::default_config(3);
  cfg.transition(0, 0) += 0.01;
  EXPECT_THROW(ori::validate_config(cfg), std::invalid_argument);

  cfg = ori::default_config(3);
  cfg.readiness[2] = 5.5;
  EXPECT_THROW(ori::validate_config(cfg), std::invalid_argument);

  cfg = ori::default_config(3);
  cfg.clip_seconds = 7;
  EXPECT_THROW(ori::validate_config(cfg), std::invalid_argument);

  cfg = ori::default_config(3);
  cfg.raters[0].response_gain = -1.0;  // distortion no longer increasing
  EXPECT_THROW(ori::validate_config(cfg), std::invalid_argument);
}

TEST(Raters, ExactRaterRecoversSegmentMeans) {
  auto cfg = ori::default_config(2);
  ori::SimulatedRater exact{"exact", 1.0, 1.0, 0.0, 0.0};
  const auto clip = ori::generate_clip(cfg, "clip_r", ori::Rng(23));
  const auto means = ori::segment_means(clip, cfg.frame_rate);
  const auto ratings = ori::simulate_rater_panel({clip}, {exact}, {{0}}, cfg.frame_rate,
                                                 ori::Rng(99));
  ASSERT_EQ(ratings.size(), means.size());
  for (std::size_t s = 0; s < means.size(); ++s) {
    EXPECT_EQ(ratings[s].value, static_cast<int>(std::lround(means[s])));
    EXPECT_EQ(ratings[s].segment_index, static_cast<int>(s));
  }
}

TEST(Raters, DistortionsAreOrderedAndIncreasing) {
  const auto raters = ori::default_raters(5);
  ASSERT_EQ(raters.size(), 5u);
  std::set<std::string> ids;
  for (const auto& r : raters) ids.insert(r.rater_id);
  EXPECT_EQ(ids.size(), 5u);
  for (const auto& r : raters) {
    double prev = r.distort(1.0);
    for (double v = 1.1; v <= 5.0; v += 0.1) {
      const double cur = r.distort(v);
      EXPECT_GT(cur, prev) << r.rater_id;
      prev = cur;
    }
  }
}

TEST(Corpus, LayoutAndAssignment) {
  const auto spec = ori::make_corpus_spec(26, 5, 11);
  const auto corpus = ori::generate_corpus(spec);
  ASSERT_EQ(corpus.clips.size(), 26u);
  ASSERT_EQ(corpus.meta.size(), 26u);
  EXPECT_EQ(spec.n_train + spec.n_val + spec.n_test, 26);

  // Drive ids never straddle splits.
  ori::validate_drive_disjoint(corpus.meta);

  std::map<std::string, std::set<std::string>> raters_by_clip;
  for (const auto& r : corpus.ratings) raters_by_clip[r.clip_id].insert(r.rater_id);
  const std::set<std::string> common(corpus.common_clips.begin(), corpus.common_clips.end());
  EXPECT_EQ(common.size(), static_cast<std::size_t>(spec.n_common));
  for (const auto& [clip, raters] : raters_by_clip) {
    if (common.count(clip))
      EXPECT_EQ(raters.size(), 5u) << clip;
    else
      EXPECT_EQ(raters.size(), 2u) << clip;
  }

  // Clip ids are unique and zero-padded.
  std::set<std::string> ids;
  for (const auto& m : corpus.meta) ids.insert(m.clip_id);
  EXPECT_EQ(ids.size(), 26u);
  EXPECT_EQ(corpus.meta[0].clip_id, "clip_0000");

  const auto again = ori::generate_corpus(spec);
  EXPECT_EQ(corpus.ratings.size(), again.ratings.size());
  for (std::size_t i = 0; i < corpus.ratings.size(); ++i)
    EXPECT_EQ(corpus.ratings[i].value, again.ratings[i].value);
}

TEST(Corpus, SplitCorpusGroupsCorrectly) {
  const auto corpus = ori::generate_corpus(ori::make_corpus_spec(12, 3, 5));
  const auto splits = ori::split_corpus(corpus);
  EXPECT_EQ(splits.train.size(), static_cast<std::size_t>(corpus.spec.n_train));
  EXPECT_EQ(splits.val.size(), static_cast<std::size_t>(corpus.spec.n_val));
  EXPECT_EQ(splits.test.size(), static_cast<std::size_t>(corpus.spec.n_test));
  ASSERT_FALSE(splits.train.empty());
  EXPECT_EQ(splits.train[0].target_unit->size(), 900u);
}

TEST(Corpus, DisjointnessViolationDetected) {
  std::vector<ori::ClipMeta> meta{{"a", "drive_0", "train"}, {"b", "drive_0", "test"}};
  EXPECT_THROW(ori::validate_drive_disjoint(meta), std::invalid_argument);
  std::vector<ori::ClipMeta> bad_split{{"a", "drive_0", "training"}};
  EXPECT_THROW(ori::validate_drive_disjoint(bad_split), std::invalid_argument);
}

}  // namespace
