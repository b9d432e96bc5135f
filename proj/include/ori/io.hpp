#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ori/agreement.hpp"
#include "ori/eval.hpp"
#include "ori/features.hpp"
#include "ori/ratings.hpp"
#include "ori/synth.hpp"
#include "ori/train.hpp"

namespace ori {

using json = nlohmann::json;

// Shortest round-trip decimal form; locale-independent.
inline std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::runtime_error csv_error(const std::filesystem::path& path, std::size_t line,
                                    const std::string& what) {
  return std::runtime_error(path.string() + " line " + std::to_string(line) + ": " + what);
}

inline double parse_double_field(const std::string& s, const std::filesystem::path& path,
                                 std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw csv_error(path, line, "expected a number, got '" + s + "'");
  return v;
}

inline long parse_int_field(const std::string& s, const std::filesystem::path& path,
                            std::size_t line) {
  long v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw csv_error(path, line, "expected an integer, got '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline void check_id(const std::string& id, const char* what) {
  if (id.empty()) throw std::invalid_argument(std::string(what) + " must not be empty");
  if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos)
    throw std::invalid_argument(std::string(what) + " '" + id + "' contains a delimiter");
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void expect_header(const std::vector<std::string>& lines, const char* header,
                          const std::filesystem::path& path) {
  if (lines.empty()) throw std::runtime_error(path.string() + ": empty file");
  if (lines[0] != header)
    throw csv_error(path, 1, "expected header '" + std::string(header) + "', got '" +
                                 lines[0] + "'");
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace detail

// --- ratings ---------------------------------------------------------------

inline constexpr const char* kRatingsHeader = "clip_id,segment_index,rater_id,value";

inline void write_ratings_csv(const std::filesystem::path& path,
                              std::span<const SegmentRating> ratings) {
  auto f = detail::open_out(path);
  f << kRatingsHeader << '\n';
  for (const auto& r : ratings) {
    detail::check_id(r.clip_id, "clip id");
    detail::check_id(r.rater_id, "rater id");
    f << r.clip_id << ',' << r.segment_index << ',' << r.rater_id << ',' << r.value << '\n';
  }
}

inline void write_normalized_csv(const std::filesystem::path& path,
                                 std::span<const NormalizedRating> ratings) {
  auto f = detail::open_out(path);
  f << kRatingsHeader << '\n';
  for (const auto& r : ratings) {
    detail::check_id(r.clip_id, "clip id");
    detail::check_id(r.rater_id, "rater id");
    f << r.clip_id << ',' << r.segment_index << ',' << r.rater_id << ','
      << fmt_double(r.value) << '\n';
  }
}

// Real-valued reader; accepts both raw integer and normalized files.
inline std::vector<NormalizedRating> read_real_ratings_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  detail::expect_header(lines, kRatingsHeader, path);
  std::vector<NormalizedRating> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != 4)
      throw detail::csv_error(path, i + 1,
                              "expected 4 fields, got " + std::to_string(f.size()));
    NormalizedRating r;
    r.clip_id = f[0];
    r.segment_index = static_cast<int>(detail::parse_int_field(f[1], path, i + 1));
    r.rater_id = f[2];
    r.value = detail::parse_double_field(f[3], path, i + 1);
    if (r.segment_index < 0) throw detail::csv_error(path, i + 1, "negative segment index");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<SegmentRating> read_ratings_csv(const std::filesystem::path& path) {
  const auto reals = read_real_ratings_csv(path);
  std::vector<SegmentRating> out;
  out.reserve(reals.size());
  for (std::size_t i = 0; i < reals.size(); ++i) {
    const auto& n = reals[i];
    const double rounded = std::nearbyint(n.value);
    if (n.value != rounded || n.value < 1.0 || n.value > 5.0)
      throw std::runtime_error(path.string() + ": rating for " + n.clip_id + ":" +
                               std::to_string(n.segment_index) + " by " + n.rater_id +
                               " is " + fmt_double(n.value) + ", expected an integer 1..5");
    SegmentRating r;
    r.clip_id = n.clip_id;
    r.segment_index = n.segment_index;
    r.rater_id = n.rater_id;
    r.value = static_cast<int>(rounded);
    out.push_back(std::move(r));
  }
  return out;
}

// --- ORI series ------------------------------------------------------------

inline constexpr const char* kOriHeader = "clip_id,frame,ori,ori_unit";

inline void write_ori_csv(const std::filesystem::path& path,
                          std::span<const OriSeries> series) {
  auto f = detail::open_out(path);
  f << kOriHeader << '\n';
  for (const auto& s : series) {
    detail::check_id(s.clip_id, "clip id");
    for (std::size_t t = 0; t < s.values.size(); ++t)
      f << s.clip_id << ',' << t << ',' << fmt_double(s.values[t]) << ','
        << fmt_double(s.unit_values[t]) << '\n';
  }
}

inline std::vector<OriSeries> read_ori_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  detail::expect_header(lines, kOriHeader, path);
  std::vector<OriSeries> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != 4)
      throw detail::csv_error(path, i + 1,
                              "expected 4 fields, got " + std::to_string(f.size()));
    const long frame = detail::parse_int_field(f[1], path, i + 1);
    if (out.empty() || out.back().clip_id != f[0]) {
      if (frame != 0) throw detail::csv_error(path, i + 1, "clip must start at frame 0");
      OriSeries s;
      s.clip_id = f[0];
      out.push_back(std::move(s));
    } else if (frame != static_cast<long>(out.back().values.size())) {
      throw detail::csv_error(path, i + 1, "non-contiguous frame index");
    }
    out.back().values.push_back(detail::parse_double_field(f[2], path, i + 1));
    out.back().unit_values.push_back(detail::parse_double_field(f[3], path, i + 1));
  }
  return out;
}

// --- lookup tables ----------------------------------------------------------

inline void write_lookup_json(const std::filesystem::path& path, const LookupTables& tables) {
  json j;
  j["combined"] = {{"owner", tables.combined.owner},
                   {"values", tables.combined.values}};
  json raters = json::array();
  for (const auto& [id, t] : tables.by_rater)
    raters.push_back({{"owner", t.owner}, {"values", t.values}});
  j["raters"] = std::move(raters);
  auto f = detail::open_out(path);
  f << j.dump(2) << '\n';
}

inline LookupTables read_lookup_json(const std::filesystem::path& path) {
  const json j = detail::read_json_file(path);
  LookupTables out;
  try {
    out.combined.owner = j.at("combined").at("owner").get<std::string>();
    out.combined.values = j.at("combined").at("values").get<std::vector<double>>();
    for (const auto& r : j.at("raters")) {
      LookupTable t;
      t.owner = r.at("owner").get<std::string>();
      t.values = r.at("values").get<std::vector<double>>();
      out.by_rater[t.owner] = std::move(t);
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return out;
}

// --- frame features ---------------------------------------------------------

inline void write_features_jsonl(const std::filesystem::path& path,
                                 std::span<const SyntheticClip> clips) {
  auto f = detail::open_out(path);
  for (const auto& clip : clips) {
    detail::check_id(clip.clip_id, "clip id");
    for (std::size_t t = 0; t < clip.frames.size(); ++t) {
      const FrameFeatures& ff = clip.frames[t];
      json j;
      j["clip_id"] = clip.clip_id;
      j["frame"] = t;
      j["gaze"] = ff.gaze.zone_probs;
      std::vector<double> hand_cam;
      hand_cam.insert(hand_cam.end(), ff.hand_cam.joint_xy.begin(),
                      ff.hand_cam.joint_xy.end());
      hand_cam.insert(hand_cam.end(), ff.hand_cam.left_activity.begin(),
                      ff.hand_cam.left_activity.end());
      hand_cam.insert(hand_cam.end(), ff.hand_cam.right_activity.begin(),
                      ff.hand_cam.right_activity.end());
      j["hand_cam"] = std::move(hand_cam);
      std::vector<double> hand_depth;
      hand_depth.push_back(ff.hand_depth.wheel_distance);
      hand_depth.insert(hand_depth.end(), ff.hand_depth.held_object.begin(),
                        ff.hand_depth.held_object.end());
      j["hand_depth"] = std::move(hand_depth);
      j["pose"] = ff.pose.keypoint_xy;
      j["foot"] = std::array<double, 2>{ff.foot.gas_distance, ff.foot.brake_distance};
      f << j.dump() << '\n';
    }
  }
}

inline std::vector<std::pair<std::string, std::vector<FrameFeatures>>> read_features_jsonl(
    const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  std::vector<std::pair<std::string, std::vector<FrameFeatures>>> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(i + 1) + ": " +
                               e.what());
    }
    try {
      const std::string clip_id = j.at("clip_id").get<std::string>();
      const std::size_t frame = j.at("frame").get<std::size_t>();
      FrameFeatures ff;
      ff.gaze.zone_probs = j.at("gaze").get<std::array<double, kGazeDims>>();
      const auto hand_cam = j.at("hand_cam").get<std::vector<double>>();
      if (hand_cam.size() != kHandCamDims)
        throw std::runtime_error("hand_cam must have " + std::to_string(kHandCamDims) +
                                 " values");
      std::copy(hand_cam.begin(), hand_cam.begin() + 8, ff.hand_cam.joint_xy.begin());
      std::copy(hand_cam.begin() + 8, hand_cam.begin() + 12,
                ff.hand_cam.left_activity.begin());
      std::copy(hand_cam.begin() + 12, hand_cam.end(), ff.hand_cam.right_activity.begin());
      const auto hand_depth = j.at("hand_depth").get<std::vector<double>>();
      if (hand_depth.size() != kHandDepthDims)
        throw std::runtime_error("hand_depth must have " + std::to_string(kHandDepthDims) +
                                 " values");
      ff.hand_depth.wheel_distance = hand_depth[0];
      std::copy(hand_depth.begin() + 1, hand_depth.end(), ff.hand_depth.held_object.begin());
      ff.pose.keypoint_xy = j.at("pose").get<std::array<double, kPoseDims>>();
      const auto foot = j.at("foot").get<std::array<double, 2>>();
      ff.foot.gas_distance = foot[0];
      ff.foot.brake_distance = foot[1];

      if (out.empty() || out.back().first != clip_id) {
        if (frame != 0)
          throw std::runtime_error("clip " + clip_id + " must start at frame 0");
        out.emplace_back(clip_id, std::vector<FrameFeatures>{});
      } else if (frame != out.back().second.size()) {
        throw std::runtime_error("clip " + clip_id + " has non-contiguous frames");
      }
      out.back().second.push_back(ff);
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(i + 1) + ": " +
                               e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(i + 1) + ": " +
                               e.what());
    }
  }
  return out;
}

// --- checkpoints -------------------------------------------------------------

namespace detail {

inline json blocks_to_json(std::vector<ParamRef> refs) {
  json blocks = json::array();
  for (const auto& r : refs) {
    json b;
    b["name"] = r.name;
    b["rows"] = r.value->rows();
    b["cols"] = r.value->cols();
    b["values"] = r.value->values();
    blocks.push_back(std::move(b));
  }
  return blocks;
}

inline void blocks_from_json(const json& blocks, std::vector<ParamRef> refs,
                             const std::filesystem::path& path) {
  if (!blocks.is_array() || blocks.size() != refs.size())
    throw std::runtime_error(path.string() + ": expected " + std::to_string(refs.size()) +
                             " parameter blocks");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const json& b = blocks[i];
    if (b.at("name").get<std::string>() != refs[i].name)
      throw std::runtime_error(path.string() + ": block " + std::to_string(i) +
                               " is named '" + b.at("name").get<std::string>() +
                               "', expected '" + refs[i].name + "'");
    const auto rows = b.at("rows").get<std::size_t>();
    const auto cols = b.at("cols").get<std::size_t>();
    auto values = b.at("values").get<std::vector<double>>();
    if (rows != refs[i].value->rows() || cols != refs[i].value->cols() ||
        values.size() != refs[i].value->size())
      throw std::runtime_error(path.string() + ": block '" + refs[i].name +
                               "' has the wrong shape");
    *refs[i].value = Matrix(rows, cols, std::move(values));
  }
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  json j;
  j["format_version"] = ck.format_version;
  j["model_kind"] = model_kind_name(ck.kind);
  j["streams"] = stream_mask_name(ck.mask);
  j["seed"] = ck.seed;
  json dims;
  dims["input"] = ck.input_dim();
  Checkpoint& mut = const_cast<Checkpoint&>(ck);
  switch (ck.kind) {
    case ModelKind::linear: {
      auto& p = std::get<LinearBaselineParams>(mut.params);
      dims["hidden"] = 0;
      j["epsilon"] = p.epsilon;
      j["blocks"] = detail::blocks_to_json(p.param_refs());
      break;
    }
    case ModelKind::simple: {
      auto& p = std::get<SimpleModelParams>(mut.params);
      dims["hidden"] = p.cell.hidden_dim;
      j["blocks"] = detail::blocks_to_json(p.param_refs());
      break;
    }
    case ModelKind::keyframe: {
      auto& p = std::get<KeyFrameModelParams>(mut.params);
      dims["hidden"] = p.forward_cell.hidden_dim;
      j["blocks"] = detail::blocks_to_json(p.param_refs());
      break;
    }
  }
  j["dims"] = std::move(dims);
  auto f = detail::open_out(path);
  f << j.dump(2) << '\n';
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const json j = detail::read_json_file(path);
  Checkpoint ck;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != 1)
      throw std::runtime_error(path.string() + ": unsupported format_version " +
                               std::to_string(version));
    ck.kind = parse_model_kind(j.at("model_kind").get<std::string>());
    ck.mask = parse_stream_mask(j.at("streams").get<std::string>());
    ck.seed = j.at("seed").get<std::uint64_t>();
    const int input = j.at("dims").at("input").get<int>();
    const int hidden = j.at("dims").at("hidden").get<int>();
    switch (ck.kind) {
      case ModelKind::linear: {
        LinearBaselineParams p = make_linear_model(input);
        p.epsilon = j.at("epsilon").get<double>();
        detail::blocks_from_json(j.at("blocks"), p.param_refs(), path);
        ck.params = std::move(p);
        break;
      }
      case ModelKind::simple: {
        SimpleModelParams p;
        p.cell = LstmCellParams(input, hidden);
        p.head_weight = Matrix(1, static_cast<std::size_t>(hidden));
        p.head_bias = Matrix(1, 1);
        detail::blocks_from_json(j.at("blocks"), p.param_refs(), path);
        ck.params = std::move(p);
        break;
      }
      case ModelKind::keyframe: {
        KeyFrameModelParams p;
        p.forward_cell = LstmCellParams(input, hidden);
        p.backward_cell = LstmCellParams(input, hidden);
        p.rating_weight = Matrix(1, static_cast<std::size_t>(2 * hidden));
        p.rating_bias = Matrix(1, 1);
        p.weight_weight = Matrix(1, static_cast<std::size_t>(2 * hidden));
        p.weight_bias = Matrix(1, 1);
        detail::blocks_from_json(j.at("blocks"), p.param_refs(), path);
        ck.params = std::move(p);
        break;
      }
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return ck;
}

// --- logs, tables, reports ---------------------------------------------------

inline void write_train_log_csv(const std::filesystem::path& path,
                                std::span<const EpochLog> log) {
  auto f = detail::open_out(path);
  f << "epoch,train_mae,val_mae,seconds\n";
  for (const auto& row : log)
    f << row.epoch << ',' << fmt_double(row.train_mae) << ',' << fmt_double(row.val_mae)
      << ',' << fmt_double(row.seconds) << '\n';
}

inline void write_ablation_csv(const std::filesystem::path& path,
                               std::span<const AblationCell> cells) {
  auto f = detail::open_out(path);
  f << "gaze,hand,pose,foot,model,mae\n";
  for (const auto& c : cells)
    f << (c.streams.gaze ? 1 : 0) << ',' << (c.streams.hand() ? 1 : 0) << ','
      << (c.streams.pose ? 1 : 0) << ',' << (c.streams.foot ? 1 : 0) << ','
      << model_kind_name(c.model) << ',' << fmt_double(c.mae) << '\n';
}

struct PredictionRow {
  std::string clip_id;
  std::size_t frame = 0;
  double ground_truth = 0.0;  // 1..5 scale
  double prediction = 0.0;    // 1..5 scale
  std::string model;
};

inline void write_predictions_csv(const std::filesystem::path& path,
                                  std::span<const PredictionRow> rows) {
  auto f = detail::open_out(path);
  f << "clip_id,frame,ground_truth,prediction,model\n";
  for (const auto& r : rows)
    f << r.clip_id << ',' << r.frame << ',' << fmt_double(r.ground_truth) << ','
      << fmt_double(r.prediction) << ',' << r.model << '\n';
}

inline void write_correlations_csv(const std::filesystem::path& path,
                                   std::span<const CorrelationEntry> entries) {
  auto f = detail::open_out(path);
  f << "dimension,pearson_r\n";
  for (const auto& e : entries) f << e.name << ',' << fmt_double(e.r) << '\n';
}

struct IccRow {
  std::string set;        // "common" or "expansion"
  bool normalized = false;
  IccReport report;
  std::size_t n = 0, k = 0;
};

inline void write_icc_json(const std::filesystem::path& path, std::span<const IccRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json o;
    o["set"] = r.set;
    o["normalized"] = r.normalized;
    o["icc_c1"] = r.report.icc_c1;
    o["icc_a1"] = r.report.icc_a1;
    o["icc_ak"] = r.report.icc_ak;
    o["n"] = r.n;
    o["k"] = r.k;
    arr.push_back(std::move(o));
  }
  json j;
  j["rows"] = std::move(arr);
  auto f = detail::open_out(path);
  f << j.dump(2) << '\n';
}

// --- corpus directory ---------------------------------------------------------

inline constexpr const char* kClipsHeader = "clip_id,drive_id,split";

inline void write_clips_csv(const std::filesystem::path& path,
                            std::span<const ClipMeta> meta) {
  auto f = detail::open_out(path);
  f << kClipsHeader << '\n';
  for (const auto& m : meta) f << m.clip_id << ',' << m.drive_id << ',' << m.split << '\n';
}

inline std::vector<ClipMeta> read_clips_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  detail::expect_header(lines, kClipsHeader, path);
  std::vector<ClipMeta> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != 3)
      throw detail::csv_error(path, i + 1,
                              "expected 3 fields, got " + std::to_string(f.size()));
    out.push_back(ClipMeta{f[0], f[1], f[2]});
  }
  return out;
}

inline void save_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  write_features_jsonl(dir / "features.jsonl", corpus.clips);
  std::vector<OriSeries> truth;
  truth.reserve(corpus.clips.size());
  for (const auto& c : corpus.clips) truth.push_back(c.truth);
  write_ori_csv(dir / "ori_truth.csv", truth);
  write_ratings_csv(dir / "ratings.csv", corpus.ratings);
  write_clips_csv(dir / "clips.csv", corpus.meta);

  json j;
  j["command"] = "gen";
  j["seed"] = corpus.spec.seed;
  j["clips"] = corpus.spec.total_clips();
  j["raters"] = corpus.spec.gen.raters.size();
  j["splits"] = {{"train", corpus.spec.n_train},
                 {"val", corpus.spec.n_val},
                 {"test", corpus.spec.n_test}};
  j["drives"] = {{"train", corpus.spec.d_train},
                 {"val", corpus.spec.d_val},
                 {"test", corpus.spec.d_test}};
  j["common_clips"] = corpus.common_clips;
  j["frame_rate"] = corpus.spec.gen.frame_rate;
  j["clip_seconds"] = corpus.spec.gen.clip_seconds;
  j["files"] = {{"features", "features.jsonl"},
                {"ori_truth", "ori_truth.csv"},
                {"ratings", "ratings.csv"},
                {"clips", "clips.csv"}};
  auto f = detail::open_out(dir / "manifest.json");
  f << j.dump(2) << '\n';
}

struct LoadedCorpus {
  std::vector<ClipMeta> meta;
  std::map<std::string, std::vector<FrameFeatures>> frames;
  std::map<std::string, OriSeries> truth;
  std::vector<SegmentRating> ratings;
  std::vector<std::string> common_clips;
  std::uint64_t seed = 0;
  int frame_rate = kFrameRate;
};

inline LoadedCorpus load_corpus(const std::filesystem::path& dir) {
  const json manifest = detail::read_json_file(dir / "manifest.json");
  LoadedCorpus out;
  try {
    out.seed = manifest.at("seed").get<std::uint64_t>();
    out.frame_rate = manifest.at("frame_rate").get<int>();
    out.common_clips = manifest.at("common_clips").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw std::runtime_error((dir / "manifest.json").string() + ": " + e.what());
  }
  out.meta = read_clips_csv(dir / "clips.csv");
  for (auto& [clip_id, frames] : read_features_jsonl(dir / "features.jsonl"))
    out.frames[clip_id] = std::move(frames);
  for (auto& series : read_ori_csv(dir / "ori_truth.csv")) {
    series.frame_rate = out.frame_rate;
    out.truth[series.clip_id] = std::move(series);
  }
  out.ratings = read_ratings_csv(dir / "ratings.csv");

  for (const auto& m : out.meta) {
    if (!out.frames.count(m.clip_id))
      throw std::runtime_error("corpus: clip " + m.clip_id + " has no features");
    if (!out.truth.count(m.clip_id))
      throw std::runtime_error("corpus: clip " + m.clip_id + " has no ground-truth series");
  }
  return out;
}

inline std::vector<RawClip> loaded_split(const LoadedCorpus& corpus, const std::string& split) {
  std::vector<RawClip> out;
  for (const auto& m : corpus.meta) {
    if (m.split != split) continue;
    RawClip rc;
    rc.clip_id = m.clip_id;
    rc.frames = &corpus.frames.at(m.clip_id);
    rc.target_unit = &corpus.truth.at(m.clip_id).unit_values;
    out.push_back(std::move(rc));
  }
  return out;
}

inline SplitData loaded_splits(const LoadedCorpus& corpus) {
  validate_drive_disjoint(corpus.meta);
  SplitData out;
  out.train = loaded_split(corpus, "train");
  out.val = loaded_split(corpus, "val");
  out.test = loaded_split(corpus, "test");
  return out;
}

}  // namespace ori
