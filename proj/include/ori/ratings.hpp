#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/spline.hpp"

namespace ori {

// One discrete rating for a 2-second segment of a clip.
struct SegmentRating {
  std::string clip_id;
  int segment_index = 0;
  std::string rater_id;
  int value = 0;  // 1..5
};

inline void check_rating(const SegmentRating& r) {
  if (r.value < 1 || r.value > 5)
    throw std::invalid_argument("rating value " + std::to_string(r.value) + " for clip '" +
                                r.clip_id + "' outside 1..5");
  if (r.segment_index < 0)
    throw std::invalid_argument("negative segment index for clip '" + r.clip_id + "'");
}

// A rating after rater-bias normalization; values become continuous.
struct NormalizedRating {
  std::string clip_id;
  int segment_index = 0;
  std::string rater_id;
  double value = 0.0;
};

inline std::vector<NormalizedRating> as_real(const std::vector<SegmentRating>& in) {
  std::vector<NormalizedRating> out;
  out.reserve(in.size());
  for (const auto& r : in)
    out.push_back({r.clip_id, r.segment_index, r.rater_id, static_cast<double>(r.value)});
  return out;
}

// Sorted pool of one owner's ratings (or of all raters combined), built from
// the common set only.
struct LookupTable {
  std::string owner;  // rater id or "COMBINED"
  std::vector<double> values;
};

struct LookupTables {
  std::map<std::string, LookupTable> by_rater;
  LookupTable combined;
};

// Pools and sorts each rater's common-set ratings plus one combined pool.
// Every rater present must have rated every (clip, segment) target.
inline LookupTables build_lookup_tables(const std::vector<SegmentRating>& common_set) {
  if (common_set.empty()) throw std::invalid_argument("build_lookup_tables: empty common set");
  std::set<std::pair<std::string, int>> targets;
  std::set<std::string> raters;
  for (const auto& r : common_set) {
    check_rating(r);
    targets.insert({r.clip_id, r.segment_index});
    raters.insert(r.rater_id);
  }
  std::map<std::string, std::set<std::pair<std::string, int>>> seen;
  LookupTables out;
  for (const auto& r : common_set) {
    out.by_rater[r.rater_id].values.push_back(r.value);
    out.combined.values.push_back(r.value);
    if (!seen[r.rater_id].insert({r.clip_id, r.segment_index}).second)
      throw std::invalid_argument("duplicate rating by '" + r.rater_id + "' for clip '" +
                                  r.clip_id + "' segment " + std::to_string(r.segment_index));
  }
  for (const auto& rater : raters) {
    if (seen[rater].size() != targets.size())
      throw std::invalid_argument("rater '" + rater + "' rated " +
                                  std::to_string(seen[rater].size()) + " of " +
                                  std::to_string(targets.size()) + " common-set segments");
    out.by_rater[rater].owner = rater;
    std::sort(out.by_rater[rater].values.begin(), out.by_rater[rater].values.end());
  }
  out.combined.owner = "COMBINED";
  std::sort(out.combined.values.begin(), out.combined.values.end());
  return out;
}

// Linear interpolation of the empirical quantile function of a sorted table;
// positions are i/N for the i-th value, clamped to the extreme values.
inline double quantile_interp(const LookupTable& table, double p) {
  const auto& v = table.values;
  const std::size_t n = v.size();
  if (n == 0) throw std::invalid_argument("quantile_interp: empty table");
  const double pn = p * static_cast<double>(n);
  if (pn <= 1.0) return v.front();
  if (pn >= static_cast<double>(n)) return v.back();
  const std::size_t i = static_cast<std::size_t>(pn);  // v[i-1] at position i/n
  const double t = pn - static_cast<double>(i);
  return v[i - 1] + t * (v[i] - v[i - 1]);
}

// Percentile-based rater-bias removal: the value's percentile interval in the
// rater's table, read as the half-open empirical-CDF interval (F(v-), F(v)],
// is replaced by the mean of the combined-table values in that interval.
// Interval boundaries are matched in exact integer arithmetic. An interval
// that captures no combined values (including unseen values, whose interval
// is empty) falls back to the interpolated combined quantile at the interval
// midpoint, which clamps to the extreme values at the ends of the scale.
inline double normalize_rating(double value, const LookupTable& rater,
                               const LookupTable& combined) {
  const std::size_t nr = rater.values.size();
  const std::size_t nc = combined.values.size();
  if (nr == 0 || nc == 0) throw std::invalid_argument("normalize_rating: empty lookup table");
  const std::size_t count_lt =
      std::lower_bound(rater.values.begin(), rater.values.end(), value) - rater.values.begin();
  const std::size_t count_le =
      std::upper_bound(rater.values.begin(), rater.values.end(), value) - rater.values.begin();
  // combined value j (1-based, position j/nc) is captured iff
  // count_lt/nr < j/nc <= count_le/nr
  const std::size_t j_min = (count_lt * nc) / nr + 1;
  const std::size_t j_max = (count_le * nc) / nr;
  if (j_min <= j_max) {
    double sum = 0.0;
    for (std::size_t j = j_min; j <= j_max; ++j) sum += combined.values[j - 1];
    return sum / static_cast<double>(j_max - j_min + 1);
  }
  const double mid = (static_cast<double>(count_lt) + static_cast<double>(count_le)) /
                     (2.0 * static_cast<double>(nr));
  return quantile_interp(combined, mid);
}

// Applies the tables to a whole rating collection. Raters without a table
// (absent from the common set) are an error.
inline std::vector<NormalizedRating> normalize_ratings(const std::vector<SegmentRating>& ratings,
                                                       const LookupTables& tables) {
  std::vector<NormalizedRating> out;
  out.reserve(ratings.size());
  for (const auto& r : ratings) {
    check_rating(r);
    auto it = tables.by_rater.find(r.rater_id);
    if (it == tables.by_rater.end())
      throw std::invalid_argument("rater '" + r.rater_id + "' absent from common set");
    out.push_back({r.clip_id, r.segment_index, r.rater_id,
                   normalize_rating(r.value, it->second, tables.combined)});
  }
  return out;
}

// Per-clip, per-segment arithmetic mean across raters. Segment indices of a
// clip must form a gapless 0..max range.
inline std::map<std::string, std::vector<double>> average_across_raters(
    const std::vector<NormalizedRating>& ratings) {
  std::map<std::string, std::map<int, std::pair<double, int>>> acc;
  for (const auto& r : ratings) {
    auto& cell = acc[r.clip_id][r.segment_index];
    cell.first += r.value;
    cell.second += 1;
  }
  std::map<std::string, std::vector<double>> out;
  for (const auto& [clip, segs] : acc) {
    const int max_seg = segs.rbegin()->first;
    std::vector<double> means(static_cast<std::size_t>(max_seg) + 1, 0.0);
    for (int s = 0; s <= max_seg; ++s) {
      auto it = segs.find(s);
      if (it == segs.end())
        throw std::invalid_argument("clip '" + clip + "' segment " + std::to_string(s) +
                                    " has zero ratings");
      means[static_cast<std::size_t>(s)] = it->second.first / it->second.second;
    }
    out[clip] = std::move(means);
  }
  return out;
}

inline double ori_to_unit(double v) { return (v - 1.0) / 4.0; }
inline double unit_to_ori(double u) { return 1.0 + 4.0 * u; }

// Continuous per-frame readiness curve for one clip, on the 1..5 scale and
// its shifted/scaled twin on 0..1.
struct OriSeries {
  std::string clip_id;
  int frame_rate = 30;
  std::vector<double> values;
  std::vector<double> unit_values;
};

// Fills unit_values as (value - 1) / 4; values must lie in [1, 5].
inline OriSeries unit_scale(OriSeries series) {
  series.unit_values.resize(series.values.size());
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double v = series.values[i];
    if (!(v >= 1.0 && v <= 5.0))
      throw std::invalid_argument("unit_scale: value " + std::to_string(v) + " outside [1,5]");
    series.unit_values[i] = ori_to_unit(v);
  }
  return series;
}

// Cubic interpolation of per-segment means to a per-frame series. Knots sit
// at segment centers, frames frame_rate*(2i+1); outside the knot range the
// series holds the boundary value. Output is clamped to [1, 5].
inline OriSeries interpolate_ori(const std::string& clip_id,
                                 const std::vector<double>& segment_means, int frame_rate = 30) {
  if (segment_means.size() < 4)
    throw std::invalid_argument("interpolate_ori: need >= 4 segments, got " +
                                std::to_string(segment_means.size()));
  std::vector<double> x;
  x.reserve(segment_means.size());
  for (std::size_t i = 0; i < segment_means.size(); ++i) {
    const double m = segment_means[i];
    if (!std::isfinite(m)) throw std::invalid_argument("interpolate_ori: non-finite segment mean");
    if (m < 1.0 || m > 5.0)
      throw std::invalid_argument("interpolate_ori: segment mean " + std::to_string(m) +
                                  " outside [1,5]");
    x.push_back(static_cast<double>(frame_rate) * (2.0 * static_cast<double>(i) + 1.0));
  }
  NaturalCubicSpline spline(x, segment_means);
  OriSeries out;
  out.clip_id = clip_id;
  out.frame_rate = frame_rate;
  const std::size_t frames = 2 * static_cast<std::size_t>(frame_rate) * segment_means.size();
  out.values.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f)
    out.values.push_back(std::clamp(spline(static_cast<double>(f)), 1.0, 5.0));
  return unit_scale(std::move(out));
}

}  // namespace ori
