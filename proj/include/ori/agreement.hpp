#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ori/ratings.hpp"

namespace ori {

// n rated targets (clip-segments) by k raters; cells may be missing (NaN).
struct RatingsMatrix {
  std::vector<std::string> target_labels;  // row labels, "clip:segment"
  std::vector<std::string> rater_labels;   // column labels
  std::vector<double> cells;               // row-major, NaN = missing

  std::size_t n() const { return target_labels.size(); }
  std::size_t k() const { return rater_labels.size(); }

  double& at(std::size_t i, std::size_t j) { return cells[i * k() + j]; }
  double at(std::size_t i, std::size_t j) const { return cells[i * k() + j]; }
  bool has(std::size_t i, std::size_t j) const { return !std::isnan(at(i, j)); }

  std::vector<std::string> missing_cells(std::size_t limit = 8) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n() && out.size() < limit; ++i)
      for (std::size_t j = 0; j < k() && out.size() < limit; ++j)
        if (!has(i, j)) out.push_back(target_labels[i] + " x " + rater_labels[j]);
    return out;
  }

  bool complete() const {
    for (double c : cells)
      if (std::isnan(c)) return false;
    return true;
  }
};

// Builds the targets x raters grid from a rating collection. Raters and
// targets are ordered lexicographically; absent combinations stay missing.
inline RatingsMatrix assemble_matrix(const std::vector<NormalizedRating>& ratings) {
  std::set<std::pair<std::string, int>> targets;
  std::set<std::string> raters;
  for (const auto& r : ratings) {
    targets.insert({r.clip_id, r.segment_index});
    raters.insert(r.rater_id);
  }
  RatingsMatrix m;
  std::map<std::pair<std::string, int>, std::size_t> row_of;
  std::map<std::string, std::size_t> col_of;
  for (const auto& t : targets) {
    row_of[t] = m.target_labels.size();
    m.target_labels.push_back(t.first + ":" + std::to_string(t.second));
  }
  for (const auto& r : raters) {
    col_of[r] = m.rater_labels.size();
    m.rater_labels.push_back(r);
  }
  m.cells.assign(m.n() * m.k(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : ratings) {
    double& cell = m.at(row_of[{r.clip_id, r.segment_index}], col_of[r.rater_id]);
    if (!std::isnan(cell))
      throw std::invalid_argument("duplicate rating: " + r.clip_id + ":" +
                                  std::to_string(r.segment_index) + " by " + r.rater_id);
    cell = r.value;
  }
  return m;
}

// Pools clips rated by two raters each into one complete 2-column matrix:
// each clip's pair is sorted into slots and its rows are concatenated.
inline RatingsMatrix pool_paired_matrix(const std::vector<NormalizedRating>& ratings) {
  std::map<std::string, std::vector<NormalizedRating>> by_clip;
  for (const auto& r : ratings) by_clip[r.clip_id].push_back(r);
  RatingsMatrix m;
  m.rater_labels = {"slot_0", "slot_1"};
  std::vector<double> col0, col1;
  for (auto& [clip, rs] : by_clip) {
    std::set<std::string> raters;
    std::set<int> segments;
    for (const auto& r : rs) {
      raters.insert(r.rater_id);
      segments.insert(r.segment_index);
    }
    if (raters.size() != 2)
      throw std::invalid_argument("clip '" + clip + "' has " + std::to_string(raters.size()) +
                                  " raters, expected a pair");
    std::map<std::pair<int, std::string>, double> cell;
    for (const auto& r : rs) cell[{r.segment_index, r.rater_id}] = r.value;
    const std::string r0 = *raters.begin();
    const std::string r1 = *std::next(raters.begin());
    for (int seg : segments) {
      auto c0 = cell.find({seg, r0});
      auto c1 = cell.find({seg, r1});
      if (c0 == cell.end() || c1 == cell.end())
        throw std::invalid_argument("clip '" + clip + "' segment " + std::to_string(seg) +
                                    " not rated by both raters of its pair");
      m.target_labels.push_back(clip + ":" + std::to_string(seg));
      col0.push_back(c0->second);
      col1.push_back(c1->second);
    }
  }
  m.cells.resize(m.n() * 2);
  for (std::size_t i = 0; i < m.n(); ++i) {
    m.at(i, 0) = col0[i];
    m.at(i, 1) = col1[i];
  }
  return m;
}

// Two-way random-effects decomposition without interaction: mean squares for
// targets (rows), raters (columns) and error, plus the derived variance
// component estimates. Components are reported unclamped; sigma_r2 or
// sigma_c2 may come out negative when the corresponding mean square is
// smaller than the error mean square.
struct AnovaDecomposition {
  std::size_t n = 0, k = 0;
  double grand_mean = 0.0;
  double msr = 0.0, msc = 0.0, mse = 0.0;
  double ssr = 0.0, ssc = 0.0, sse = 0.0, sst = 0.0;
  double sigma_r2 = 0.0, sigma_c2 = 0.0, sigma_e2 = 0.0;
};

inline AnovaDecomposition two_way_anova(const RatingsMatrix& m) {
  const std::size_t n = m.n(), k = m.k();
  if (n < 2 || k < 2)
    throw std::invalid_argument("two_way_anova: need >= 2 targets and >= 2 raters, got " +
                                std::to_string(n) + "x" + std::to_string(k));
  if (!m.complete()) {
    std::string msg = "two_way_anova: missing cells:";
    for (const auto& c : m.missing_cells()) msg += " [" + c + "]";
    throw std::invalid_argument(msg);
  }
  AnovaDecomposition a;
  a.n = n;
  a.k = k;
  std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      row_mean[i] += m.at(i, j);
      col_mean[j] += m.at(i, j);
      grand += m.at(i, j);
    }
  for (auto& v : row_mean) v /= static_cast<double>(k);
  for (auto& v : col_mean) v /= static_cast<double>(n);
  grand /= static_cast<double>(n * k);
  a.grand_mean = grand;

  for (std::size_t i = 0; i < n; ++i) a.ssr += (row_mean[i] - grand) * (row_mean[i] - grand);
  a.ssr *= static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j) a.ssc += (col_mean[j] - grand) * (col_mean[j] - grand);
  a.ssc *= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double dev = m.at(i, j) - grand;
      a.sst += dev * dev;
      const double resid = m.at(i, j) - row_mean[i] - col_mean[j] + grand;
      a.sse += resid * resid;
    }

  a.msr = a.ssr / static_cast<double>(n - 1);
  a.msc = a.ssc / static_cast<double>(k - 1);
  a.mse = a.sse / static_cast<double>((n - 1) * (k - 1));
  a.sigma_e2 = a.mse;
  a.sigma_r2 = (a.msr - a.mse) / static_cast<double>(k);
  a.sigma_c2 = (a.msc - a.mse) / static_cast<double>(n);
  return a;
}

namespace detail {
inline double icc_ratio(double num, double den, const char* which) {
  if (den == 0.0) throw std::domain_error(std::string(which) + ": zero denominator, undefined");
  return num / den;
}
}  // namespace detail

// Consistency of rating trends, insensitive to rater bias.
inline double icc_c1(const AnovaDecomposition& a) {
  return detail::icc_ratio(a.msr - a.mse, a.msr + static_cast<double>(a.k - 1) * a.mse,
                           "icc_c1");
}

// Absolute agreement of single-rater values; rater bias enters the
// denominator.
inline double icc_a1(const AnovaDecomposition& a) {
  const double den = a.msr + static_cast<double>(a.k - 1) * a.mse +
                     static_cast<double>(a.k) / static_cast<double>(a.n) * (a.msc - a.mse);
  return detail::icc_ratio(a.msr - a.mse, den, "icc_a1");
}

// Reliability of the mean rating of the k raters in the matrix.
inline double icc_ak(const AnovaDecomposition& a) {
  return detail::icc_ratio(a.msr - a.mse, a.msr + (a.msc - a.mse) / static_cast<double>(a.n),
                           "icc_ak");
}

// Reliability of the average of a hypothetical panel of k_raters, from the
// unclamped variance components.
inline double icc_ak(const AnovaDecomposition& a, std::size_t k_raters) {
  if (k_raters == 0) throw std::invalid_argument("icc_ak: k must be positive");
  const double den =
      a.sigma_r2 + (a.sigma_c2 + a.sigma_e2) / static_cast<double>(k_raters);
  return detail::icc_ratio(a.sigma_r2, den, "icc_ak");
}

struct IccReport {
  double icc_c1 = 0.0;
  double icc_a1 = 0.0;
  double icc_ak = 0.0;
  std::size_t k_used = 0;
  bool clamped = false;
};

// Builds the report; in clamped mode the values are forced into [0, 1],
// matching how agreement statistics are conventionally presented.
inline IccReport make_icc_report(const AnovaDecomposition& a, bool clamped) {
  IccReport r;
  r.icc_c1 = icc_c1(a);
  r.icc_a1 = icc_a1(a);
  r.icc_ak = icc_ak(a);
  r.k_used = a.k;
  r.clamped = clamped;
  if (clamped) {
    r.icc_c1 = std::clamp(r.icc_c1, 0.0, 1.0);
    r.icc_a1 = std::clamp(r.icc_a1, 0.0, 1.0);
    r.icc_ak = std::clamp(r.icc_ak, 0.0, 1.0);
  }
  return r;
}

}  // namespace ori
