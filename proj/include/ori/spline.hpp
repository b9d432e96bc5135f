#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ori {

// Natural cubic spline through strictly increasing knots (second derivative
// zero at both ends). Outside the knot range the curve is extended with zero
// slope, i.e. held constant at the boundary values.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("spline: need >= 2 aligned knots");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i] < x_[i + 1])) throw std::invalid_argument("spline: knots must be increasing");
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]))
        throw std::invalid_argument("spline: non-finite knot");

    // tridiagonal solve for second derivatives, natural boundary conditions
    y2_.assign(n, 0.0);
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double sig = (x_[i] - x_[i - 1]) / (x_[i + 1] - x_[i - 1]);
      double p = sig * y2_[i - 1] + 2.0;
      y2_[i] = (sig - 1.0) / p;
      u[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) - (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
      u[i] = (6.0 * u[i] / (x_[i + 1] - x_[i - 1]) - sig * u[i - 1]) / p;
    }
    for (std::size_t i = n - 1; i-- > 1;) y2_[i] = y2_[i] * y2_[i + 1] + u[i];
  }

  double operator()(double xx) const {
    const std::size_t n = x_.size();
    if (xx <= x_.front()) return y_.front();
    if (xx >= x_.back()) return y_.back();
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      std::size_t mid = (hi + lo) / 2;
      if (x_[mid] > xx)
        hi = mid;
      else
        lo = mid;
    }
    const double h = x_[hi] - x_[lo];
    const double a = (x_[hi] - xx) / h;
    const double b = (xx - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * y2_[lo] + (b * b * b - b) * y2_[hi]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, y2_;
};

}  // namespace ori
