#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "homogbench/common.hpp"

namespace homog {

/// Log-log least-squares fit of a sweep: y ~ exp(intercept) * x^slope.
struct RateReport {
  std::vector<std::pair<double, double>> points;  // (parameter, measured)
  double slope = 0.0;
  double intercept = 0.0;  // in log space
  double r2 = 0.0;
  bool identically_zero = false;
  std::string experiment;
};

namespace rates {

inline RateReport fit_rate(std::vector<std::pair<double, double>> points,
                           std::string experiment = {}) {
  if (points.size() < 4) throw TooFewPoints("fit_rate: need >= 4 points");
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (points[i].first == points[i + 1].first ||
        (points[i].first < points[i + 1].first) !=
            (points[0].first < points[1].first))
      throw ShapeMismatch("fit_rate: parameters must be strictly monotone");

  RateReport r;
  r.points = std::move(points);
  r.experiment = std::move(experiment);

  bool all_zero = true;
  for (auto& [x, y] : r.points) {
    if (!(x > 0.0)) throw ShapeMismatch("fit_rate: parameters must be positive");
    if (y != 0.0) all_zero = false;
    if (y < 0.0) throw ShapeMismatch("fit_rate: measurements must be >= 0");
  }
  if (all_zero) {
    r.identically_zero = true;
    r.r2 = 1.0;
    return r;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = double(r.points.size());
  for (auto& [x, y] : r.points) {
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  double denom = n * sxx - sx * sx;
  r.slope = (n * sxy - sx * sy) / denom;
  r.intercept = (sy - r.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (auto& [x, y] : r.points) {
    double e = std::log(y) - (r.intercept + r.slope * std::log(x));
    ss_res += e * e;
  }
  r.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return r;
}

}  // namespace rates
}  // namespace homog
