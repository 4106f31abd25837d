#pragma once

#include <utility>
#include <vector>

#include "desgn/catalog.hpp"

namespace desgn {

struct LogisticFit {
  Logistic curve;
  bool converged = false;
  double rss = 0.0;  // sum of squared residuals
  int iterations = 0;
};

/// Least-squares fit of a logistic curve by Levenberg-Marquardt with a
/// data-driven deterministic start. Needs at least 4 points with distinct x.
/// Flat data degenerates to k = 0 with the curve constant at c + L/2.
LogisticFit fit_logistic_full(const std::vector<std::pair<double, double>>& points);

Logistic fit_logistic(const std::vector<std::pair<double, double>>& points);

struct HpProfile {
  std::vector<double> cap_kw;
  std::vector<double> cop;  // clamped below at 1e-3
};

/// Evaluates a heat pump's fitted capacity and COP curves over an ambient
/// temperature trace.
HpProfile hp_profile(const HeatPumpSpec& hp, const std::vector<double>& t_amb_c);

}  // namespace desgn
