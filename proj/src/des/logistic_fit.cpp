#include "desgn/logistic_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace desgn {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double Logistic::eval(double x) const { return L * sigmoid(k * (x - x0)) + c; }

LogisticFit fit_logistic_full(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw ModelError("logistic fit needs at least 4 points");
  {
    std::vector<double> xs;
    for (auto& p : points) xs.push_back(p.first);
    std::sort(xs.begin(), xs.end());
    for (size_t i = 1; i < xs.size(); ++i)
      if (xs[i] == xs[i - 1]) throw ModelError("logistic fit needs distinct x values");
  }

  const int n = static_cast<int>(points.size());
  double ymin = points[0].second, ymax = points[0].second, ysum = 0;
  for (auto& p : points) {
    ymin = std::min(ymin, p.second);
    ymax = std::max(ymax, p.second);
    ysum += p.second;
  }

  LogisticFit fit;
  double yspread = ymax - ymin;
  if (yspread < 1e-12 * (1.0 + std::abs(ymax))) {
    // Flat data: constant curve, k pinned to zero.
    fit.curve = Logistic{0.0, 0.0, 0.0, ysum / n};
    fit.converged = true;
    return fit;
  }

  // Data-driven start: range for L, midpoint crossing for x0, slope sign
  // from the x/y correlation.
  auto lo = std::min_element(points.begin(), points.end(),
                             [](auto& a, auto& b) { return a.first < b.first; });
  auto hi = std::max_element(points.begin(), points.end(),
                             [](auto& a, auto& b) { return a.first < b.first; });
  double slope_sign = (hi->second >= lo->second) ? 1.0 : -1.0;
  double ymid = (ymin + ymax) / 2.0;
  double x0_init = points[0].first;
  double best_gap = std::abs(points[0].second - ymid);
  for (auto& p : points) {
    double gap = std::abs(p.second - ymid);
    if (gap < best_gap) {
      best_gap = gap;
      x0_init = p.first;
    }
  }
  double xspread = hi->first - lo->first;

  Eigen::Vector4d theta;  // (L, k, x0, c)
  theta << yspread, slope_sign * 4.0 / std::max(xspread, 1e-9), x0_init, ymin;

  auto residuals = [&](const Eigen::Vector4d& th, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(n);
    if (J) J->resize(n, 4);
    for (int i = 0; i < n; ++i) {
      double x = points[i].first, y = points[i].second;
      double z = th[1] * (x - th[2]);
      double s = sigmoid(z);
      r[i] = th[0] * s + th[3] - y;
      if (J) {
        double sp = s * (1.0 - s);
        (*J)(i, 0) = s;
        (*J)(i, 1) = th[0] * sp * (x - th[2]);
        (*J)(i, 2) = -th[0] * sp * th[1];
        (*J)(i, 3) = 1.0;
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  residuals(theta, r, &J);
  double rss = r.squaredNorm();
  double lm = 1e-3;
  const int max_iters = 400;
  int it = 0;
  for (; it < max_iters; ++it) {
    Eigen::Matrix4d H = J.transpose() * J;
    Eigen::Vector4d g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-13 * (1.0 + std::sqrt(rss))) break;
    Eigen::Matrix4d Hlm = H + lm * Eigen::Matrix4d(H.diagonal().cwiseMax(1e-12).asDiagonal());
    Eigen::Vector4d step = Hlm.ldlt().solve(-g);
    Eigen::Vector4d trial = theta + step;
    Eigen::VectorXd rt;
    residuals(trial, rt, nullptr);
    double rss_t = rt.squaredNorm();
    if (rss_t < rss) {
      theta = trial;
      residuals(theta, r, &J);
      if (rss - rss_t < 1e-15 * (1.0 + rss)) {
        rss = rss_t;
        break;
      }
      rss = rss_t;
      lm = std::max(lm * 0.3, 1e-12);
    } else {
      lm *= 3.0;
      if (lm > 1e12) break;
    }
  }

  fit.curve = Logistic{theta[0], theta[1], theta[2], theta[3]};
  fit.rss = rss;
  fit.iterations = it;
  fit.converged = it < max_iters && lm <= 1e12;
  return fit;
}

Logistic fit_logistic(const std::vector<std::pair<double, double>>& points) {
  return fit_logistic_full(points).curve;
}

HpProfile hp_profile(const HeatPumpSpec& hp, const std::vector<double>& t_amb_c) {
  HpProfile out;
  out.cap_kw.reserve(t_amb_c.size());
  out.cop.reserve(t_amb_c.size());
  for (double t : t_amb_c) {
    out.cap_kw.push_back(hp.cap_fit.eval(t));
    out.cop.push_back(std::max(hp.cop_fit.eval(t), 1e-3));
  }
  return out;
}

}  // namespace desgn
