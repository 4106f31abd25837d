#include <Eigen/Dense>
#include <cmath>

#include "desgn/lp.hpp"

namespace desgn {

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kCostTol = 1e-9;

struct ColMap {
  // x = shift + sign*u[pos] - u[neg]
  int pos = -1, neg = -1;
  double shift = 0.0;
  double sign = 1.0;
};

struct WorkRow {
  RowSense sense;
  double rhs;
  std::vector<std::pair<int, double>> terms;  // over u-columns
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  lp.check();
  LpResult result;

  // Shift every variable into u >= 0 space.
  std::vector<ColMap> map(lp.n);
  int nu = 0;
  std::vector<std::pair<int, double>> ubound;  // u[col] <= b rows to add
  for (int i = 0; i < lp.n; ++i) {
    double lo = lp.lb[i], hi = lp.ub[i];
    if (lo == hi) {
      map[i].shift = lo;
      continue;
    }
    if (std::isfinite(lo)) {
      map[i].pos = nu++;
      map[i].shift = lo;
      if (std::isfinite(hi)) ubound.push_back({map[i].pos, hi - lo});
    } else if (std::isfinite(hi)) {
      map[i].pos = nu++;
      map[i].shift = hi;
      map[i].sign = -1.0;
    } else {
      map[i].pos = nu++;
      map[i].neg = nu++;
    }
  }

  std::vector<WorkRow> work;
  work.reserve(lp.rows.size() + ubound.size());
  for (const auto& r : lp.rows) {
    WorkRow w{r.sense, r.rhs, {}};
    for (auto [i, v] : r.terms) {
      w.rhs -= v * map[i].shift;
      if (map[i].pos >= 0) w.terms.push_back({map[i].pos, v * map[i].sign});
      if (map[i].neg >= 0) w.terms.push_back({map[i].neg, -v});
    }
    work.push_back(std::move(w));
  }
  for (auto [col, b] : ubound) work.push_back(WorkRow{RowSense::Le, b, {{col, 1.0}}});

  // Make every rhs nonnegative.
  for (auto& w : work) {
    if (w.rhs < 0) {
      w.rhs = -w.rhs;
      for (auto& t : w.terms) t.second = -t.second;
      if (w.sense == RowSense::Le) w.sense = RowSense::Ge;
      else if (w.sense == RowSense::Ge) w.sense = RowSense::Le;
    }
  }

  const int m = static_cast<int>(work.size());
  int n_slack = 0, n_art = 0;
  for (const auto& w : work) {
    if (w.sense != RowSense::Eq) ++n_slack;
    if (w.sense != RowSense::Le) ++n_art;
  }
  const int total = nu + n_slack + n_art;
  const int art_begin = nu + n_slack;

  // Internal objective is always minimised.
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
  for (int i = 0; i < lp.n; ++i) {
    double ci = lp.maximize ? -lp.c[i] : lp.c[i];
    if (map[i].pos >= 0) cost[map[i].pos] += ci * map[i].sign;
    if (map[i].neg >= 0) cost[map[i].neg] -= ci;
  }

  using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajorMat tbl = RowMajorMat::Zero(m, total + 1);
  std::vector<int> basis(m, -1);
  {
    int slack = nu, art = art_begin;
    for (int r = 0; r < m; ++r) {
      for (auto [j, v] : work[r].terms) tbl(r, j) += v;
      tbl(r, total) = work[r].rhs;
      switch (work[r].sense) {
        case RowSense::Le:
          tbl(r, slack) = 1.0;
          basis[r] = slack++;
          break;
        case RowSense::Ge:
          tbl(r, slack) = -1.0;
          ++slack;
          tbl(r, art) = 1.0;
          basis[r] = art++;
          break;
        case RowSense::Eq:
          tbl(r, art) = 1.0;
          basis[r] = art++;
          break;
      }
    }
  }

  Eigen::VectorXd zrow(total + 1);
  auto rebuild_zrow = [&](const Eigen::VectorXd& c) {
    zrow.setZero();
    zrow.head(total) = c;
    for (int r = 0; r < m; ++r) {
      double cb = c[basis[r]];
      if (cb != 0.0) zrow -= cb * tbl.row(r).transpose();
    }
  };

  int iters = 0;
  const int max_iters = 20000 + 60 * (m + total);
  bool bland = false;
  int stall = 0;
  double last_obj = std::numeric_limits<double>::infinity();

  auto pivot = [&](int r, int j) {
    tbl.row(r) /= tbl(r, j);
    for (int k = 0; k < m; ++k) {
      if (k == r) continue;
      double f = tbl(k, j);
      if (f != 0.0) tbl.row(k) -= f * tbl.row(r);
    }
    double fz = zrow[j];
    if (fz != 0.0) zrow -= fz * tbl.row(r).transpose();
    basis[r] = j;
  };

  // allowed(j): artificials are barred from re-entering in phase II.
  // stop_below: early exit once the objective reaches this value (phase I
  // needs only a zero artificial sum, not reduced-cost optimality).
  auto run_simplex = [&](bool phase2, double stop_below) -> LpStatus {
    while (true) {
      if (-zrow[total] <= stop_below) return LpStatus::Optimal;
      if (++iters > max_iters) return LpStatus::IterLimit;
      int enter = -1;
      if (bland) {
        for (int j = 0; j < total; ++j) {
          if (phase2 && j >= art_begin) continue;
          if (zrow[j] < -kCostTol) {
            enter = j;
            break;
          }
        }
      } else {
        double best = -kCostTol;
        for (int j = 0; j < total; ++j) {
          if (phase2 && j >= art_begin) continue;
          if (zrow[j] < best) {
            best = zrow[j];
            enter = j;
          }
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m; ++r) {
        double a = tbl(r, enter);
        if (a > kPivTol) {
          double ratio = tbl(r, total) / a;
          if (leave < 0 || ratio < best_ratio - 1e-12 ||
              (std::abs(ratio - best_ratio) <= 1e-12 &&
               (bland ? basis[r] < basis[leave] : r < leave))) {
            leave = r;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);

      double obj = -zrow[total];
      if (obj > last_obj - 1e-13 * (1.0 + std::abs(last_obj))) {
        if (++stall > 2 * (m + total)) bland = true;
      } else {
        stall = 0;
      }
      last_obj = obj;
    }
  };

  // Phase I
  if (n_art > 0) {
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(total);
    for (int j = art_begin; j < total; ++j) c1[j] = 1.0;
    rebuild_zrow(c1);
    double bmax = tbl.col(total).cwiseAbs().maxCoeff();
    LpStatus s = run_simplex(false, 1e-10 * (1.0 + bmax));
    if (s == LpStatus::IterLimit) {
      result.status = s;
      result.iterations = iters;
      return result;
    }
    double art_sum = -zrow[total];
    if (art_sum > 1e-7 * (1.0 + tbl.col(total).cwiseAbs().maxCoeff())) {
      result.status = LpStatus::Infeasible;
      result.iterations = iters;
      return result;
    }
    // Drive any artificial still basic (at level zero) out of the basis.
    for (int r = 0; r < m; ++r) {
      if (basis[r] < art_begin) continue;
      int j_piv = -1;
      for (int j = 0; j < art_begin; ++j)
        if (std::abs(tbl(r, j)) > kPivTol) {
          j_piv = j;
          break;
        }
      if (j_piv >= 0) pivot(r, j_piv);
    }
  }

  // Phase II
  bland = false;
  stall = 0;
  last_obj = std::numeric_limits<double>::infinity();
  rebuild_zrow(cost);
  LpStatus s = run_simplex(true, -std::numeric_limits<double>::infinity());
  result.iterations = iters;
  if (s != LpStatus::Optimal) {
    result.status = s;
    return result;
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(total);
  for (int r = 0; r < m; ++r) u[basis[r]] = tbl(r, total);
  result.x.assign(lp.n, 0.0);
  for (int i = 0; i < lp.n; ++i) {
    double v = map[i].shift;
    if (map[i].pos >= 0) v += map[i].sign * u[map[i].pos];
    if (map[i].neg >= 0) v -= u[map[i].neg];
    result.x[i] = v;
  }
  result.objective = 0.0;
  for (int i = 0; i < lp.n; ++i) result.objective += lp.c[i] * result.x[i];
  result.status = LpStatus::Optimal;
  return result;
}

}  // namespace desgn
