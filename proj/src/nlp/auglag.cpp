#include "desgn/auglag.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdio>

namespace desgn {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Assembled {
  int n = 0;      // problem variables
  int n_all = 0;  // + slacks
  int m_eq = 0, m_ineq = 0, m = 0;
  Eigen::VectorXd lo, hi;  // bounds over y = [x; s]
  Eigen::VectorXd scale;   // per-row scaling
  const NlpProblem* p = nullptr;

  mutable JacRows J;            // refreshed per point
  mutable Eigen::VectorXd raw;  // unscaled residuals

  void residuals(const Eigen::VectorXd& y, Eigen::VectorXd& C) const {
    const Eigen::VectorXd& x = y;
    raw.resize(m);
    int r = 0;
    for (const auto& b : p->eq) {
      b->eval(x.head(n), &raw[r]);
      r += b->rows();
    }
    for (const auto& b : p->ineq) {
      b->eval(x.head(n), &raw[r]);
      r += b->rows();
    }
    C.resize(m);
    for (int i = 0; i < m_eq; ++i) C[i] = scale[i] * raw[i];
    for (int i = 0; i < m_ineq; ++i)
      C[m_eq + i] = scale[m_eq + i] * raw[m_eq + i] + y[n + i];
  }

  void jacobian(const Eigen::VectorXd& y) const {
    J.clear();
    for (const auto& b : p->eq) b->jac(y.head(n), J);
    for (const auto& b : p->ineq) b->jac(y.head(n), J);
  }

  double violation() const {
    double v = 0;
    for (int i = 0; i < m_eq; ++i) v = std::max(v, std::abs(raw[i]));
    for (int i = 0; i < m_ineq; ++i) v = std::max(v, raw[m_eq + i]);
    return v;
  }

  double violation_scaled() const {
    double v = 0;
    for (int i = 0; i < m_eq; ++i) v = std::max(v, scale[i] * std::abs(raw[i]));
    for (int i = 0; i < m_ineq; ++i) v = std::max(v, scale[m_eq + i] * raw[m_eq + i]);
    return v;
  }

  // Row-scaled Jacobian over y = [x; s], restricted to the given free set.
  SpMat scaled_jacobian_free(const std::vector<int>& free_of,
                             int nf) const {
    std::vector<Triplet> trips;
    trips.reserve(J.col.size() + m_ineq);
    for (int r = 0; r < m; ++r)
      for (int k = J.row_ptr[r]; k < J.row_ptr[r + 1]; ++k) {
        int fc = free_of[J.col[k]];
        if (fc >= 0) trips.push_back({r, fc, scale[r] * J.val[k]});
      }
    for (int i = 0; i < m_ineq; ++i) {
      int fc = free_of[n + i];
      if (fc >= 0) trips.push_back({m_eq + i, fc, 1.0});
    }
    SpMat Js(m, nf);
    Js.setFromTriplets(trips.begin(), trips.end());
    return Js;
  }

  // Quadratic objective curvature on the free set.
  SpMat quad_hessian_free(const std::vector<int>& free_of, int nf) const {
    std::vector<Triplet> trips;
    auto add_term = [&](const std::vector<std::pair<int, double>>& terms, double w) {
      for (auto [i, ci] : terms) {
        int fi = free_of[i];
        if (fi < 0) continue;
        for (auto [j, cj] : terms) {
          int fj = free_of[j];
          if (fj >= 0) trips.push_back({fi, fj, w * ci * cj});
        }
      }
    };
    for (const auto& q : p->quad) add_term(q.terms, q.weight);
    if (p->consensus)
      for (const auto& r : p->consensus->rows) add_term(r.terms, p->consensus->rho);
    SpMat Q(nf, nf);
    Q.setFromTriplets(trips.begin(), trips.end());
    return Q;
  }
};

}  // namespace

AlResult solve_augmented(const NlpProblem& p, const Eigen::VectorXd& x0,
                         const AlOptions& opts, const Eigen::VectorXd* warm_lambda) {
  Assembled a;
  a.p = &p;
  a.n = p.n;
  a.m_eq = p.eq_rows();
  a.m_ineq = p.ineq_rows();
  a.m = a.m_eq + a.m_ineq;
  a.n_all = a.n + a.m_ineq;

  a.lo.resize(a.n_all);
  a.hi.resize(a.n_all);
  a.lo.head(a.n) = p.lb;
  a.hi.head(a.n) = p.ub;
  a.lo.tail(a.m_ineq).setZero();
  a.hi.tail(a.m_ineq).setConstant(std::numeric_limits<double>::infinity());

  Eigen::VectorXd y(a.n_all);
  y.head(a.n) = x0.cwiseMax(p.lb).cwiseMin(p.ub);
  y.tail(a.m_ineq).setZero();

  // Row scaling from the Jacobian at the start point.
  a.scale.setOnes(a.m);
  {
    a.jacobian(y);
    for (int r = 0; r < a.m; ++r) {
      double mx = 0;
      for (int k = a.J.row_ptr[r]; k < a.J.row_ptr[r + 1]; ++k)
        mx = std::max(mx, std::abs(a.J.val[k]));
      a.scale[r] = 1.0 / std::max(1.0, mx);
    }
  }

  Eigen::VectorXd C;
  a.residuals(y, C);
  for (int i = 0; i < a.m_ineq; ++i)
    y[a.n + i] = std::max(0.0, -a.scale[a.m_eq + i] * a.raw[a.m_eq + i]);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(a.m);
  if (warm_lambda && warm_lambda->size() == a.m) lambda = *warm_lambda;
  double mu = opts.mu0;

  Eigen::VectorXd g(a.n_all), gx;
  auto merit = [&](const Eigen::VectorXd& yy) {
    a.residuals(yy, C);
    return p.objective(yy.head(a.n)) + lambda.dot(C) + 0.5 * mu * C.squaredNorm();
  };
  auto gradient = [&](const Eigen::VectorXd& yy) {
    p.objective_gradient(yy.head(a.n), gx);
    g.setZero();
    g.head(a.n) = gx;
    a.jacobian(yy);
    for (int r = 0; r < a.m; ++r) {
      double w = (lambda[r] + mu * C[r]) * a.scale[r];
      for (int k = a.J.row_ptr[r]; k < a.J.row_ptr[r + 1]; ++k)
        g[a.J.col[k]] += w * a.J.val[k];
    }
    for (int i = 0; i < a.m_ineq; ++i)
      g[a.n + i] += lambda[a.m_eq + i] + mu * C[a.m_eq + i];
  };
  auto clamp = [&](Eigen::VectorXd& yy) { yy = yy.cwiseMax(a.lo).cwiseMin(a.hi); };
  auto pg_norm = [&](const Eigen::VectorXd& yy, const Eigen::VectorXd& gg) {
    double nrm = 0;
    for (int i = 0; i < a.n_all; ++i) {
      double step = yy[i] - std::clamp(yy[i] - gg[i], a.lo[i], a.hi[i]);
      nrm = std::max(nrm, std::abs(step));
    }
    return nrm;
  };

  std::vector<char> active(a.n_all, 0);
  std::vector<int> free_of(a.n_all, -1);
  auto mark_active = [&](const Eigen::VectorXd& yy, const Eigen::VectorXd& gg) -> int {
    int nf = 0;
    for (int i = 0; i < a.n_all; ++i) {
      bool at_lo = yy[i] <= a.lo[i] + 1e-12 && gg[i] > 0;
      bool at_hi = yy[i] >= a.hi[i] - 1e-12 && gg[i] < 0;
      active[i] = (at_lo || at_hi || a.lo[i] == a.hi[i]) ? 1 : 0;
      free_of[i] = active[i] ? -1 : nf++;
    }
    return nf;
  };

  AlResult out;
  long total_inner = 0;
  double omega = 1e-2, eta = 1e-2;
  const double omega_min = std::max(opts.tol, 1e-10), eta_min = opts.feas_tol;

  double fmerit = merit(y);
  double prev_outer_obj = std::numeric_limits<double>::infinity();
  int stall_outers = 0;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    out.outer_iters = outer + 1;
    gradient(y);

    // ---- inner: projected Newton with direct sparse solves ----
    int inner = 0;
    const int max_newton = std::min(opts.max_inner, 200);
    double stag_ref = fmerit;
    int stag_count = 0;
    for (; inner < max_newton && total_inner < opts.max_total_inner; ++inner, ++total_inner) {
      double pg = pg_norm(y, g);
      double gscale_inner = 1.0 + g.lpNorm<Eigen::Infinity>() * 1e-3;
      if (pg <= omega * gscale_inner) break;
      if (fmerit < stag_ref - 1e-14 * (1.0 + std::abs(stag_ref))) {
        stag_ref = fmerit;
        stag_count = 0;
      } else if (++stag_count > 6) {
        break;
      }
      int nf = mark_active(y, g);
      if (nf == 0) break;

      SpMat Js = a.scaled_jacobian_free(free_of, nf);
      SpMat H = a.quad_hessian_free(free_of, nf);
      SpMat JtJ = SpMat(Js.transpose()) * Js;
      H += mu * JtJ;
      double diag_max = 1e-12;
      for (int k = 0; k < H.outerSize(); ++k)
        for (SpMat::InnerIterator it(H, k); it; ++it)
          if (it.row() == it.col()) diag_max = std::max(diag_max, it.value());
      double delta = 1e-10 * diag_max;
      SpMat I(nf, nf);
      I.setIdentity();
      H += delta * I;

      Eigen::VectorXd g_free(nf);
      for (int i = 0; i < a.n_all; ++i)
        if (free_of[i] >= 0) g_free[free_of[i]] = g[i];

      Eigen::SimplicialLDLT<SpMat> ldlt(H);
      Eigen::VectorXd d_free;
      if (ldlt.info() == Eigen::Success) {
        d_free = ldlt.solve(-g_free);
      } else {
        d_free = -g_free;
      }
      if (!d_free.allFinite()) d_free = -g_free;

      Eigen::VectorXd d = Eigen::VectorXd::Zero(a.n_all);
      for (int i = 0; i < a.n_all; ++i)
        if (free_of[i] >= 0) d[i] = d_free[free_of[i]];
      double gd = g.dot(d);
      if (gd >= -1e-300) {
        for (int i = 0; i < a.n_all; ++i) d[i] = free_of[i] >= 0 ? -g[i] : 0.0;
        gd = g.dot(d);
        if (gd >= 0) break;
      }

      double step = 1.0;
      Eigen::VectorXd y_new;
      double f_new = fmerit;
      bool ok = false;
      for (int ls = 0; ls < 50; ++ls) {
        y_new = y + step * d;
        clamp(y_new);
        double pred = g.dot(y_new - y);
        if (pred >= 0) {
          step *= 0.5;
          continue;
        }
        f_new = merit(y_new);
        if (f_new <= fmerit + 1e-4 * pred) {
          ok = true;
          break;
        }
        if (std::abs(pred) <= 1e-15 * (1.0 + std::abs(fmerit))) break;
        step *= 0.5;
      }
      if (!ok) break;
      y = std::move(y_new);
      fmerit = f_new;
      a.residuals(y, C);
      gradient(y);
    }
    if (opts.record_merit) out.merit_trace.push_back(fmerit);

    // ---- multiplier / penalty update ----
    a.residuals(y, C);
    double viol = a.violation_scaled();
    gradient(y);
    double pg = pg_norm(y, g);
    bool feas_ok = viol <= std::max(eta, eta_min);

    p.objective_gradient(y.head(a.n), gx);
    double gscale = std::max(1.0, gx.lpNorm<Eigen::Infinity>());
    double obj_now = p.objective(y.head(a.n));
    if (opts.verbose)
      std::printf("AL outer %d: inner %d pg %.3e viol %.3e mu %.1e omega %.1e obj %.10g\n",
                  outer, inner, pg, viol, mu, omega, obj_now);
    if (viol <= opts.feas_tol && pg <= opts.tol * gscale) {
      out.converged = true;
      break;
    }
    if (viol <= opts.feas_tol &&
        std::abs(obj_now - prev_outer_obj) <= 1e-12 * (1.0 + std::abs(obj_now))) {
      if (++stall_outers >= 2 && pg <= 1e-3 * gscale) {
        out.converged = true;
        break;
      }
    } else {
      stall_outers = 0;
    }
    prev_outer_obj = obj_now;

    if (feas_ok) {
      // least-squares multiplier estimate on the free set:
      //   min_l || J_free^T l + grad f_free ||
      int nf = mark_active(y, g);
      if (nf > 0) {
        SpMat Js = a.scaled_jacobian_free(free_of, nf);
        Eigen::VectorXd gf(nf);
        Eigen::VectorXd gfull = Eigen::VectorXd::Zero(a.n_all);
        gfull.head(a.n) = gx;
        for (int i = 0; i < a.n_all; ++i)
          if (free_of[i] >= 0) gf[free_of[i]] = gfull[i];
        SpMat A = Js * SpMat(Js.transpose());
        double dmax = 1e-12;
        for (int k = 0; k < A.outerSize(); ++k)
          for (SpMat::InnerIterator it(A, k); it; ++it)
            if (it.row() == it.col()) dmax = std::max(dmax, it.value());
        SpMat I(a.m, a.m);
        I.setIdentity();
        A += (1e-12 * dmax) * I;
        Eigen::SimplicialLDLT<SpMat> ldlt(A);
        if (ldlt.info() == Eigen::Success) {
          Eigen::VectorXd rhs = -(Js * gf);
          Eigen::VectorXd l = ldlt.solve(rhs);
          if (l.allFinite() && l.lpNorm<Eigen::Infinity>() < 1e12) lambda = l;
          else lambda += mu * C;
        } else {
          lambda += mu * C;
        }
      } else {
        lambda += mu * C;
      }
      eta = std::max(eta_min, eta * 0.1);
      omega = std::max(omega_min, omega * 0.1);
    } else if (inner < max_newton) {
      mu = std::min(opts.mu_max, mu * 10.0);
      omega = std::max(omega_min, omega * 0.5);
    }
    fmerit = merit(y);
    if (total_inner >= opts.max_total_inner) break;
  }
  out.inner_iters = total_inner;

  // ---- crossover: Newton-KKT refinement on the identified active set ----
  {
    for (int round = 0; round < 6; ++round) {
      a.residuals(y, C);
      gradient(y);
      int nf = mark_active(y, g);
      if (nf == 0) break;
      SpMat Js = a.scaled_jacobian_free(free_of, nf);
      SpMat Q = a.quad_hessian_free(free_of, nf);
      double qmax = 1e-8;
      for (int k = 0; k < Q.outerSize(); ++k)
        for (SpMat::InnerIterator it(Q, k); it; ++it)
          if (it.row() == it.col()) qmax = std::max(qmax, it.value());
      const double d_reg = 1e-10 * qmax, e_reg = 1e-11;

      std::vector<Triplet> trips;
      for (int k = 0; k < Q.outerSize(); ++k)
        for (SpMat::InnerIterator it(Q, k); it; ++it)
          trips.push_back({(int)it.row(), (int)it.col(), it.value()});
      for (int i = 0; i < nf; ++i) trips.push_back({i, i, d_reg});
      for (int k = 0; k < Js.outerSize(); ++k)
        for (SpMat::InnerIterator it(Js, k); it; ++it) {
          trips.push_back({nf + (int)it.row(), (int)it.col(), it.value()});
          trips.push_back({(int)it.col(), nf + (int)it.row(), it.value()});
        }
      for (int r = 0; r < a.m; ++r) trips.push_back({nf + r, nf + r, -e_reg});
      SpMat K(nf + a.m, nf + a.m);
      K.setFromTriplets(trips.begin(), trips.end());

      Eigen::VectorXd rhs(nf + a.m);
      Eigen::VectorXd gfull = Eigen::VectorXd::Zero(a.n_all);
      p.objective_gradient(y.head(a.n), gx);
      gfull.head(a.n) = gx;
      for (int i = 0; i < a.n_all; ++i)
        if (free_of[i] >= 0) rhs[free_of[i]] = -gfull[i];
      rhs.tail(a.m) = -C;

      Eigen::SimplicialLDLT<SpMat> ldlt(K);
      if (ldlt.info() != Eigen::Success) break;
      Eigen::VectorXd sol = ldlt.solve(rhs);
      if (!sol.allFinite()) break;

      Eigen::VectorXd y_new = y;
      for (int i = 0; i < a.n_all; ++i)
        if (free_of[i] >= 0) y_new[i] += sol[free_of[i]];
      clamp(y_new);
      double step_norm = (y_new - y).lpNorm<Eigen::Infinity>();
      // reject steps that blow up the violation
      Eigen::VectorXd y_keep = y;
      double viol_before;
      {
        a.residuals(y, C);
        viol_before = a.violation_scaled();
      }
      a.residuals(y_new, C);
      double viol_after = a.violation_scaled();
      if (viol_after > std::max(10.0 * viol_before, 1e-8)) {
        y = y_keep;
        a.residuals(y, C);
        break;
      }
      y = y_new;
      lambda = sol.tail(a.m);
      if (step_norm < 1e-12) break;
    }
    fmerit = merit(y);
  }

  // ---- feasibility polish: least-norm Newton steps onto the constraints ----
  if (opts.do_polish) {
    Eigen::VectorXd best_y = y;
    a.residuals(y, C);
    double best_viol = a.violation();
    std::vector<int> all_free(a.n_all);
    for (int it = 0; it < 12 && best_viol > opts.polish_tol; ++it) {
      gradient(y);  // refresh jacobian at y
      int nf = 0;
      for (int i = 0; i < a.n_all; ++i) {
        bool pinned = a.lo[i] == a.hi[i];
        all_free[i] = pinned ? -1 : nf++;
      }
      SpMat Js = a.scaled_jacobian_free(all_free, nf);
      SpMat A = Js * SpMat(Js.transpose());
      double dmax = 1e-12;
      for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it2(A, k); it2; ++it2)
          if (it2.row() == it2.col()) dmax = std::max(dmax, it2.value());
      SpMat I(a.m, a.m);
      I.setIdentity();
      A += (1e-13 * dmax) * I;
      Eigen::SimplicialLDLT<SpMat> ldlt(A);
      if (ldlt.info() != Eigen::Success) break;
      Eigen::VectorXd u = ldlt.solve(-C);
      Eigen::VectorXd d_free = Js.transpose() * u;
      for (int i = 0; i < a.n_all; ++i)
        if (all_free[i] >= 0) y[i] += d_free[all_free[i]];
      clamp(y);
      a.residuals(y, C);
      double viol = a.violation();
      if (viol < best_viol * 0.999) {
        best_viol = viol;
        best_y = y;
      } else {
        break;
      }
    }
    y = best_y;
  }

  out.x = y.head(a.n);
  out.lambda = lambda;
  a.residuals(y, C);
  out.feasibility = a.violation();
  gradient(y);
  out.stationarity = pg_norm(y, g);
  out.objective = p.objective(out.x);
  if (!out.converged) {
    p.objective_gradient(out.x, gx);
    double tol_eff = opts.tol * std::max(1.0, gx.lpNorm<Eigen::Infinity>());
    out.converged =
        out.feasibility <= opts.feas_tol * 10 && out.stationarity <= tol_eff * 10;
  }
  return out;
}

}  // namespace desgn
