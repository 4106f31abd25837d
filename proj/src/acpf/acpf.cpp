#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <future>
#include <numbers>

#include "desgn/acpf.hpp"

namespace desgn {

double slack_angle(Phase p) {
  constexpr double two_thirds_pi = 2.0 * std::numbers::pi / 3.0;
  switch (p) {
    case Phase::A: return 0.0;
    case Phase::B: return -two_thirds_pi;
    case Phase::C: return two_thirds_pi;
  }
  return 0.0;
}

SystemState flat_start(const NodeMap& nodes, int T) {
  SystemState st;
  st.V = Eigen::MatrixXd::Ones(nodes.n, T);
  st.theta.resize(nodes.n, T);
  for (int k = 0; k < nodes.n; ++k)
    st.theta.row(k).setConstant(slack_angle(nodes.of_node[k].second));
  return st;
}

void bim_power(const YBus& yb, const SystemState& st, int t, Eigen::VectorXd& P,
               Eigen::VectorXd& Q) {
  const int n = yb.nodes.n;
  P.setZero(n);
  Q.setZero(n);
  for (int a = 0; a < n; ++a) {
    double va = st.V(a, t), tha = st.theta(a, t);
    double p = 0, q = 0;
    for (const auto& e : yb.y[a]) {
      double vb = st.V(e.node, t);
      double d = tha - st.theta(e.node, t);
      double cs = std::cos(d), sn = std::sin(d);
      p += vb * (e.g * cs + e.b * sn);
      q += vb * (e.g * sn - e.b * cs);
    }
    P[a] = va * p;
    Q[a] = va * q;
  }
}

double BimMismatch::max_abs() const {
  double m = 0;
  if (dP.size()) m = std::max(dP.cwiseAbs().maxCoeff(), dQ.cwiseAbs().maxCoeff());
  return m;
}

BimMismatch bim_residual(const SystemState& st, const YBus& yb,
                         const Eigen::MatrixXd& P_spec, const Eigen::MatrixXd& Q_spec) {
  BimMismatch mm;
  const int n = yb.nodes.n, T = st.T();
  mm.dP.resize(n, T);
  mm.dQ.resize(n, T);
  Eigen::VectorXd P(n), Q(n);
  for (int t = 0; t < T; ++t) {
    bim_power(yb, st, t, P, Q);
    mm.dP.col(t) = P_spec.col(t) - P;
    mm.dQ.col(t) = Q_spec.col(t) - Q;
  }
  return mm;
}

BranchFlow branch_flow(const SystemState& st, const NodeMap& nodes, const Branch& br,
                       int t, bool reverse) {
  using cd = std::complex<double>;
  int bus_i = reverse ? br.to : br.from;
  int bus_j = reverse ? br.from : br.to;
  BranchFlow out;
  std::array<cd, 3> vi{}, vj{};
  for (int ph = 0; ph < 3; ++ph) {
    int ni = nodes.node_of[bus_i][ph], nj = nodes.node_of[bus_j][ph];
    if (ni >= 0) vi[ph] = std::polar(st.V(ni, t), st.theta(ni, t));
    if (nj >= 0) vj[ph] = std::polar(st.V(nj, t), st.theta(nj, t));
  }
  for (int ph = 0; ph < 3; ++ph) {
    cd current(0, 0);
    for (int ps = 0; ps < 3; ++ps) {
      cd y(br.G(ph, ps), br.B(ph, ps));
      if (y == cd(0, 0)) continue;
      current += y * (vi[ps] - vj[ps]);
    }
    cd s = vi[ph] * std::conj(current);
    out.P[ph] = s.real();
    out.Q[ph] = s.imag();
  }
  return out;
}

Eigen::MatrixXd bim_jacobian(const YBus& yb, const SystemState& st, int t,
                             const std::vector<int>& free_nodes) {
  const int nf = static_cast<int>(free_nodes.size());
  std::vector<int> pos(yb.nodes.n, -1);
  for (int i = 0; i < nf; ++i) pos[free_nodes[i]] = i;

  // rows: [P residuals; Q residuals] of free nodes
  // cols: [theta; V] of free nodes
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * nf, 2 * nf);
  for (int r = 0; r < nf; ++r) {
    int a = free_nodes[r];
    double va = st.V(a, t), tha = st.theta(a, t);
    double sumP = 0, sumQ = 0;        // hold Sum_b vb*(...) terms
    double dP_dtha = 0, dQ_dtha = 0;  // off-diagonal contributions
    double gaa = 0, baa = 0;
    for (const auto& e : yb.y[a]) {
      double vb = st.V(e.node, t);
      double d = tha - st.theta(e.node, t);
      double cs = std::cos(d), sn = std::sin(d);
      double tp = vb * (e.g * cs + e.b * sn);   // toward P
      double tq = vb * (e.g * sn - e.b * cs);   // toward Q
      sumP += tp;
      sumQ += tq;
      if (e.node == a) {
        gaa = e.g;
        baa = e.b;
        continue;  // self term has no angle dependence
      }
      dP_dtha += va * (-vb * (e.g * sn - e.b * cs));
      dQ_dtha += va * (vb * (e.g * cs + e.b * sn));
      int cb = pos[e.node];
      if (cb >= 0) {
        // d/dtheta_b
        J(r, cb) = va * vb * (e.g * sn - e.b * cs);
        J(nf + r, cb) = -va * vb * (e.g * cs + e.b * sn);
        // d/dV_b
        J(r, nf + cb) = va * (e.g * cs + e.b * sn);
        J(nf + r, nf + cb) = va * (e.g * sn - e.b * cs);
      }
    }
    J(r, r) = dP_dtha;
    J(nf + r, r) = dQ_dtha;
    J(r, nf + r) = sumP + va * gaa;
    J(nf + r, nf + r) = sumQ - va * baa;
  }
  return J;
}

namespace {

struct SingleTpResult {
  bool converged = false;
  int iterations = 0;
  double mismatch = 0.0;
};

SingleTpResult newton_single(const YBus& yb, const std::vector<int>& free_nodes,
                             const Eigen::VectorXd& P_spec, const Eigen::VectorXd& Q_spec,
                             Eigen::Ref<Eigen::VectorXd> V, Eigen::Ref<Eigen::VectorXd> Th,
                             const NewtonOptions& opts) {
  const int nf = static_cast<int>(free_nodes.size());
  SingleTpResult res;
  if (nf == 0) {
    res.converged = true;
    return res;
  }

  SystemState st;
  st.V = V;
  st.theta = Th;

  auto mismatch = [&](Eigen::VectorXd& f) {
    Eigen::VectorXd P, Q;
    bim_power(yb, st, 0, P, Q);
    f.resize(2 * nf);
    for (int i = 0; i < nf; ++i) {
      f[i] = P_spec[free_nodes[i]] - P[free_nodes[i]];
      f[nf + i] = Q_spec[free_nodes[i]] - Q[free_nodes[i]];
    }
  };

  Eigen::VectorXd f;
  mismatch(f);
  double norm = f.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < opts.max_iter && norm > opts.tol; ++it) {
    Eigen::MatrixXd J = bim_jacobian(yb, st, 0, free_nodes);
    // residual = spec - calc, so J_resid = -J; solve J dx = f directly.
    Eigen::VectorXd dx = J.partialPivLu().solve(f);
    if (!dx.allFinite()) break;

    double step = 1.0;
    Eigen::VectorXd v0(nf), th0(nf);
    for (int i = 0; i < nf; ++i) {
      th0[i] = st.theta(free_nodes[i], 0);
      v0[i] = st.V(free_nodes[i], 0);
    }
    double new_norm = norm;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (int i = 0; i < nf; ++i) {
        st.theta(free_nodes[i], 0) = th0[i] + step * dx[i];
        st.V(free_nodes[i], 0) = std::max(1e-6, v0[i] + step * dx[nf + i]);
      }
      mismatch(f);
      new_norm = f.lpNorm<Eigen::Infinity>();
      if (new_norm < norm || norm <= opts.tol) break;
      step *= 0.5;
    }
    norm = new_norm;
    res.iterations = it + 1;
  }

  V = st.V.col(0);
  Th = st.theta.col(0);
  res.mismatch = norm;
  res.converged = norm <= opts.tol;
  return res;
}

}  // namespace

NewtonReport newton_pf(const YBus& yb, const std::vector<int>& slack_nodes,
                       const Eigen::MatrixXd& P_spec, const Eigen::MatrixXd& Q_spec,
                       SystemState& state, const NewtonOptions& opts) {
  const int T = state.T();
  std::vector<char> is_slack(yb.nodes.n, 0);
  for (int s : slack_nodes) is_slack[s] = 1;
  std::vector<int> free_nodes;
  for (int k = 0; k < yb.nodes.n; ++k)
    if (!is_slack[k]) free_nodes.push_back(k);

  std::vector<SingleTpResult> results(T);
  auto solve_t = [&](int t) {
    Eigen::VectorXd V = state.V.col(t), Th = state.theta.col(t);
    results[t] = newton_single(yb, free_nodes, P_spec.col(t), Q_spec.col(t), V, Th, opts);
    state.V.col(t) = V;
    state.theta.col(t) = Th;
  };

  if (opts.parallel && T > 1) {
    std::vector<std::future<void>> jobs;
    for (int t = 0; t < T; ++t) jobs.push_back(std::async(std::launch::async, solve_t, t));
    for (auto& j : jobs) j.get();
  } else {
    for (int t = 0; t < T; ++t) solve_t(t);
  }

  NewtonReport rep;
  rep.converged = true;
  for (int t = 0; t < T; ++t) {
    rep.worst_iterations = std::max(rep.worst_iterations, results[t].iterations);
    rep.worst_mismatch = std::max(rep.worst_mismatch, results[t].mismatch);
    if (!results[t].converged) {
      rep.converged = false;
      rep.failed_timepoints.push_back(t);
    }
  }
  return rep;
}

ViolationReport violation_stats(const SystemState& st, const NodeMap& nodes,
                                double v_max, double v_min) {
  if (v_max <= 0 || v_min <= 0) throw ModelError("voltage limits must be positive");
  ViolationReport rep;
  const int n = st.n_nodes(), T = st.T();
  double up_sum = 0, lo_sum = 0;
  int up_cnt = 0, lo_cnt = 0;
  for (int k = 0; k < n; ++k)
    for (int t = 0; t < T; ++t) {
      double v = st.V(k, t);
      double up = std::max(0.0, (v - v_max) / v_max) * 100.0;
      double lo = std::max(0.0, (v_min - v) / v_min) * 100.0;
      rep.entries.push_back(
          {nodes.of_node[k].first, nodes.of_node[k].second, t, v, up, lo});
      up_sum += up;
      lo_sum += lo;
      if (up > 0) ++up_cnt;
      if (lo > 0) ++lo_cnt;
      rep.upper.max_violation_pct = std::max(rep.upper.max_violation_pct, up);
      rep.lower.max_violation_pct = std::max(rep.lower.max_violation_pct, lo);
    }
  int total = n * T;
  if (total > 0) {
    rep.upper.avg_violation_pct = up_sum / total;
    rep.lower.avg_violation_pct = lo_sum / total;
    rep.upper.pct_violated = 100.0 * up_cnt / total;
    rep.lower.pct_violated = 100.0 * lo_cnt / total;
  }
  return rep;
}

}  // namespace desgn
