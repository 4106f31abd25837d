#include "desgn/nlp_problem.hpp"

#include <cmath>

namespace desgn {

void LinearBlock::eval(const Eigen::VectorXd& x, double* res) const {
  for (size_t r = 0; r < rows_.size(); ++r) {
    double a = -rows_[r].rhs;
    for (auto [i, c] : rows_[r].terms) a += c * x[i];
    res[r] = a;
  }
}

void LinearBlock::jac(const Eigen::VectorXd&, JacRows& out) const {
  for (const auto& row : rows_) {
    for (auto [i, c] : row.terms) out.entry(i, c);
    out.end_row();
  }
}

BimBlock::BimBlock(YBus yb, std::vector<int> free_nodes, int net_base, int stride, int T)
    : yb_(std::move(yb)),
      free_nodes_(std::move(free_nodes)),
      net_base_(net_base),
      stride_(stride),
      T_(T),
      n_nodes_(yb_.nodes.n) {
  inj_p_.resize(static_cast<size_t>(n_nodes_) * T_);
  inj_q_.resize(static_cast<size_t>(n_nodes_) * T_);
}

void BimBlock::set_p_injection(int node, int t, InjTerm term) {
  inj_p_[static_cast<size_t>(node) * T_ + t] = std::move(term);
}

void BimBlock::set_q_injection(int node, int t, InjTerm term) {
  inj_q_[static_cast<size_t>(node) * T_ + t] = std::move(term);
}

void BimBlock::eval(const Eigen::VectorXd& x, double* res) const {
  int r = 0;
  for (int t = 0; t < T_; ++t) {
    for (int a : free_nodes_) {
      double va = x[v_index(a, t)], tha = x[th_index(a, t)];
      double sp = 0, sq = 0;
      for (const auto& e : yb_.y[a]) {
        double vb = x[v_index(e.node, t)];
        double d = tha - x[th_index(e.node, t)];
        double cs = std::cos(d), sn = std::sin(d);
        sp += vb * (e.g * cs + e.b * sn);
        sq += vb * (e.g * sn - e.b * cs);
      }
      const InjTerm& ip = inj_p_[static_cast<size_t>(a) * T_ + t];
      const InjTerm& iq = inj_q_[static_cast<size_t>(a) * T_ + t];
      double pinj = ip.constant, qinj = iq.constant;
      for (auto [i, c] : ip.terms) pinj += c * x[i];
      for (auto [i, c] : iq.terms) qinj += c * x[i];
      res[r++] = va * sp - pinj;
      res[r++] = va * sq - qinj;
    }
  }
}

void BimBlock::jac(const Eigen::VectorXd& x, JacRows& out) const {
  for (int t = 0; t < T_; ++t) {
    for (int a : free_nodes_) {
      double va = x[v_index(a, t)], tha = x[th_index(a, t)];
      // First pass: accumulate sums for the diagonal entries.
      double sp = 0, sq = 0, dp_dth = 0, dq_dth = 0, gaa = 0, baa = 0;
      for (const auto& e : yb_.y[a]) {
        double vb = x[v_index(e.node, t)];
        double d = tha - x[th_index(e.node, t)];
        double cs = std::cos(d), sn = std::sin(d);
        sp += vb * (e.g * cs + e.b * sn);
        sq += vb * (e.g * sn - e.b * cs);
        if (e.node == a) {
          gaa = e.g;
          baa = e.b;
          continue;
        }
        dp_dth += va * vb * (-e.g * sn + e.b * cs);
        dq_dth += va * vb * (e.g * cs + e.b * sn);
      }
      // P row
      out.entry(v_index(a, t), sp + va * gaa);
      out.entry(th_index(a, t), dp_dth);
      for (const auto& e : yb_.y[a]) {
        if (e.node == a) continue;
        double vb = x[v_index(e.node, t)];
        double d = tha - x[th_index(e.node, t)];
        double cs = std::cos(d), sn = std::sin(d);
        out.entry(v_index(e.node, t), va * (e.g * cs + e.b * sn));
        out.entry(th_index(e.node, t), va * vb * (e.g * sn - e.b * cs));
      }
      const InjTerm& ip = inj_p_[static_cast<size_t>(a) * T_ + t];
      for (auto [i, c] : ip.terms) out.entry(i, -c);
      out.end_row();
      // Q row
      out.entry(v_index(a, t), sq - va * baa);
      out.entry(th_index(a, t), dq_dth);
      for (const auto& e : yb_.y[a]) {
        if (e.node == a) continue;
        double vb = x[v_index(e.node, t)];
        double d = tha - x[th_index(e.node, t)];
        double cs = std::cos(d), sn = std::sin(d);
        out.entry(v_index(e.node, t), va * (e.g * sn - e.b * cs));
        out.entry(th_index(e.node, t), -va * vb * (e.g * cs + e.b * sn));
      }
      const InjTerm& iq = inj_q_[static_cast<size_t>(a) * T_ + t];
      for (auto [i, c] : iq.terms) out.entry(i, -c);
      out.end_row();
    }
  }
}

BranchFlowDefBlock::BranchFlowDefBlock(Eigen::Matrix3d G, Eigen::Matrix3d B,
                                       std::vector<int> phases)
    : G_(std::move(G)), B_(std::move(B)), phases_(std::move(phases)) {}

void BranchFlowDefBlock::eval(const Eigen::VectorXd& x, double* res) const {
  using cd = std::complex<double>;
  int r = 0;
  for (const auto& g : groups_) {
    std::array<cd, 3> vi{}, vj{};
    for (int ph = 0; ph < 3; ++ph) {
      if (g.from[ph].v >= 0) vi[ph] = std::polar(x[g.from[ph].v], x[g.from[ph].th]);
      if (g.to[ph].v >= 0) vj[ph] = std::polar(x[g.to[ph].v], x[g.to[ph].th]);
    }
    for (size_t k = 0; k < phases_.size(); ++k) {
      int ph = phases_[k];
      cd cur(0, 0);
      for (int ps = 0; ps < 3; ++ps) {
        cd y(G_(ph, ps), B_(ph, ps));
        if (y == cd(0, 0)) continue;
        cur += y * (vi[ps] - vj[ps]);
      }
      cd s = vi[ph] * std::conj(cur);
      res[r++] = x[g.pb[k]] - s.real();
      res[r++] = x[g.qb[k]] - s.imag();
    }
  }
}

void BranchFlowDefBlock::jac(const Eigen::VectorXd& x, JacRows& out) const {
  using cd = std::complex<double>;
  const cd jimag(0, 1);
  for (const auto& g : groups_) {
    std::array<cd, 3> vi{}, vj{};
    for (int ph = 0; ph < 3; ++ph) {
      if (g.from[ph].v >= 0) vi[ph] = std::polar(x[g.from[ph].v], x[g.from[ph].th]);
      if (g.to[ph].v >= 0) vj[ph] = std::polar(x[g.to[ph].v], x[g.to[ph].th]);
    }
    for (size_t k = 0; k < phases_.size(); ++k) {
      int ph = phases_[k];
      cd cur(0, 0);
      for (int ps = 0; ps < 3; ++ps) {
        cd y(G_(ph, ps), B_(ph, ps));
        if (y == cd(0, 0)) continue;
        cur += y * (vi[ps] - vj[ps]);
      }
      // s = vi[ph] * conj(cur); residual rows: pb - Re(s), qb - Im(s)
      // derivative of s wrt each voltage variable, then split re/im
      struct Entry {
        int var;
        cd ds;
      };
      std::vector<Entry> ents;
      for (int ps = 0; ps < 3; ++ps) {
        cd y = std::conj(cd(G_(ph, ps), B_(ph, ps)));
        bool self = (ps == ph);
        if (g.from[ps].v >= 0) {
          cd dvi = std::polar(1.0, x[g.from[ps].th]);          // dV~/dV
          cd dthi = jimag * vi[ps];                            // dV~/dtheta
          cd ds_v = vi[ph] * (y * std::conj(dvi));
          cd ds_th = vi[ph] * (y * std::conj(dthi));
          if (self) {
            ds_v += dvi * std::conj(cur);
            ds_th += dthi * std::conj(cur);
          }
          if (y != cd(0, 0) || self) {
            ents.push_back({g.from[ps].v, ds_v});
            ents.push_back({g.from[ps].th, ds_th});
          }
        }
        if (g.to[ps].v >= 0 && y != cd(0, 0)) {
          cd dvj = std::polar(1.0, x[g.to[ps].th]);
          cd dthj = jimag * vj[ps];
          ents.push_back({g.to[ps].v, vi[ph] * (-(y * std::conj(dvj)))});
          ents.push_back({g.to[ps].th, vi[ph] * (-(y * std::conj(dthj)))});
        }
      }
      // Pb row
      out.entry(g.pb[k], 1.0);
      for (const auto& e : ents) out.entry(e.var, -e.ds.real());
      out.end_row();
      // Qb row
      out.entry(g.qb[k], 1.0);
      for (const auto& e : ents) out.entry(e.var, -e.ds.imag());
      out.end_row();
    }
  }
}

void ProductBlock::eval(const Eigen::VectorXd& x, double* res) const {
  for (size_t k = 0; k < pairs_.size(); ++k)
    res[k] = x[pairs_[k].first] * x[pairs_[k].second] - eps_;
}

void ProductBlock::jac(const Eigen::VectorXd& x, JacRows& out) const {
  for (const auto& [u, v] : pairs_) {
    out.entry(u, x[v]);
    out.entry(v, x[u]);
    out.end_row();
  }
}

double ConsensusPenalty::value(const Eigen::VectorXd& x) const {
  double total = 0;
  for (const auto& r : rows) {
    double ax = 0;
    for (auto [i, c] : r.terms) ax += c * x[i];
    double d = ax - r.z;
    total += r.lambda * d + 0.5 * rho * d * d;
  }
  return total;
}

void ConsensusPenalty::add_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
  for (const auto& r : rows) {
    double ax = 0;
    for (auto [i, c] : r.terms) ax += c * x[i];
    double w = r.lambda + rho * (ax - r.z);
    for (auto [i, c] : r.terms) g[i] += c * w;
  }
}

double ConsensusPenalty::residual_inf(const Eigen::VectorXd& x) const {
  double m = 0;
  for (const auto& r : rows) {
    double ax = 0;
    for (auto [i, c] : r.terms) ax += c * x[i];
    m = std::max(m, std::abs(ax - r.z));
  }
  return m;
}

int NlpProblem::eq_rows() const {
  int m = 0;
  for (const auto& b : eq) m += b->rows();
  return m;
}

int NlpProblem::ineq_rows() const {
  int m = 0;
  for (const auto& b : ineq) m += b->rows();
  return m;
}

double NlpProblem::objective(const Eigen::VectorXd& x) const {
  double f = c_const + c_lin.dot(x);
  for (const auto& q : quad) {
    double ax = -q.target;
    for (auto [i, c] : q.terms) ax += c * x[i];
    f += 0.5 * q.weight * ax * ax;
  }
  if (consensus) f += consensus->value(x);
  return f;
}

void NlpProblem::objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
  g = c_lin;
  for (const auto& q : quad) {
    double ax = -q.target;
    for (auto [i, c] : q.terms) ax += c * x[i];
    double w = q.weight * ax;
    for (auto [i, c] : q.terms) g[i] += c * w;
  }
  if (consensus) consensus->add_gradient(x, g);
}

}  // namespace desgn
