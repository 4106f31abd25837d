#include "desgn/stage_nlp.hpp"

#include <cmath>

namespace desgn {

bool family_dropped_in_comp(const std::string& family) {
  return family == "Grid Electricity Purchase" || family == "Grid Electricity Sale" ||
         family == "Battery Charge BigM" || family == "Battery Discharge BigM";
}

SystemState StageNlp::state_from(const Eigen::VectorXd& x) const {
  SystemState st;
  st.V.resize(n_nodes, T);
  st.theta.resize(n_nodes, T);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < n_nodes; ++k) {
      st.V(k, t) = x[v_index(k, t)];
      st.theta(k, t) = x[th_index(k, t)];
    }
  return st;
}

std::vector<double> StageNlp::des_solution(size_t load_idx, const Eigen::VectorXd& x) const {
  int base = des_base[load_idx];
  int len = (load_idx + 1 < des_base.size() ? des_base[load_idx + 1] : net_base) - base;
  std::vector<double> out(len);
  for (int i = 0; i < len; ++i) out[i] = x[base + i];
  return out;
}

StageNlp build_central_stage(const Network& net, const std::vector<DesProblem>& des,
                             const SitingResult& milp, const StageOptions& opts) {
  StageNlp st;
  st.yb = YBus::build(net);
  st.n_nodes = st.yb.nodes.n;
  st.T = des.empty() ? 0 : des[0].T();
  st.stride_t = 2 * st.n_nodes;

  NlpProblem& p = st.prob;
  int n = 0;
  for (const auto& d : des) {
    st.des_base.push_back(n);
    n += d.n_vars;
  }
  st.net_base = n;
  n += st.stride_t * st.T;
  p.n = n;
  p.lb.resize(n);
  p.ub.resize(n);
  p.c_lin = Eigen::VectorXd::Zero(n);

  // technology variables and objective
  for (size_t li = 0; li < des.size(); ++li) {
    const DesProblem& d = des[li];
    int base = st.des_base[li];
    for (int i = 0; i < d.n_vars; ++i) {
      p.lb[base + i] = d.lb[i];
      p.ub[base + i] = d.ub[i];
      p.c_lin[base + i] = opts.scale * d.obj[i];
    }
    // binaries frozen at stage-one values; in the complementarity stage the
    // dispatch switches are unfrozen but appear in no remaining row
    for (int i = 0; i < d.n_vars; ++i) {
      if (!d.is_binary[i]) continue;
      double v = std::round(milp.x[li][i]);
      p.lb[base + i] = v;
      p.ub[base + i] = v;
    }
  }

  // voltage variables
  for (int t = 0; t < st.T; ++t) {
    for (int k = 0; k < st.n_nodes; ++k) {
      auto [bus, phase] = st.yb.nodes.of_node[k];
      bool slackbus = (bus == net.slack);
      int vi = st.v_index(k, t), ti = st.th_index(k, t);
      if (slackbus) {
        p.lb[vi] = p.ub[vi] = 1.0;
        p.lb[ti] = p.ub[ti] = slack_angle(phase);
      } else {
        p.lb[vi] = opts.v_min;
        p.ub[vi] = opts.v_max;
        p.lb[ti] = -std::numbers::pi;
        p.ub[ti] = std::numbers::pi;
      }
    }
  }

  // technology rows
  for (size_t li = 0; li < des.size(); ++li) {
    const DesProblem& d = des[li];
    int base = st.des_base[li];
    std::vector<LinearBlock::Row> eq_rows, ineq_rows;
    for (const auto& r : d.rows) {
      if (opts.comp_stage && family_dropped_in_comp(r.family)) continue;
      LinearBlock::Row lr;
      lr.rhs = r.rhs;
      lr.terms.reserve(r.terms.size());
      double flip = (r.sense == RowSense::Ge) ? -1.0 : 1.0;
      for (auto [i, c] : r.terms) lr.terms.push_back({base + i, flip * c});
      lr.rhs *= flip;
      if (r.sense == RowSense::Eq) eq_rows.push_back(std::move(lr));
      else ineq_rows.push_back(std::move(lr));
    }
    if (!eq_rows.empty()) p.eq.push_back(std::make_unique<LinearBlock>(std::move(eq_rows)));
    if (!ineq_rows.empty())
      p.ineq.push_back(std::make_unique<LinearBlock>(std::move(ineq_rows)));
  }

  // power balance at every non-slack node
  std::vector<int> free_nodes;
  for (int k = 0; k < st.n_nodes; ++k)
    if (st.yb.nodes.of_node[k].first != net.slack) free_nodes.push_back(k);
  auto bim = std::make_unique<BimBlock>(st.yb, free_nodes, st.net_base, st.stride_t, st.T);
  for (size_t li = 0; li < des.size(); ++li) {
    const DesProblem& d = des[li];
    int base = st.des_base[li];
    int node = st.yb.nodes.node_of[d.load.bus][static_cast<int>(d.load.phase)];
    if (node < 0) throw ModelError("load phase missing from the node map");
    double k_inj = 1e-3 / (net.s_base_mva * d.tl.dt_hours);
    for (int t = 0; t < st.T; ++t) {
      BimBlock::InjTerm pterm;
      pterm.terms = {{base + d.var(VarFam::EPvSold, t), k_inj},
                     {base + d.var(VarFam::EGrid, t), -k_inj}};
      bim->set_p_injection(node, t, std::move(pterm));
      BimBlock::InjTerm qterm;
      qterm.constant = reactive_injection_pu(d.load.elec_profile[t], d.cat.pf,
                                             net.s_base_mva, d.tl.dt_hours);
      bim->set_q_injection(node, t, std::move(qterm));
    }
  }
  st.bim = bim.get();
  p.eq.push_back(std::move(bim));

  // complementarity products
  if (opts.comp_stage) {
    std::vector<std::pair<int, int>> pairs;
    for (size_t li = 0; li < des.size(); ++li) {
      const DesProblem& d = des[li];
      int base = st.des_base[li];
      for (int t = 0; t < d.T(); ++t) {
        pairs.push_back({base + d.var(VarFam::EGrid, t), base + d.var(VarFam::EPvSold, t)});
        for (int c = 0; c < d.nC(); ++c)
          pairs.push_back({base + d.var(VarFam::EBattCharge, t, c),
                           base + d.var(VarFam::EBattDischarge, t, c)});
      }
    }
    auto prod = std::make_unique<ProductBlock>(std::move(pairs), 1.0);
    st.products = prod.get();
    p.ineq.push_back(std::move(prod));
  }

  return st;
}

Eigen::VectorXd stage_start_point(const StageNlp& st, const std::vector<DesProblem>& des,
                                  const SitingResult& milp) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(st.prob.n);
  for (size_t li = 0; li < des.size(); ++li)
    for (int i = 0; i < des[li].n_vars; ++i) x[st.des_base[li] + i] = milp.x[li][i];
  for (int t = 0; t < st.T; ++t)
    for (int k = 0; k < st.n_nodes; ++k) {
      x[st.v_index(k, t)] = 1.0;
      x[st.th_index(k, t)] = slack_angle(st.yb.nodes.of_node[k].second);
    }
  return x;
}

void stage_injections(const Network& net, const NodeMap& nodes,
                      const std::vector<DesProblem>& des,
                      const std::vector<std::vector<double>>& xs, Eigen::MatrixXd& P,
                      Eigen::MatrixXd& Q) {
  int T = des.empty() ? 0 : des[0].T();
  P = Eigen::MatrixXd::Zero(nodes.n, T);
  Q = Eigen::MatrixXd::Zero(nodes.n, T);
  for (size_t li = 0; li < des.size(); ++li) {
    Injections inj = compute_injections(xs[li], des[li], net.s_base_mva);
    for (int ph = 0; ph < 3; ++ph) {
      int node = nodes.node_of[des[li].load.bus][ph];
      if (node < 0) continue;
      for (int t = 0; t < T; ++t) {
        P(node, t) += inj.P[ph][t];
        Q(node, t) += inj.Q[ph][t];
      }
    }
  }
}

}  // namespace desgn
