#pragma once

#include "desgn/nlp_problem.hpp"
#include "desgn/siting.hpp"

namespace desgn {

struct StageOptions {
  double v_max = 1.05;
  double v_min = 0.95;
  double scale = 1.0;   // multiplier on the cost objective
  bool comp_stage = false;
};

/// A built network-constrained stage problem plus its variable layout.
struct StageNlp {
  NlpProblem prob;
  std::vector<int> des_base;  // offset of each load's block
  int net_base = 0;
  int stride_t = 0;  // variables per timepoint in the network segment
  int n_nodes = 0;
  int T = 0;
  YBus yb;
  BimBlock* bim = nullptr;          // owned by prob.eq
  ProductBlock* products = nullptr; // owned by prob.ineq (comp stage only)

  int v_index(int node, int t) const { return net_base + t * stride_t + node; }
  int th_index(int node, int t) const { return net_base + t * stride_t + n_nodes + node; }

  SystemState state_from(const Eigen::VectorXd& x) const;
  std::vector<double> des_solution(size_t load_idx, const Eigen::VectorXd& x) const;
};

/// Families whose big-M switch rows are replaced by products in the
/// complementarity stage.
bool family_dropped_in_comp(const std::string& family);

/// Assembles the whole-network stage problem: technology rows per load with
/// binaries frozen at their stage-one values, power-balance rows at every
/// non-slack node/phase/timepoint, voltage magnitude bounds, slack pinned.
/// In the complementarity stage the binary switch rows are replaced by
/// product constraints over (grid import, PV export) and battery
/// (charge, discharge).
StageNlp build_central_stage(const Network& net, const std::vector<DesProblem>& des,
                             const SitingResult& milp, const StageOptions& opts);

/// Start point: technology schedule from the stage-one solution, flat
/// voltages elsewhere.
Eigen::VectorXd stage_start_point(const StageNlp& st, const std::vector<DesProblem>& des,
                                  const SitingResult& milp);

/// Nodal injection matrices (n_nodes x T) from per-load solutions.
void stage_injections(const Network& net, const NodeMap& nodes,
                      const std::vector<DesProblem>& des,
                      const std::vector<std::vector<double>>& xs, Eigen::MatrixXd& P,
                      Eigen::MatrixXd& Q);

}  // namespace desgn
