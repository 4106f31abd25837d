#pragma once

#include <Eigen/Core>
#include <vector>

#include "desgn/network.hpp"

namespace desgn {

/// Compact numbering of (bus, phase) pairs; absent phases get no node.
struct NodeMap {
  std::vector<std::array<int, 3>> node_of;     // [bus][phase] -> node or -1
  std::vector<std::pair<int, Phase>> of_node;  // node -> (bus, phase)
  int n = 0;

  static NodeMap build(const Network& net);
  static NodeMap build_subset(const Network& net, const std::vector<int>& buses);
};

struct YEntry {
  int node = -1;  // column node
  double g = 0.0;
  double b = 0.0;
};

/// Nodal admittance in adjacency form: y[a] lists every node b (including a
/// itself) with a nonzero Y_ab block entry.
struct YBus {
  NodeMap nodes;
  std::vector<std::vector<YEntry>> y;

  static YBus build(const Network& net);
  static YBus build_subset(const Network& net, const std::vector<int>& buses,
                           const std::vector<int>& branch_ids);
};

/// Polar voltage state per node and timepoint.
struct SystemState {
  Eigen::MatrixXd V;      // n_nodes x T, p.u.
  Eigen::MatrixXd theta;  // n_nodes x T, radians

  int n_nodes() const { return static_cast<int>(V.rows()); }
  int T() const { return static_cast<int>(V.cols()); }
};

/// Slack reference angles: 0, -2pi/3, +2pi/3 for phases A, B, C.
double slack_angle(Phase p);

/// Flat start: 1.0 p.u. everywhere, balanced angles.
SystemState flat_start(const NodeMap& nodes, int T);

/// Real/reactive nodal power computed from the state (the BIM sums).
void bim_power(const YBus& yb, const SystemState& st, int t, Eigen::VectorXd& P,
               Eigen::VectorXd& Q);

/// Specified-minus-calculated mismatch at every node/timepoint.
struct BimMismatch {
  Eigen::MatrixXd dP, dQ;  // n_nodes x T
  double max_abs() const;
};

BimMismatch bim_residual(const SystemState& st, const YBus& yb,
                         const Eigen::MatrixXd& P_spec, const Eigen::MatrixXd& Q_spec);

/// Branch power flow leaving bus `from` toward bus `to` for one timepoint,
/// per phase (absent phases zero).
struct BranchFlow {
  Eigen::Vector3d P = Eigen::Vector3d::Zero();
  Eigen::Vector3d Q = Eigen::Vector3d::Zero();
};

BranchFlow branch_flow(const SystemState& st, const NodeMap& nodes, const Branch& br,
                       int t, bool reverse = false);

struct NewtonOptions {
  double tol = 1e-10;       // infinity norm of the mismatch
  int max_iter = 50;
  int max_halvings = 6;     // step damping when the mismatch grows
  bool parallel = true;     // solve timepoints on worker threads
};

struct NewtonReport {
  bool converged = false;
  int worst_iterations = 0;
  double worst_mismatch = 0.0;
  std::vector<int> failed_timepoints;
};

/// Newton-Raphson on the BIM equations; slack nodes held fixed. Timepoints
/// decouple and run in parallel.
NewtonReport newton_pf(const YBus& yb, const std::vector<int>& slack_nodes,
                       const Eigen::MatrixXd& P_spec, const Eigen::MatrixXd& Q_spec,
                       SystemState& state, const NewtonOptions& opts = {});

/// Analytic Jacobian of the mismatch for one timepoint, ordered
/// [dtheta; dV] over non-slack nodes. Exposed for verification.
Eigen::MatrixXd bim_jacobian(const YBus& yb, const SystemState& st, int t,
                             const std::vector<int>& free_nodes);

struct ViolationStats {
  double avg_violation_pct = 0.0;   // includes zero-violation entries
  double max_violation_pct = 0.0;
  double pct_violated = 0.0;
};

struct ViolationEntry {
  int bus;
  Phase phase;
  int t;
  double v_pu;
  double upper_pct;
  double lower_pct;
};

struct ViolationReport {
  ViolationStats upper, lower;
  std::vector<ViolationEntry> entries;  // one per node/timepoint
};

ViolationReport violation_stats(const SystemState& st, const NodeMap& nodes,
                                double v_max, double v_min);

}  // namespace desgn
