#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "desgn/acpf.hpp"
#include "desgn/des_problem.hpp"

namespace desgn {

/// Sparse Jacobian under row-by-row construction (CSR).
struct JacRows {
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  void clear() {
    row_ptr.resize(1);
    col.clear();
    val.clear();
  }
  void entry(int c, double v) {
    col.push_back(c);
    val.push_back(v);
  }
  void end_row() { row_ptr.push_back(static_cast<int>(col.size())); }
  int rows() const { return static_cast<int>(row_ptr.size()) - 1; }
};

/// A group of constraint rows sharing one evaluation routine.
class Block {
 public:
  virtual ~Block() = default;
  virtual int rows() const = 0;
  virtual void eval(const Eigen::VectorXd& x, double* res) const = 0;
  /// Appends exactly rows() rows; entry order must not change between calls.
  virtual void jac(const Eigen::VectorXd& x, JacRows& out) const = 0;
  virtual bool linear() const { return false; }
};

/// Linear rows a.x (sense) b, stored as residual a.x - b. Inequalities are
/// normalised so that residual <= 0 is feasible.
class LinearBlock : public Block {
 public:
  struct Row {
    std::vector<std::pair<int, double>> terms;
    double rhs;
  };

  explicit LinearBlock(std::vector<Row> rows) : rows_(std::move(rows)) {}
  int rows() const override { return static_cast<int>(rows_.size()); }
  void eval(const Eigen::VectorXd& x, double* res) const override;
  void jac(const Eigen::VectorXd& x, JacRows& out) const override;
  bool linear() const override { return true; }

  const std::vector<Row>& data() const { return rows_; }

 private:
  std::vector<Row> rows_;
};

/// Power-balance residuals over a nodal admittance structure for a span of
/// timepoints: calc(V, theta) - injection(x) per (free node, t), P then Q
/// within each timepoint. Voltage variables live at
///   v = net_base + t*stride + node,  theta = v + n_nodes.
class BimBlock : public Block {
 public:
  struct InjTerm {
    std::vector<std::pair<int, double>> terms;  // DES variables
    double constant = 0.0;
  };

  BimBlock(YBus yb, std::vector<int> free_nodes, int net_base, int stride, int T);

  // Injection expressions default to zero; set per (node, t).
  void set_p_injection(int node, int t, InjTerm term);
  void set_q_injection(int node, int t, InjTerm term);

  int rows() const override { return 2 * static_cast<int>(free_nodes_.size()) * T_; }
  void eval(const Eigen::VectorXd& x, double* res) const override;
  void jac(const Eigen::VectorXd& x, JacRows& out) const override;

  int v_index(int node, int t) const { return net_base_ + t * stride_ + node; }
  int th_index(int node, int t) const { return net_base_ + t * stride_ + n_nodes_ + node; }
  const YBus& ybus() const { return yb_; }
  const std::vector<int>& free_nodes() const { return free_nodes_; }

 private:
  YBus yb_;
  std::vector<int> free_nodes_;
  int net_base_, stride_, T_, n_nodes_;
  std::vector<InjTerm> inj_p_, inj_q_;  // [node * T + t], nodes in yb numbering
};

/// Defining equations Pb - Re(...) = 0, Qb - Im(...) = 0 for one branch whose
/// endpoint voltages are problem variables.
class BranchFlowDefBlock : public Block {
 public:
  struct PhaseVars {
    int v = -1, th = -1;  // -1 when the phase is absent on the bus
  };

  BranchFlowDefBlock(Eigen::Matrix3d G, Eigen::Matrix3d B, std::vector<int> phases);

  struct RowGroup {                 // one timepoint
    std::array<PhaseVars, 3> from;  // endpoint voltage variable indices
    std::array<PhaseVars, 3> to;
    std::vector<int> pb;  // per present phase, same order as phases()
    std::vector<int> qb;
  };
  void add_timepoint(RowGroup g) { groups_.push_back(std::move(g)); }

  int rows() const override { return 2 * static_cast<int>(phases_.size() * groups_.size()); }
  void eval(const Eigen::VectorXd& x, double* res) const override;
  void jac(const Eigen::VectorXd& x, JacRows& out) const override;
  const std::vector<int>& phases() const { return phases_; }

 private:
  Eigen::Matrix3d G_, B_;
  std::vector<int> phases_;  // present phase indices
  std::vector<RowGroup> groups_;
};

/// Complementarity products u*v <= eps (inequality rows).
class ProductBlock : public Block {
 public:
  explicit ProductBlock(std::vector<std::pair<int, int>> pairs, double eps)
      : pairs_(std::move(pairs)), eps_(eps) {}

  int rows() const override { return static_cast<int>(pairs_.size()); }
  void eval(const Eigen::VectorXd& x, double* res) const override;
  void jac(const Eigen::VectorXd& x, JacRows& out) const override;

  void set_eps(double eps) { eps_ = eps; }
  double eps() const { return eps_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

 private:
  std::vector<std::pair<int, int>> pairs_;
  double eps_;
};

/// Consensus-coupling terms lambda_r (a_r.x - z_r) + (rho/2)(a_r.x - z_r)^2
/// added to the objective of a subproblem.
struct ConsensusPenalty {
  struct Row {
    std::vector<std::pair<int, double>> terms;  // entries of A_i (0/+1/-1)
    double z = 0.0;
    double lambda = 0.0;
  };
  std::vector<Row> rows;
  double rho = 0.0;

  double value(const Eigen::VectorXd& x) const;
  void add_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const;
  double residual_inf(const Eigen::VectorXd& x) const;
};

/// Convex quadratic objective piece (weight/2)(a.x - target)^2.
struct QuadTerm {
  std::vector<std::pair<int, double>> terms;
  double target = 0.0;
  double weight = 1.0;
};

/// Smooth bound-constrained problem: minimise c.x + quadratic terms
/// (+ consensus terms) subject to eq-block residuals = 0 and ineq-block
/// residuals <= 0.
struct NlpProblem {
  int n = 0;
  Eigen::VectorXd lb, ub;
  Eigen::VectorXd c_lin;
  double c_const = 0.0;
  std::vector<QuadTerm> quad;
  std::vector<std::unique_ptr<Block>> eq;
  std::vector<std::unique_ptr<Block>> ineq;
  std::unique_ptr<ConsensusPenalty> consensus;  // optional

  int eq_rows() const;
  int ineq_rows() const;
  double objective(const Eigen::VectorXd& x) const;
  void objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const;

  void fix_var(int idx, double value) {
    lb[idx] = value;
    ub[idx] = value;
  }
};

}  // namespace desgn
