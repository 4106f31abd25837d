#pragma once

#include "desgn/nlp_problem.hpp"

namespace desgn {

struct AlOptions {
  double tol = 1e-8;        // projected-gradient stationarity target
  double feas_tol = 1e-9;   // unscaled constraint violation target
  double polish_tol = 5e-12;
  int max_outer = 60;
  int max_inner = 6000;     // per outer iteration
  long max_total_inner = 500000;
  double mu0 = 100.0;
  double mu_max = 1e6;
  int lbfgs_mem = 12;
  bool do_polish = true;
  bool record_merit = false;
  bool verbose = false;
};

struct AlResult {
  Eigen::VectorXd x;       // problem variables (slacks stripped)
  Eigen::VectorXd lambda;  // multipliers per row: eq rows then ineq rows
  bool converged = false;
  double stationarity = 0.0;
  double feasibility = 0.0;  // max unscaled violation
  double objective = 0.0;
  int outer_iters = 0;
  long inner_iters = 0;
  std::vector<double> merit_trace;
};

/// Bound-constrained augmented-Lagrangian solve: inequalities become
/// equalities through nonnegative slacks, the inner minimisation is a
/// projected L-BFGS with backtracking line search, multipliers follow the
/// classical first-order update with a tenfold penalty increase when the
/// violation stalls. A Gauss-Newton feasibility polish runs at the end.
AlResult solve_augmented(const NlpProblem& p, const Eigen::VectorXd& x0,
                         const AlOptions& opts = {},
                         const Eigen::VectorXd* warm_lambda = nullptr);

}  // namespace desgn
