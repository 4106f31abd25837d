#pragma once

#include "desgn/auglag.hpp"

namespace desgn {

struct CompSchedule {
  double eps0 = 1.0;
  double shrink = 0.1;
  double threshold = 1e-6;

  void validate() const {
    if (!(shrink > 0 && shrink < 1)) throw ModelError("comp shrink must be in (0,1)");
    if (!(threshold < eps0)) throw ModelError("comp threshold must be below eps0");
  }
};

struct CompResult {
  Eigen::VectorXd x;
  AlResult last;
  bool feasible = true;
  double eps_reached = 0.0;
  int solves = 0;
  std::vector<int> reverted_pairs;
};

/// Drives every registered product below sched.threshold by re-solving the
/// problem over a geometrically shrinking bound. The pass starts from x0
/// (warm start) and carries multipliers between levels. When every product
/// is already below the threshold at x0, one solve at the final level runs.
CompResult complementarity_pass(NlpProblem& p, ProductBlock* pairs,
                                const CompSchedule& sched, const Eigen::VectorXd& x0,
                                const AlOptions& opts,
                                const Eigen::VectorXd* warm_lambda = nullptr);

/// Pins the smaller member of each pair at zero (first member on ties) and
/// re-solves once, recovering exact complementarity. If the re-solve cannot
/// reach feasibility, fixes are reverted pair by pair until it can.
CompResult fix_and_recover(NlpProblem& p, ProductBlock* pairs, const Eigen::VectorXd& x,
                           const AlOptions& opts,
                           const Eigen::VectorXd* warm_lambda = nullptr);

}  // namespace desgn
