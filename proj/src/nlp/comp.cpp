#include "desgn/comp.hpp"

#include <cmath>

namespace desgn {

CompResult complementarity_pass(NlpProblem& p, ProductBlock* pairs,
                                const CompSchedule& sched, const Eigen::VectorXd& x0,
                                const AlOptions& opts, const Eigen::VectorXd* warm_lambda) {
  sched.validate();
  CompResult out;

  bool already_comp = true;
  for (const auto& [u, v] : pairs->pairs())
    if (x0[u] * x0[v] > sched.threshold) already_comp = false;

  Eigen::VectorXd x = x0;
  Eigen::VectorXd lambda;
  const Eigen::VectorXd* warm = warm_lambda;

  double eps = already_comp ? sched.threshold : sched.eps0;
  Eigen::VectorXd last_feasible = x0;
  double last_eps = std::numeric_limits<double>::infinity();
  bool have_feasible = false;

  while (true) {
    pairs->set_eps(eps);
    AlResult res = solve_augmented(p, x, opts, warm);
    ++out.solves;
    x = res.x;
    lambda = res.lambda;
    warm = &lambda;
    if (res.feasibility <= opts.feas_tol * 10) {
      last_feasible = x;
      last_eps = eps;
      have_feasible = true;
      out.last = std::move(res);
    } else {
      // stuck at this level: fall back to the last feasible one
      out.feasible = false;
      if (have_feasible) {
        pairs->set_eps(last_eps);
        x = last_feasible;
      } else {
        out.last = std::move(res);
      }
      break;
    }
    if (eps <= sched.threshold) break;
    eps = std::max(sched.threshold, eps * sched.shrink);
  }

  out.x = x;
  out.eps_reached = last_eps;
  return out;
}

CompResult fix_and_recover(NlpProblem& p, ProductBlock* pairs, const Eigen::VectorXd& x,
                           const AlOptions& opts, const Eigen::VectorXd* warm_lambda) {
  CompResult out;
  const auto& pr = pairs->pairs();
  std::vector<int> fixed_var(pr.size());
  std::vector<std::pair<double, double>> saved(pr.size());

  for (size_t k = 0; k < pr.size(); ++k) {
    auto [u, v] = pr[k];
    int pick = (x[v] < x[u]) ? v : u;  // ties keep the first member
    fixed_var[k] = pick;
    saved[k] = {p.lb[pick], p.ub[pick]};
    p.fix_var(pick, 0.0);
  }

  Eigen::VectorXd start = x;
  for (size_t k = 0; k < pr.size(); ++k) start[fixed_var[k]] = 0.0;

  AlResult res = solve_augmented(p, start, opts, warm_lambda);
  ++out.solves;

  // Revert offending fixes until the re-solve is feasible again.
  size_t next_revert = 0;
  while (res.feasibility > opts.feas_tol * 10 && next_revert < pr.size()) {
    int pick = fixed_var[next_revert];
    p.lb[pick] = saved[next_revert].first;
    p.ub[pick] = saved[next_revert].second;
    out.reverted_pairs.push_back(static_cast<int>(next_revert));
    ++next_revert;
    res = solve_augmented(p, start, opts, warm_lambda);
    ++out.solves;
  }

  out.feasible = res.feasibility <= opts.feas_tol * 10;
  out.x = res.x;
  out.eps_reached = pairs->eps();
  out.last = std::move(res);
  return out;
}

}  // namespace desgn
