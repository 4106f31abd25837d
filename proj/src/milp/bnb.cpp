#include <algorithm>
#include <cmath>

#include "desgn/lp.hpp"

namespace desgn {

namespace {

constexpr double kIntTol = 1e-6;

struct Node {
  std::vector<std::pair<int, double>> fixed;  // (binary index, 0 or 1)
  double bound;                               // parent relaxation value (min sense)
  int depth = 0;
};

}  // namespace

BnbResult branch_and_bound(const LinearProgram& lp, const std::vector<int>& binaries,
                           int node_limit) {
  for (int j : binaries) {
    if (j < 0 || j >= lp.n) throw ModelError("binary index out of range");
    if (lp.lb[j] < -kIntTol || lp.ub[j] > 1 + kIntTol)
      throw ModelError("binary variable must have bounds within [0,1]");
  }

  // Work in minimisation internally.
  const double sense = lp.maximize ? -1.0 : 1.0;
  BnbResult best;
  best.status = LpStatus::Infeasible;
  double incumbent = std::numeric_limits<double>::infinity();

  // Rounding heuristics on the root relaxation give the tree an incumbent
  // to prune against. Branching order is unaffected.
  {
    LpResult root = solve_lp(lp);
    if (root.status == LpStatus::Optimal) {
      auto try_fixed = [&](auto&& pick) {
        LinearProgram sub = lp;
        for (int j : binaries) {
          double v = pick(root.x[j]);
          sub.lb[j] = v;
          sub.ub[j] = v;
        }
        LpResult r = solve_lp(sub);
        if (r.status != LpStatus::Optimal) return;
        double val = sense * r.objective;
        if (val < incumbent) {
          incumbent = val;
          best.x = r.x;
          for (int j : binaries) best.x[j] = std::round(best.x[j]);
          best.objective = r.objective;
          best.status = LpStatus::Optimal;
        }
      };
      try_fixed([](double v) { return v > kIntTol ? 1.0 : 0.0; });   // round up any use
      try_fixed([](double v) { return v >= 0.5 ? 1.0 : 0.0; });      // nearest
    }
  }

  std::vector<Node> stack;
  stack.push_back(Node{{}, -std::numeric_limits<double>::infinity(), 0});

  bool unbounded = false;
  bool hit_limit = false;
  double best_open_bound = std::numeric_limits<double>::infinity();

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (best.nodes >= node_limit) {
      hit_limit = true;
      best_open_bound = std::min(best_open_bound, node.bound);
      continue;
    }
    if (node.bound >= incumbent - 1e-9) continue;
    ++best.nodes;

    LinearProgram sub = lp;
    for (auto [j, v] : node.fixed) {
      sub.lb[j] = v;
      sub.ub[j] = v;
    }
    LpResult rel = solve_lp(sub);
    if (rel.status == LpStatus::Infeasible) continue;
    if (rel.status == LpStatus::Unbounded) {
      unbounded = true;
      break;
    }
    if (rel.status == LpStatus::IterLimit) continue;

    double val = sense * rel.objective;
    if (val >= incumbent - 1e-9) continue;

    // Most fractional binary; lowest index breaks ties.
    int branch_var = -1;
    double best_frac = kIntTol;
    for (int j : binaries) {
      double f = std::abs(rel.x[j] - std::round(rel.x[j]));
      if (f > best_frac + 1e-12) {
        best_frac = f;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      incumbent = val;
      best.x = rel.x;
      for (int j : binaries) best.x[j] = std::round(best.x[j]);
      best.objective = rel.objective;
      best.status = LpStatus::Optimal;
      continue;
    }

    Node zero = node, one = node;
    zero.bound = one.bound = val;
    zero.depth = one.depth = node.depth + 1;
    zero.fixed.push_back({branch_var, 0.0});
    one.fixed.push_back({branch_var, 1.0});
    stack.push_back(std::move(one));   // LIFO: zero branch explored first
    stack.push_back(std::move(zero));
  }

  if (unbounded) {
    best.status = LpStatus::Unbounded;
    return best;
  }
  if (best.status == LpStatus::Optimal) {
    best.proven_optimal = !hit_limit;
    best.gap = hit_limit ? incumbent - best_open_bound : 0.0;
  } else if (hit_limit) {
    best.status = LpStatus::IterLimit;
  }
  return best;
}

}  // namespace desgn
