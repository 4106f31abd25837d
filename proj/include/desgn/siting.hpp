#pragma once

#include <vector>

#include "desgn/lp.hpp"

namespace desgn {

struct SitingResult {
  std::vector<std::vector<double>> x;  // per-load solutions
  std::vector<CostBreakdown> costs;    // per-load breakdowns
  CostBreakdown total;
  double tac = 0.0;
  int nodes = 0;
};

/// Solves the network-free siting stage: one independent MILP per load,
/// solved in parallel, objective values aggregated. Throws ModelError with
/// the offending load id when any per-load problem is infeasible.
SitingResult solve_siting_milp(const std::vector<DesProblem>& problems);

CostBreakdown aggregate_costs(const std::vector<CostBreakdown>& parts);

}  // namespace desgn
