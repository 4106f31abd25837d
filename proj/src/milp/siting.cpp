#include "desgn/siting.hpp"

#include <future>

namespace desgn {

CostBreakdown aggregate_costs(const std::vector<CostBreakdown>& parts) {
  CostBreakdown total;
  if (parts.empty()) return total;
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty()) a.assign(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  };
  for (const auto& cb : parts) {
    add(total.pv_capex, cb.pv_capex);
    add(total.batt_capex, cb.batt_capex);
    add(total.boiler_capex, cb.boiler_capex);
    add(total.pump_capex, cb.pump_capex);
    add(total.tank_capex, cb.tank_capex);
    add(total.pv_opex, cb.pv_opex);
    add(total.batt_opex, cb.batt_opex);
    add(total.boiler_opex, cb.boiler_opex);
    add(total.pump_opex, cb.pump_opex);
    add(total.tank_opex, cb.tank_opex);
    add(total.grid_opex, cb.grid_opex);
    add(total.seg_income, cb.seg_income);
    total.tac += cb.tac;
  }
  return total;
}

SitingResult solve_siting_milp(const std::vector<DesProblem>& problems) {
  SitingResult out;
  out.x.resize(problems.size());
  out.costs.resize(problems.size());

  std::vector<std::future<BnbResult>> jobs;
  jobs.reserve(problems.size());
  for (const auto& p : problems)
    jobs.push_back(std::async(std::launch::async, [&p]() {
      LinearProgram lp = lp_from_des(p);
      return branch_and_bound(lp, binary_indices(p));
    }));

  for (size_t i = 0; i < problems.size(); ++i) {
    BnbResult r = jobs[i].get();
    if (r.status != LpStatus::Optimal)
      throw ModelError("siting stage failed for load " + problems[i].load.id + ": " +
                       lp_status_name(r.status));
    out.nodes += r.nodes;
    out.x[i] = std::move(r.x);
    out.costs[i] = cost_breakdown(out.x[i], problems[i]);
  }
  out.total = aggregate_costs(out.costs);
  out.tac = out.total.tac;
  return out;
}

}  // namespace desgn
