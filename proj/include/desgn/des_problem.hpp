#pragma once

#include <map>
#include <string>
#include <vector>

#include "desgn/catalog.hpp"
#include "desgn/feeder.hpp"
#include "desgn/network.hpp"
#include "desgn/timeline.hpp"

namespace desgn {

enum class VarFam : int {
  // sizing, one copy per season block
  PvPanels, CapBatt, HBoilerMax, PPump, ZTank,
  // sizing, single copy
  WBatt, VolBatt, BBoiler,
  // schedule, one copy per timepoint
  ELoad, EGrid, EGridLoad, EGridCharge, EPvUsed, EPvSold, EPvCharge,
  EBattStored, EBattCharge, EBattDischarge, XSell, QBatt,
  HBoiler, HPump, EHp, HTankCharge, HTankDischarge, HTankInternal, TTank,
  Count_
};

const char* var_fam_name(VarFam f);

enum class RowSense : char { Le = 'L', Eq = 'E', Ge = 'G' };

struct LinearRow {
  std::string family;
  RowSense sense = RowSense::Eq;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)

  double activity(const std::vector<double>& x) const;
  double violation(const std::vector<double>& x) const;
};

/// One load's design model: every variable and constraint of the technology
/// model instantiated over (t, battery, heat pump, tank, season), plus the
/// linear objective. Immutable after build.
class DesProblem {
 public:
  LoadPoint load;
  TechCatalog cat;
  Timeline tl;
  std::vector<double> irr;    // kW/m^2 per timepoint
  std::vector<double> tamb;   // degC per timepoint
  std::vector<std::vector<double>> hp_cap;  // [hp][t] kW
  std::vector<std::vector<double>> hp_cop;  // [hp][t]

  int n_vars = 0;
  std::vector<double> lb, ub;
  std::vector<char> is_binary;
  std::vector<double> obj;  // TAC coefficients, GBP (scale applied by caller)
  std::vector<LinearRow> rows;

  // variable lookup
  int var(VarFam f, int a = 0, int b = 0) const;
  std::string var_name(int idx) const;
  int T() const { return tl.total_timepoints(); }
  int nC() const { return static_cast<int>(cat.batteries.size()); }
  int nHp() const { return static_cast<int>(cat.heat_pumps.size()); }
  int nW() const { return static_cast<int>(cat.tanks.size()); }
  int nS() const { return static_cast<int>(tl.seasons.size()); }

  std::map<std::string, int> rows_per_family() const;

  // index bookkeeping, filled during build
  struct FamInfo {
    int base = 0;
    int dim_a = 0;  // t or s extent (1 when unused)
    int dim_b = 0;  // c / hp / w extent (1 when unused)
  };
  std::array<FamInfo, static_cast<size_t>(VarFam::Count_)> fam{};
};

struct FeasReport {
  std::map<std::string, double> family_violation;  // max abs violation per family
  double bound_violation = 0.0;
  double max_violation = 0.0;
  bool feasible(double tol = 1e-9) const { return max_violation <= tol; }
};

struct CostBreakdown {
  // [season] -> GBP, normal seasons only (robust entries stay zero)
  std::vector<double> pv_capex, batt_capex, boiler_capex, pump_capex, tank_capex;
  std::vector<double> pv_opex, batt_opex, boiler_opex, pump_opex, tank_opex;
  std::vector<double> grid_opex, seg_income;
  double tac = 0.0;

  double total_capex() const;
  double total_opex() const;
  double total_income() const;
};

/// Instantiates the full design model for one load.
DesProblem build_des_problem(const LoadPoint& load, const TechCatalog& cat,
                             const Timeline& tl, const EnvSeries& env);

/// Max absolute violation per constraint family at the given point.
FeasReport eval_feasibility(const DesProblem& p, const std::vector<double>& x);

/// Evaluates the seasonal cost terms of a solution.
CostBreakdown cost_breakdown(const std::vector<double>& x, const DesProblem& p);

/// Real/reactive per-unit injections at the load's connection phase.
/// P depends on grid import and PV export; Q is fixed by the building load
/// and power factor.
struct Injections {
  // [phase][t], p.u.; zero on phases other than the load's
  std::array<std::vector<double>, 3> P, Q;
};

Injections compute_injections(const std::vector<double>& x, const DesProblem& p,
                              double s_base_mva);

/// Q-injection constant for one building-load value (kWh) at one timepoint.
double reactive_injection_pu(double e_building_kwh, double pf, double s_base_mva,
                             double dt_hours);

}  // namespace desgn
