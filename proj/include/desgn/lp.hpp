#pragma once

#include <limits>
#include <string>
#include <vector>

#include "desgn/des_problem.hpp"

namespace desgn {

struct LpRow {
  RowSense sense = RowSense::Eq;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> terms;
};

struct LinearProgram {
  int n = 0;
  bool maximize = false;
  std::vector<double> c;
  std::vector<double> lb, ub;  // +-inf allowed
  std::vector<LpRow> rows;

  int add_var(double lo, double hi, double cost = 0.0);
  LpRow& add_row(RowSense sense, double rhs);
  void check() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

const char* lp_status_name(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::IterLimit;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense two-phase primal simplex. Dantzig pricing with lowest-index ties,
/// switching to Bland's rule when the objective stalls.
LpResult solve_lp(const LinearProgram& lp);

struct BnbResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int nodes = 0;
  bool proven_optimal = false;
  double gap = std::numeric_limits<double>::infinity();
};

/// Exact branch and bound over binary variables: most-fractional branching,
/// lowest index on ties, 0-branch explored first.
BnbResult branch_and_bound(const LinearProgram& lp, const std::vector<int>& binaries,
                           int node_limit = 200000);

/// Builds the single-load optimisation as a LinearProgram (no network terms).
LinearProgram lp_from_des(const DesProblem& p);
std::vector<int> binary_indices(const DesProblem& p);

/// Writes an LP in a sparse-triplet text format (one file per call).
void dump_lp(const LinearProgram& lp, const std::string& path);

}  // namespace desgn
