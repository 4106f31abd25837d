#pragma once

#include <optional>
#include <string>

#include "desgn/admm.hpp"
#include "desgn/timing_model.hpp"

namespace desgn {

struct RunConfig {
  std::string network_dir;
  std::string catalog_path;
  std::string timeline_path;
  std::string mode = "central";  // central | distributed
  std::vector<std::string> stages = {"milp", "nlp", "comp"};
  double s_base_mva = 0.8;
  double v_max = 1.05;
  double v_min = 0.95;
  uint64_t seed = 0;
  std::string out_dir;

  AlOptions nlp;          // nlp.tol and friends
  CompSchedule comp;      // comp.eps0 / comp.shrink / comp.threshold
  AdmmParams admm;        // admm.* ; eps0 below per stage
  double admm_eps0_nlp = 1e3;
  double admm_eps0_comp = 5e3;

  std::string partition_source = "auto";  // file | auto
  std::string partition_path;
  int partition_k = 1;

  bool run_stage(const std::string& name) const;
  void validate() const;  // stage prefix rule and mode checks
};

RunConfig load_run_config(const std::string& path);

struct StageResult {
  std::string name;
  double objective = 0.0;  // total annualised cost, GBP
  CostBreakdown costs;
  bool converged = true;
  bool distributed = false;
  // distributed extras
  int admm_iterations = 0;
  double admm_final_residual = 0.0;
  bool lambda_clipped = false;
  std::vector<AdmmTraceRow> trace;
  // timing lives apart from the deterministic report payload
  double wall_time_s = 0.0;
  double admm_parallel_time_s = 0.0;
};

struct LoadSolution {
  std::string id;
  std::string bus;
  Phase phase = Phase::A;
  std::vector<double> x;  // full technology variable vector
  CostBreakdown costs;
  std::vector<double> inj_p, inj_q;  // p.u. at the connection phase
};

struct RunReport {
  RunConfig cfg;
  std::vector<StageResult> stages;
  std::vector<LoadSolution> loads;
  bool has_violations = false;
  ViolationStats upper, lower;
  std::vector<ViolationEntry> violation_entries;
  bool has_metrics = false;
  AdmmMetrics metrics_nlp, metrics_comp;
  bool converged_all = true;

  const StageResult* stage(const std::string& name) const;
};

/// Staged central solve: siting MILP, then the network-constrained NLP from
/// the fixed siting decisions, then the complementarity re-solve, each stage
/// warm-starting the next.
RunReport run_central(const RunConfig& cfg);

/// Central MILP, spatial decomposition, then consensus iterations for the
/// NLP and complementarity stages. Non-convergence is recorded in the
/// report, not thrown. When a central reference report is given, objective
/// gaps and solve-time ratios are attached.
RunReport run_distributed(const RunConfig& cfg, const RunReport* central_ref = nullptr);

struct ValidationResult {
  ViolationStats upper, lower;
  std::vector<ViolationEntry> entries;
  bool newton_converged = true;
  std::vector<int> failed_timepoints;
  double worst_mismatch = 0.0;
};

/// Re-runs power flow from the report's injections and collects voltage
/// violation statistics against the configured band.
ValidationResult validate_run(const RunReport& rep, const Network& net);

/// Writes report.json (deterministic bytes), costs.csv, trace.csv,
/// violations.csv and timing.json under dir.
void emit_report(const RunReport& rep, const std::string& dir);

/// Parses a previously written report.json.
RunReport load_report(const std::string& path);

}  // namespace desgn
