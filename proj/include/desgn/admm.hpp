#pragma once

#include <functional>
#include <memory>

#include "desgn/comp.hpp"
#include "desgn/stage_nlp.hpp"

namespace desgn {

/// Spatial grouping of buses. Groups need not be connected; every tie line
/// crosses exactly two groups.
struct Partition {
  std::vector<std::vector<int>> groups;  // bus indices
  struct TieLine {
    int branch = -1;
    int owner_group = -1;     // slack-side group
    int neighbor_group = -1;  // far-side group
  };
  std::vector<TieLine> tie_lines;

  int n_groups() const { return static_cast<int>(groups.size()); }
  std::vector<int> group_of_bus(const Network& net) const;
  bool group_has_load(const Network& net, int g) const;
  void validate(const Network& net) const;

  /// Recomputes tie_lines from the groups (every branch crossing groups).
  void rebuild_tie_lines(const Network& net);
};

Partition single_partition(const Network& net);
Partition load_partition_json(const std::string& path, const Network& net);
void save_partition_json(const Partition& part, const Network& net, const std::string& path);

/// One ADMM subproblem: an NLP over its buses (plus one-bus overlaps across
/// tie lines), tie-line flow variables, and the technology payload of any
/// contained loads. Load subproblems span every timepoint; no-load
/// subproblems cover a single timepoint.
struct SubproblemSpec {
  enum class Kind { LoadAllT, NoLoadSingleT };
  Kind kind = Kind::NoLoadSingleT;
  int group = -1;
  int t_begin = 0, t_count = 1;  // global timepoint window

  std::vector<int> buses;    // owned
  std::vector<int> overlap;  // replicated neighbour buses
  std::vector<int> ties;     // tie-line ordinals (indices into part.tie_lines)
  std::vector<size_t> load_idx;

  NlpProblem prob;
  YBus yb;  // over owned + overlap buses
  int n_nodes = 0;
  int stride_t = 0;
  int net_base = 0;
  int des_base = 0;
  std::vector<int> des_offsets;              // per contained load
  std::vector<std::vector<int>> tie_phases;  // per tie ordinal in `ties`
  std::vector<int> tie_pb_base, tie_qb_base; // per tie ordinal, offsets in a t-block
  ProductBlock* products = nullptr;
  double scale = 1.0;

  int v_index(int node, int t_local) const { return net_base + t_local * stride_t + node; }
  int th_index(int node, int t_local) const {
    return net_base + t_local * stride_t + n_nodes + node;
  }
  int pb_index(int tie_ord, int ph_ord, int t_local) const {
    return net_base + t_local * stride_t + tie_pb_base[tie_ord] + ph_ord;
  }
  int qb_index(int tie_ord, int ph_ord, int t_local) const {
    return net_base + t_local * stride_t + tie_qb_base[tie_ord] + ph_ord;
  }

  // iterate state
  Eigen::VectorXd x;
  Eigen::VectorXd al_lambda;  // constraint multipliers carried between solves
  bool comp_initialized = false;
};

/// Consensus rows over tie-line quantities. Six rows per (tie, phase, t):
/// voltage sum/difference, angle sum/difference, and the two flows.
struct ConsensusLayout {
  enum Quantity { VAdd = 0, VSub, ThAdd, ThSub, PbRow, QbRow };
  struct Entry {
    int tie = -1;
    int branch = -1;
    int phase = 0;
    int t = 0;
    Quantity quantity = VAdd;
  };
  std::vector<Entry> catalog;
  Eigen::VectorXd z;
  // Per spec: the global row ids it touches (each row has exactly two).
  std::vector<std::vector<int>> spec_rows;
  std::vector<Eigen::VectorXd> lambda;  // per spec, aligned with spec_rows

  int rows() const { return static_cast<int>(catalog.size()); }
};

struct DecomposeOptions {
  StageOptions stage;  // v limits, scale, comp flag
};

/// Splits the stage problem along the partition. Overlap buses are
/// replicated across tie lines; tie-line phases with no load beyond the far
/// end are pinned to zero flow in no-load subproblems.
std::vector<SubproblemSpec> decompose(const Network& net, const Partition& part,
                                      const Timeline& tl,
                                      const std::vector<DesProblem>& des,
                                      const SitingResult& milp,
                                      const DecomposeOptions& opts);

/// Builds the consensus matrices and installs penalty rows into every spec.
ConsensusLayout build_consensus(std::vector<SubproblemSpec>& specs, const Partition& part,
                                const Network& net);

struct AdmmParams {
  double beta = 10.0;
  double zeta = 0.1;
  double eps0 = 1e3;  // initial penalty
  double kappa = 0.99;
  double tau = 1.02;
  double lambda_min = -1e9;
  double lambda_max = 1e9;
  double conv_threshold = 1e-4;
  int max_iters = 300;
  bool use_beta_prox = false;     // beta-weighted proximal term in the x-update
  bool use_zeta_damping = false;  // zeta-damped multiplier steps

  void validate() const;
};

struct AdmmTraceRow {
  int iter;
  double max_primal_residual;
  double rho;
  double max_subproblem_time_s;
  double objective;  // unscaled cost
};

struct AdmmResult {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  double objective = 0.0;       // unscaled cost
  double parallel_time_s = 0.0; // sum over iterations of the slowest subproblem
  double total_cpu_time_s = 0.0;
  bool lambda_clipped = false;
  std::vector<AdmmTraceRow> trace;
};

/// Solves one quadratic-penalty subproblem update:
///   min f_i + lambda.(A x - z) + (rho/2)||A x - z||^2.
AlResult x_update(SubproblemSpec& spec, const ConsensusLayout& layout,
                  const Eigen::VectorXd& z, double rho, const AlOptions& al_opts);

/// Averaged update for the shared vector, one entry per consensus row.
Eigen::VectorXd z_update(const std::vector<SubproblemSpec>& specs,
                         const ConsensusLayout& layout, double rho);

/// Clipped first-order multiplier step; returns true when clipping engaged.
bool lambda_update(std::vector<SubproblemSpec>& specs, ConsensusLayout& layout,
                   double rho, const AdmmParams& params);

/// Penalty growth rule: multiply by tau when the residual fails to shrink by
/// the factor kappa.
double penalty_update(double rho, double residual, double prev_residual,
                      const AdmmParams& params);

struct AdmmStageConfig {
  AdmmParams params;
  AlOptions al;
  CompSchedule comp_schedule;
  bool comp_stage = false;
};

AdmmResult admm_solve(std::vector<SubproblemSpec>& specs, ConsensusLayout& layout,
                      const AdmmStageConfig& cfg);

struct AdmmMetrics {
  double obj_gap_pct = 0.0;
  double t_ratio = 0.0;
};

AdmmMetrics admm_metrics(double obj_admm, double obj_central, double t_admm_s,
                         double t_central_s);

}  // namespace desgn
