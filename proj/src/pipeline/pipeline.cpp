#include "desgn/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "desgn/feeder.hpp"

namespace desgn {

const StageResult* RunReport::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

struct Loaded {
  Network net;
  EnvSeries env;
  TechCatalog cat;
  Timeline tl;
  std::vector<DesProblem> des;
};

Loaded load_inputs(const RunConfig& cfg) {
  Loaded L;
  L.net = parse_network(cfg.network_dir, cfg.s_base_mva);
  L.env = parse_env(cfg.network_dir);
  L.cat = load_catalog(cfg.catalog_path);
  L.tl = load_timeline(cfg.timeline_path);
  if (static_cast<int>(L.env.irradiance.size()) != L.tl.total_timepoints())
    throw InputError("env.csv length does not match the timeline");
  L.des.reserve(L.net.loads.size());
  for (const auto& ld : L.net.loads)
    L.des.push_back(build_des_problem(ld, L.cat, L.tl, L.env));
  return L;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double objective_scale(double tac_milp) {
  return std::abs(tac_milp) > 1e-9 ? 1.0 / std::abs(tac_milp) : 1.0;
}

void fill_loads(RunReport& rep, const Loaded& L,
                const std::vector<std::vector<double>>& des_x) {
  rep.loads.clear();
  for (size_t li = 0; li < L.des.size(); ++li) {
    LoadSolution sol;
    sol.id = L.des[li].load.id;
    sol.bus = L.net.buses[L.des[li].load.bus].id;
    sol.phase = L.des[li].load.phase;
    sol.x = des_x[li];
    sol.costs = cost_breakdown(sol.x, L.des[li]);
    Injections inj = compute_injections(sol.x, L.des[li], L.net.s_base_mva);
    int ph = static_cast<int>(sol.phase);
    sol.inj_p = inj.P[ph];
    sol.inj_q = inj.Q[ph];
    rep.loads.push_back(std::move(sol));
  }
}

void attach_validation(RunReport& rep, const Network& net) {
  ValidationResult val = validate_run(rep, net);
  rep.has_violations = true;
  rep.upper = val.upper;
  rep.lower = val.lower;
  rep.violation_entries = std::move(val.entries);
}

StageResult milp_stage(const Loaded& L, SitingResult& milp_out) {
  auto t0 = std::chrono::steady_clock::now();
  milp_out = solve_siting_milp(L.des);
  StageResult sr;
  sr.name = "milp";
  sr.objective = milp_out.tac;
  sr.costs = milp_out.total;
  sr.wall_time_s = seconds_since(t0);
  return sr;
}

}  // namespace

RunReport run_central(const RunConfig& cfg) {
  cfg.validate();
  Loaded L = load_inputs(cfg);
  RunReport rep;
  rep.cfg = cfg;

  SitingResult milp;
  rep.stages.push_back(milp_stage(L, milp));
  std::vector<std::vector<double>> final_x = milp.x;

  double scale = objective_scale(milp.tac);
  AlOptions al = cfg.nlp;
  bool network_stage_ran = false;
  Eigen::VectorXd x_stage;

  if (cfg.run_stage("nlp")) {
    auto t0 = std::chrono::steady_clock::now();
    StageOptions so{cfg.v_max, cfg.v_min, scale, false};
    StageNlp st = build_central_stage(L.net, L.des, milp, so);
    Eigen::VectorXd x0 = stage_start_point(st, L.des, milp);
    AlResult res = solve_augmented(st.prob, x0, al);
    StageResult sr;
    sr.name = "nlp";
    sr.objective = res.objective / scale;
    sr.converged = res.converged;
    std::vector<CostBreakdown> parts;
    for (size_t li = 0; li < L.des.size(); ++li) {
      final_x[li] = st.des_solution(li, res.x);
      parts.push_back(cost_breakdown(final_x[li], L.des[li]));
    }
    sr.costs = aggregate_costs(parts);
    sr.wall_time_s = seconds_since(t0);
    if (!res.converged) rep.converged_all = false;
    rep.stages.push_back(std::move(sr));
    x_stage = res.x;
    network_stage_ran = true;

    if (cfg.run_stage("comp")) {
      auto t1 = std::chrono::steady_clock::now();
      StageOptions so2{cfg.v_max, cfg.v_min, scale, true};
      StageNlp st2 = build_central_stage(L.net, L.des, milp, so2);
      CompResult pass = complementarity_pass(st2.prob, st2.products, cfg.comp, x_stage, al);
      CompResult rec = fix_and_recover(st2.prob, st2.products, pass.x, al);
      StageResult sr2;
      sr2.name = "comp";
      sr2.objective = st2.prob.objective(rec.x) / scale;
      sr2.converged = pass.feasible && rec.feasible;
      std::vector<CostBreakdown> parts2;
      for (size_t li = 0; li < L.des.size(); ++li) {
        final_x[li] = st2.des_solution(li, rec.x);
        parts2.push_back(cost_breakdown(final_x[li], L.des[li]));
      }
      sr2.costs = aggregate_costs(parts2);
      sr2.wall_time_s = seconds_since(t1);
      if (!sr2.converged) rep.converged_all = false;
      rep.stages.push_back(std::move(sr2));
      x_stage = rec.x;
    }
  }

  fill_loads(rep, L, final_x);
  if (network_stage_ran) attach_validation(rep, L.net);
  return rep;
}

namespace {

RegressionModel default_timing_model() {
  // nominal shape when no measured samples are supplied: solve time grows
  // with bus count, load subproblems carry the technology payload
  RegressionModel m;
  m.load_coef << 0.05, 0.01, 0.2;
  m.noload_coef << 0.01, 0.002;
  m.r2_load = m.r2_noload = 0.0;
  return m;
}

}  // namespace

RunReport run_distributed(const RunConfig& cfg, const RunReport* central_ref) {
  cfg.validate();
  Loaded L = load_inputs(cfg);
  RunReport rep;
  rep.cfg = cfg;

  SitingResult milp;
  rep.stages.push_back(milp_stage(L, milp));
  std::vector<std::vector<double>> final_x = milp.x;
  double scale = objective_scale(milp.tac);

  Partition part;
  if (cfg.partition_source == "file") {
    part = load_partition_json(cfg.partition_path, L.net);
  } else if (cfg.partition_k <= 1) {
    part = single_partition(L.net);
    part.rebuild_tie_lines(L.net);
  } else {
    part = optimize_partition(L.net, cfg.partition_k,
                              auto_preassign(L.net, cfg.partition_k),
                              default_timing_model(), PartitionOptions{},
                              L.tl.total_timepoints());
  }

  auto harvest = [&](std::vector<SubproblemSpec>& specs) {
    for (const auto& s : specs)
      for (size_t k = 0; k < s.load_idx.size(); ++k) {
        const DesProblem& d = L.des[s.load_idx[k]];
        std::vector<double>& dst = final_x[s.load_idx[k]];
        dst.resize(d.n_vars);
        for (int i = 0; i < d.n_vars; ++i) dst[i] = s.x[s.des_offsets[k] + i];
      }
  };

  auto stage_costs = [&]() {
    std::vector<CostBreakdown> parts;
    for (size_t li = 0; li < L.des.size(); ++li)
      parts.push_back(cost_breakdown(final_x[li], L.des[li]));
    return aggregate_costs(parts);
  };

  std::vector<SubproblemSpec> nlp_specs;
  if (cfg.run_stage("nlp")) {
    auto t0 = std::chrono::steady_clock::now();
    DecomposeOptions dop;
    dop.stage = StageOptions{cfg.v_max, cfg.v_min, scale, false};
    nlp_specs = decompose(L.net, part, L.tl, L.des, milp, dop);
    ConsensusLayout layout = build_consensus(nlp_specs, part, L.net);
    AdmmStageConfig acfg;
    acfg.params = cfg.admm;
    acfg.params.eps0 = cfg.admm_eps0_nlp;
    acfg.al = cfg.nlp;
    acfg.comp_stage = false;
    AdmmResult ar = admm_solve(nlp_specs, layout, acfg);
    harvest(nlp_specs);

    StageResult sr;
    sr.name = "nlp";
    sr.distributed = true;
    sr.objective = ar.objective;
    sr.converged = ar.converged;
    sr.admm_iterations = ar.iterations;
    sr.admm_final_residual = ar.final_residual;
    sr.lambda_clipped = ar.lambda_clipped;
    sr.trace = ar.trace;
    sr.costs = stage_costs();
    sr.wall_time_s = seconds_since(t0);
    sr.admm_parallel_time_s = ar.parallel_time_s;
    if (!ar.converged) rep.converged_all = false;
    rep.stages.push_back(std::move(sr));
  }

  if (cfg.run_stage("comp")) {
    auto t0 = std::chrono::steady_clock::now();
    DecomposeOptions dop;
    dop.stage = StageOptions{cfg.v_max, cfg.v_min, scale, true};
    std::vector<SubproblemSpec> comp_specs = decompose(L.net, part, L.tl, L.des, milp, dop);
    // identical variable layout to the first-stage specs: warm start directly
    if (!nlp_specs.empty())
      for (size_t si = 0; si < comp_specs.size(); ++si)
        if (comp_specs[si].x.size() == nlp_specs[si].x.size())
          comp_specs[si].x = nlp_specs[si].x;
    ConsensusLayout layout = build_consensus(comp_specs, part, L.net);
    AdmmStageConfig acfg;
    acfg.params = cfg.admm;
    acfg.params.eps0 = cfg.admm_eps0_comp;
    acfg.al = cfg.nlp;
    acfg.comp_schedule = cfg.comp;
    acfg.comp_stage = true;
    AdmmResult ar = admm_solve(comp_specs, layout, acfg);
    harvest(comp_specs);

    StageResult sr;
    sr.name = "comp";
    sr.distributed = true;
    sr.objective = ar.objective;
    sr.converged = ar.converged;
    sr.admm_iterations = ar.iterations;
    sr.admm_final_residual = ar.final_residual;
    sr.lambda_clipped = ar.lambda_clipped;
    sr.trace = ar.trace;
    sr.costs = stage_costs();
    sr.wall_time_s = seconds_since(t0);
    sr.admm_parallel_time_s = ar.parallel_time_s;
    if (!ar.converged) rep.converged_all = false;
    rep.stages.push_back(std::move(sr));
  }

  fill_loads(rep, L, final_x);
  attach_validation(rep, L.net);

  if (central_ref) {
    auto gap = [&](const char* name, AdmmMetrics& out) {
      const StageResult* mine = rep.stage(name);
      const StageResult* ref = central_ref->stage(name);
      if (!mine || !ref) return false;
      out = admm_metrics(mine->objective, ref->objective, mine->admm_parallel_time_s,
                         ref->wall_time_s);
      return true;
    };
    bool any = false;
    any |= gap("nlp", rep.metrics_nlp);
    any |= gap("comp", rep.metrics_comp);
    rep.has_metrics = any;
  }
  return rep;
}

ValidationResult validate_run(const RunReport& rep, const Network& net) {
  if (rep.loads.empty()) throw ModelError("report carries no load solutions");
  const int T = static_cast<int>(rep.loads[0].inj_p.size());
  YBus yb = YBus::build(net);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(yb.nodes.n, T);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(yb.nodes.n, T);
  for (const auto& sol : rep.loads) {
    int bus = net.bus_index(sol.bus);
    if (bus < 0) throw ModelError("report load on unknown bus " + sol.bus);
    int node = yb.nodes.node_of[bus][static_cast<int>(sol.phase)];
    if (node < 0) throw ModelError("report load on absent phase at bus " + sol.bus);
    for (int t = 0; t < T; ++t) {
      P(node, t) += sol.inj_p[t];
      Q(node, t) += sol.inj_q[t];
    }
  }
  std::vector<int> slack_nodes;
  for (int ph = 0; ph < 3; ++ph) {
    int node = yb.nodes.node_of[net.slack][ph];
    if (node >= 0) slack_nodes.push_back(node);
  }
  SystemState st = flat_start(yb.nodes, T);
  NewtonOptions nopt;
  nopt.tol = 1e-10;
  NewtonReport nr = newton_pf(yb, slack_nodes, P, Q, st, nopt);

  ValidationResult val;
  val.newton_converged = nr.converged;
  val.failed_timepoints = nr.failed_timepoints;
  val.worst_mismatch = nr.worst_mismatch;
  ViolationReport vr = violation_stats(st, yb.nodes, rep.cfg.v_max, rep.cfg.v_min);
  val.upper = vr.upper;
  val.lower = vr.lower;
  val.entries = std::move(vr.entries);
  return val;
}

}  // namespace desgn
