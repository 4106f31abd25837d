#include <filesystem>
#include <fstream>

#include "desgn/pipeline.hpp"
#include "json.hpp"

namespace desgn {

namespace {

using ojson = nlohmann::ordered_json;

ojson costs_to_json(const CostBreakdown& cb) {
  ojson j;
  j["pv_capex"] = cb.pv_capex;
  j["batt_capex"] = cb.batt_capex;
  j["boiler_capex"] = cb.boiler_capex;
  j["pump_capex"] = cb.pump_capex;
  j["tank_capex"] = cb.tank_capex;
  j["pv_opex"] = cb.pv_opex;
  j["batt_opex"] = cb.batt_opex;
  j["boiler_opex"] = cb.boiler_opex;
  j["pump_opex"] = cb.pump_opex;
  j["tank_opex"] = cb.tank_opex;
  j["grid_opex"] = cb.grid_opex;
  j["seg_income"] = cb.seg_income;
  j["tac"] = cb.tac;
  return j;
}

CostBreakdown costs_from_json(const ojson& j) {
  CostBreakdown cb;
  auto get = [&](const char* key) { return j.at(key).get<std::vector<double>>(); };
  cb.pv_capex = get("pv_capex");
  cb.batt_capex = get("batt_capex");
  cb.boiler_capex = get("boiler_capex");
  cb.pump_capex = get("pump_capex");
  cb.tank_capex = get("tank_capex");
  cb.pv_opex = get("pv_opex");
  cb.batt_opex = get("batt_opex");
  cb.boiler_opex = get("boiler_opex");
  cb.pump_opex = get("pump_opex");
  cb.tank_opex = get("tank_opex");
  cb.grid_opex = get("grid_opex");
  cb.seg_income = get("seg_income");
  cb.tac = j.at("tac").get<double>();
  return cb;
}

ojson config_to_json(const RunConfig& cfg) {
  ojson j;
  j["network"] = cfg.network_dir;
  j["catalog"] = cfg.catalog_path;
  j["timeline"] = cfg.timeline_path;
  j["mode"] = cfg.mode;
  j["stages"] = cfg.stages;
  j["s_base_mva"] = cfg.s_base_mva;
  j["v_max"] = cfg.v_max;
  j["v_min"] = cfg.v_min;
  j["seed"] = cfg.seed;
  j["nlp"] = {{"tol", cfg.nlp.tol}, {"feas_tol", cfg.nlp.feas_tol}};
  j["comp"] = {{"eps0", cfg.comp.eps0},
               {"shrink", cfg.comp.shrink},
               {"threshold", cfg.comp.threshold}};
  j["admm"] = {{"beta", cfg.admm.beta},
               {"zeta", cfg.admm.zeta},
               {"eps0_nlp", cfg.admm_eps0_nlp},
               {"eps0_comp", cfg.admm_eps0_comp},
               {"kappa", cfg.admm.kappa},
               {"tau", cfg.admm.tau},
               {"lambda_min", cfg.admm.lambda_min},
               {"lambda_max", cfg.admm.lambda_max},
               {"conv_threshold", cfg.admm.conv_threshold},
               {"max_iters", cfg.admm.max_iters},
               {"use_beta_prox", cfg.admm.use_beta_prox},
               {"use_zeta_damping", cfg.admm.use_zeta_damping}};
  j["partition"] = {{"source", cfg.partition_source},
                    {"path", cfg.partition_path},
                    {"k", cfg.partition_k}};
  return j;
}

RunConfig config_from_json(const ojson& j) {
  RunConfig cfg;
  cfg.network_dir = j.at("network").get<std::string>();
  cfg.catalog_path = j.at("catalog").get<std::string>();
  cfg.timeline_path = j.at("timeline").get<std::string>();
  cfg.mode = j.at("mode").get<std::string>();
  cfg.stages = j.at("stages").get<std::vector<std::string>>();
  cfg.s_base_mva = j.at("s_base_mva").get<double>();
  cfg.v_max = j.at("v_max").get<double>();
  cfg.v_min = j.at("v_min").get<double>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.nlp.tol = j.at("nlp").at("tol").get<double>();
  cfg.nlp.feas_tol = j.at("nlp").at("feas_tol").get<double>();
  cfg.comp.eps0 = j.at("comp").at("eps0").get<double>();
  cfg.comp.shrink = j.at("comp").at("shrink").get<double>();
  cfg.comp.threshold = j.at("comp").at("threshold").get<double>();
  const auto& ja = j.at("admm");
  cfg.admm.beta = ja.at("beta").get<double>();
  cfg.admm.zeta = ja.at("zeta").get<double>();
  cfg.admm_eps0_nlp = ja.at("eps0_nlp").get<double>();
  cfg.admm_eps0_comp = ja.at("eps0_comp").get<double>();
  cfg.admm.kappa = ja.at("kappa").get<double>();
  cfg.admm.tau = ja.at("tau").get<double>();
  cfg.admm.lambda_min = ja.at("lambda_min").get<double>();
  cfg.admm.lambda_max = ja.at("lambda_max").get<double>();
  cfg.admm.conv_threshold = ja.at("conv_threshold").get<double>();
  cfg.admm.max_iters = ja.at("max_iters").get<int>();
  cfg.admm.use_beta_prox = ja.at("use_beta_prox").get<bool>();
  cfg.admm.use_zeta_damping = ja.at("use_zeta_damping").get<bool>();
  cfg.partition_source = j.at("partition").at("source").get<std::string>();
  cfg.partition_path = j.at("partition").at("path").get<std::string>();
  cfg.partition_k = j.at("partition").at("k").get<int>();
  return cfg;
}

ojson stats_to_json(const ViolationStats& s) {
  return ojson{{"avg_violation_pct", s.avg_violation_pct},
               {"max_violation_pct", s.max_violation_pct},
               {"pct_violated", s.pct_violated}};
}

ViolationStats stats_from_json(const ojson& j) {
  ViolationStats s;
  s.avg_violation_pct = j.at("avg_violation_pct").get<double>();
  s.max_violation_pct = j.at("max_violation_pct").get<double>();
  s.pct_violated = j.at("pct_violated").get<double>();
  return s;
}

}  // namespace

void emit_report(const RunReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output dir " + dir);

  // ---- report.json: deterministic payload, no wall-clock content ----
  ojson j;
  j["config"] = config_to_json(rep.cfg);
  j["seed"] = rep.cfg.seed;
  j["converged_all"] = rep.converged_all;
  j["stages"] = ojson::array();
  for (const auto& s : rep.stages) {
    ojson js;
    js["name"] = s.name;
    js["objective"] = s.objective;
    js["converged"] = s.converged;
    js["distributed"] = s.distributed;
    if (s.distributed) {
      js["admm_iterations"] = s.admm_iterations;
      js["admm_final_residual"] = s.admm_final_residual;
      js["lambda_clipped"] = s.lambda_clipped;
      ojson tr = ojson::array();
      for (const auto& row : s.trace)
        tr.push_back(ojson{{"iter", row.iter},
                           {"max_primal_residual", row.max_primal_residual},
                           {"rho", row.rho},
                           {"objective", row.objective}});
      js["trace"] = std::move(tr);
    }
    js["costs"] = costs_to_json(s.costs);
    j["stages"].push_back(std::move(js));
  }
  j["loads"] = ojson::array();
  for (const auto& sol : rep.loads) {
    ojson jl;
    jl["id"] = sol.id;
    jl["bus"] = sol.bus;
    jl["phase"] = std::string(1, phase_label(sol.phase));
    jl["x"] = sol.x;
    jl["costs"] = costs_to_json(sol.costs);
    jl["inj_p"] = sol.inj_p;
    jl["inj_q"] = sol.inj_q;
    j["loads"].push_back(std::move(jl));
  }
  if (rep.has_violations) {
    j["violations"] = ojson{{"upper", stats_to_json(rep.upper)},
                            {"lower", stats_to_json(rep.lower)}};
  }
  if (rep.has_metrics) {
    j["metrics"] = ojson{{"nlp_obj_gap_pct", rep.metrics_nlp.obj_gap_pct},
                         {"comp_obj_gap_pct", rep.metrics_comp.obj_gap_pct}};
  }
  {
    std::ofstream out(dir + "/report.json", std::ios::binary);
    if (!out) throw InputError("cannot write report.json");
    out << j.dump(2) << "\n";
  }

  // ---- costs.csv ----
  {
    std::ofstream out(dir + "/costs.csv");
    out << "component,season,capex,opex,income\n";
    const CostBreakdown& cb = rep.stages.back().costs;
    size_t n_seasons = cb.pv_capex.size();
    auto row = [&](const char* name, const std::vector<double>& capex,
                   const std::vector<double>& opex, const std::vector<double>* income) {
      for (size_t s = 0; s < n_seasons; ++s)
        out << name << "," << s << "," << (capex.empty() ? 0.0 : capex[s]) << ","
            << (opex.empty() ? 0.0 : opex[s]) << ","
            << (income ? (*income)[s] : 0.0) << "\n";
    };
    std::vector<double> zeros(n_seasons, 0.0);
    row("pv", cb.pv_capex, cb.pv_opex, nullptr);
    row("battery", cb.batt_capex, cb.batt_opex, nullptr);
    row("boiler", cb.boiler_capex, cb.boiler_opex, nullptr);
    row("heat_pump", cb.pump_capex, cb.pump_opex, nullptr);
    row("tank", cb.tank_capex, cb.tank_opex, nullptr);
    row("grid", zeros, cb.grid_opex, nullptr);
    row("export", zeros, zeros, &cb.seg_income);
  }

  // ---- trace.csv (distributed stages, concatenated in order) ----
  {
    bool any = false;
    for (const auto& s : rep.stages) any |= s.distributed;
    if (any) {
      std::ofstream out(dir + "/trace.csv");
      out << "iter,max_primal_residual,rho,max_subproblem_time_s,objective\n";
      for (const auto& s : rep.stages) {
        if (!s.distributed) continue;
        for (const auto& row : s.trace)
          out << row.iter << "," << row.max_primal_residual << "," << row.rho << ","
              << row.max_subproblem_time_s << "," << row.objective << "\n";
      }
    }
  }

  // ---- violations.csv ----
  if (rep.has_violations) {
    std::ofstream out(dir + "/violations.csv");
    out << "bus,phase,t,v_pu,upper_viol_pct,lower_viol_pct\n";
    for (const auto& e : rep.violation_entries)
      out << e.bus << "," << phase_label(e.phase) << "," << e.t << "," << e.v_pu << ","
          << e.upper_pct << "," << e.lower_pct << "\n";
  }

  // ---- timing.json (wall-clock content lives here, not in report.json) ----
  {
    ojson jt;
    jt["stages"] = ojson::array();
    for (const auto& s : rep.stages) {
      ojson js{{"name", s.name}, {"wall_s", s.wall_time_s}};
      if (s.distributed) js["admm_parallel_s"] = s.admm_parallel_time_s;
      jt["stages"].push_back(std::move(js));
    }
    if (rep.has_metrics)
      jt["t_ratio"] = ojson{{"nlp", rep.metrics_nlp.t_ratio},
                            {"comp", rep.metrics_comp.t_ratio}};
    std::ofstream out(dir + "/timing.json");
    out << jt.dump(2) << "\n";
  }
}

RunReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open report: " + path);
  ojson j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("bad report json: " + std::string(e.what()));
  }
  RunReport rep;
  rep.cfg = config_from_json(j.at("config"));
  rep.converged_all = j.at("converged_all").get<bool>();
  for (const auto& js : j.at("stages")) {
    StageResult s;
    s.name = js.at("name").get<std::string>();
    s.objective = js.at("objective").get<double>();
    s.converged = js.at("converged").get<bool>();
    s.distributed = js.at("distributed").get<bool>();
    if (s.distributed) {
      s.admm_iterations = js.at("admm_iterations").get<int>();
      s.admm_final_residual = js.at("admm_final_residual").get<double>();
      s.lambda_clipped = js.at("lambda_clipped").get<bool>();
      for (const auto& jr : js.at("trace")) {
        AdmmTraceRow row;
        row.iter = jr.at("iter").get<int>();
        row.max_primal_residual = jr.at("max_primal_residual").get<double>();
        row.rho = jr.at("rho").get<double>();
        row.max_subproblem_time_s = 0.0;
        row.objective = jr.at("objective").get<double>();
        s.trace.push_back(row);
      }
    }
    s.costs = costs_from_json(js.at("costs"));
    rep.stages.push_back(std::move(s));
  }
  for (const auto& jl : j.at("loads")) {
    LoadSolution sol;
    sol.id = jl.at("id").get<std::string>();
    sol.bus = jl.at("bus").get<std::string>();
    sol.phase = phase_from_label(jl.at("phase").get<std::string>().at(0));
    sol.x = jl.at("x").get<std::vector<double>>();
    sol.costs = costs_from_json(jl.at("costs"));
    sol.inj_p = jl.at("inj_p").get<std::vector<double>>();
    sol.inj_q = jl.at("inj_q").get<std::vector<double>>();
    rep.loads.push_back(std::move(sol));
  }
  if (j.contains("violations")) {
    rep.has_violations = true;
    rep.upper = stats_from_json(j.at("violations").at("upper"));
    rep.lower = stats_from_json(j.at("violations").at("lower"));
  }
  if (j.contains("metrics")) {
    rep.has_metrics = true;
    rep.metrics_nlp.obj_gap_pct = j.at("metrics").at("nlp_obj_gap_pct").get<double>();
    rep.metrics_comp.obj_gap_pct = j.at("metrics").at("comp_obj_gap_pct").get<double>();
  }
  return rep;
}

}  // namespace desgn
