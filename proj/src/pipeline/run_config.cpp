#include <filesystem>
#include <fstream>

#include "desgn/pipeline.hpp"
#include "json.hpp"

namespace desgn {

bool RunConfig::run_stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s == name) return true;
  return false;
}

void RunConfig::validate() const {
  static const std::vector<std::string> order = {"milp", "nlp", "comp"};
  if (stages.empty() || stages.size() > order.size())
    throw InputError("stages must be a non-empty prefix of milp,nlp,comp");
  for (size_t i = 0; i < stages.size(); ++i)
    if (stages[i] != order[i])
      throw InputError("stages must form a prefix of milp,nlp,comp");
  if (mode != "central" && mode != "distributed")
    throw InputError("mode must be central or distributed");
  if (mode == "distributed") {
    if (partition_source != "file" && partition_source != "auto")
      throw InputError("distributed mode needs a partition source (file or auto)");
    if (partition_source == "file" && partition_path.empty())
      throw InputError("partition source 'file' needs a path");
    if (partition_source == "auto" && partition_k < 1)
      throw InputError("partition source 'auto' needs k >= 1");
  }
  if (network_dir.empty() || catalog_path.empty() || timeline_path.empty())
    throw InputError("config must name network, catalog and timeline");
  if (v_min <= 0 || v_max <= v_min) throw InputError("bad voltage band");
  admm.validate();
  comp.validate();
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("bad config json: " + std::string(e.what()));
  }

  namespace fs = std::filesystem;
  fs::path base = fs::path(path).parent_path();
  auto resolve = [&](std::string p) {
    if (p.empty()) return p;
    fs::path fp(p);
    return fp.is_absolute() ? p : (base / fp).string();
  };

  RunConfig cfg;
  cfg.network_dir = resolve(j.at("network").get<std::string>());
  cfg.catalog_path = resolve(j.at("catalog").get<std::string>());
  cfg.timeline_path = resolve(j.at("timeline").get<std::string>());
  cfg.mode = j.value("mode", "central");
  if (j.contains("stages")) {
    cfg.stages.clear();
    for (const auto& s : j.at("stages")) cfg.stages.push_back(s.get<std::string>());
  }
  cfg.s_base_mva = j.value("s_base_mva", 0.8);
  cfg.v_max = j.value("v_max", 1.05);
  cfg.v_min = j.value("v_min", 0.95);
  cfg.seed = j.value("seed", 0ull);
  if (j.contains("out")) cfg.out_dir = resolve(j.at("out").get<std::string>());

  if (j.contains("nlp")) {
    const auto& jn = j.at("nlp");
    cfg.nlp.tol = jn.value("tol", cfg.nlp.tol);
    cfg.nlp.feas_tol = jn.value("feas_tol", cfg.nlp.feas_tol);
    cfg.nlp.max_outer = jn.value("max_outer", cfg.nlp.max_outer);
  }
  if (j.contains("comp")) {
    const auto& jc = j.at("comp");
    cfg.comp.eps0 = jc.value("eps0", cfg.comp.eps0);
    cfg.comp.shrink = jc.value("shrink", cfg.comp.shrink);
    cfg.comp.threshold = jc.value("threshold", cfg.comp.threshold);
  }
  if (j.contains("admm")) {
    const auto& ja = j.at("admm");
    cfg.admm.beta = ja.value("beta", cfg.admm.beta);
    cfg.admm.zeta = ja.value("zeta", cfg.admm.zeta);
    cfg.admm_eps0_nlp = ja.value("eps0_nlp", cfg.admm_eps0_nlp);
    cfg.admm_eps0_comp = ja.value("eps0_comp", cfg.admm_eps0_comp);
    cfg.admm.kappa = ja.value("kappa", cfg.admm.kappa);
    cfg.admm.tau = ja.value("tau", cfg.admm.tau);
    cfg.admm.lambda_min = ja.value("lambda_min", cfg.admm.lambda_min);
    cfg.admm.lambda_max = ja.value("lambda_max", cfg.admm.lambda_max);
    cfg.admm.conv_threshold = ja.value("conv_threshold", cfg.admm.conv_threshold);
    cfg.admm.max_iters = ja.value("max_iters", cfg.admm.max_iters);
    cfg.admm.use_beta_prox = ja.value("use_beta_prox", cfg.admm.use_beta_prox);
    cfg.admm.use_zeta_damping = ja.value("use_zeta_damping", cfg.admm.use_zeta_damping);
  }
  if (j.contains("partition")) {
    const auto& jp = j.at("partition");
    cfg.partition_source = jp.value("source", "auto");
    if (jp.contains("path")) cfg.partition_path = resolve(jp.at("path").get<std::string>());
    cfg.partition_k = jp.value("k", 1);
  }

  cfg.validate();
  return cfg;
}

}  // namespace desgn
