#include <chrono>
#include <cmath>
#include <future>

#include "desgn/admm.hpp"

namespace desgn {

void AdmmParams::validate() const {
  if (!(tau > 1.0)) throw ModelError("admm tau must exceed 1");
  if (!(kappa > 0 && kappa < 1)) throw ModelError("admm kappa must be in (0,1)");
  if (!(lambda_min < lambda_max)) throw ModelError("admm lambda bounds inverted");
  if (!(conv_threshold > 0)) throw ModelError("admm convergence threshold must be positive");
  if (max_iters < 1) throw ModelError("admm needs at least one iteration");
}

AlResult x_update(SubproblemSpec& spec, const Eigen::VectorXd& z_local,
                  const Eigen::VectorXd& lambda_local, double rho,
                  const AlOptions& al_opts) {
  if (spec.prob.consensus) {
    auto& rows = spec.prob.consensus->rows;
    if (static_cast<int>(rows.size()) != z_local.size())
      throw ModelError("consensus row count mismatch in x-update");
    for (size_t i = 0; i < rows.size(); ++i) {
      rows[i].z = z_local[i];
      rows[i].lambda = lambda_local[i];
    }
    spec.prob.consensus->rho = rho;
  }
  const Eigen::VectorXd* warm =
      spec.al_lambda.size() ? &spec.al_lambda : nullptr;
  AlResult res = solve_augmented(spec.prob, spec.x, al_opts, warm);
  spec.x = res.x;
  spec.al_lambda = res.lambda;
  return res;
}

namespace {

double row_value(const ConsensusPenalty::Row& row, const Eigen::VectorXd& x) {
  double v = 0;
  for (auto [i, c] : row.terms) v += c * x[i];
  return v;
}

}  // namespace

Eigen::VectorXd z_update(const std::vector<SubproblemSpec>& specs,
                         const ConsensusLayout& layout, double rho) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(layout.rows());
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(layout.rows());
  for (size_t si = 0; si < specs.size(); ++si) {
    if (!specs[si].prob.consensus) continue;
    const auto& rows = specs[si].prob.consensus->rows;
    for (size_t k = 0; k < rows.size(); ++k) {
      int r = layout.spec_rows[si][k];
      double contrib = row_value(rows[k], specs[si].x);
      if (rho > 0) contrib += layout.lambda[si][k] / rho;
      acc[r] += contrib;
      cnt[r] += 1.0;
    }
  }
  for (int r = 0; r < layout.rows(); ++r)
    if (cnt[r] > 0) acc[r] /= cnt[r];
  return acc;
}

bool lambda_update(std::vector<SubproblemSpec>& specs, ConsensusLayout& layout,
                   double rho, const AdmmParams& params) {
  bool clipped = false;
  double step_scale = params.use_zeta_damping ? params.zeta : 1.0;
  for (size_t si = 0; si < specs.size(); ++si) {
    if (!specs[si].prob.consensus) continue;
    const auto& rows = specs[si].prob.consensus->rows;
    for (size_t k = 0; k < rows.size(); ++k) {
      int r = layout.spec_rows[si][k];
      double resid = row_value(rows[k], specs[si].x) - layout.z[r];
      double next = layout.lambda[si][k] + step_scale * rho * resid;
      if (next < params.lambda_min) {
        next = params.lambda_min;
        clipped = true;
      } else if (next > params.lambda_max) {
        next = params.lambda_max;
        clipped = true;
      }
      layout.lambda[si][k] = next;
    }
  }
  return clipped;
}

double penalty_update(double rho, double residual, double prev_residual,
                      const AdmmParams& params) {
  if (residual > params.kappa * prev_residual) return rho * params.tau;
  return rho;
}

namespace {

double primal_residual(const std::vector<SubproblemSpec>& specs,
                       const ConsensusLayout& layout) {
  double m = 0;
  for (size_t si = 0; si < specs.size(); ++si) {
    if (!specs[si].prob.consensus) continue;
    const auto& rows = specs[si].prob.consensus->rows;
    for (size_t k = 0; k < rows.size(); ++k)
      m = std::max(m, std::abs(row_value(rows[k], specs[si].x) -
                               layout.z[layout.spec_rows[si][k]]));
  }
  return m;
}

double total_objective(const std::vector<SubproblemSpec>& specs, double scale) {
  double obj = 0;
  for (const auto& s : specs) obj += s.prob.c_lin.dot(s.x);
  return scale > 0 ? obj / scale : obj;
}

}  // namespace

AdmmResult admm_solve(std::vector<SubproblemSpec>& specs, ConsensusLayout& layout,
                      const AdmmStageConfig& cfg) {
  cfg.params.validate();
  AdmmResult out;
  double rho = cfg.params.eps0;
  double prev_res = std::numeric_limits<double>::infinity();

  layout.z = z_update(specs, layout, 0.0);  // plain average before iterating
  double scale = specs.empty() ? 1.0 : specs[0].scale;

  for (int iter = 1; iter <= cfg.params.max_iters; ++iter) {
    out.iterations = iter;

    // ---- x-updates, synchronous barrier ----
    std::vector<double> times(specs.size(), 0.0);
    auto solve_one = [&](size_t si) {
      auto t0 = std::chrono::steady_clock::now();
      SubproblemSpec& s = specs[si];
      Eigen::VectorXd z_loc(layout.spec_rows[si].size());
      for (size_t k = 0; k < layout.spec_rows[si].size(); ++k)
        z_loc[k] = layout.z[layout.spec_rows[si][k]];
      if (cfg.comp_stage && s.products && !s.comp_initialized) {
        if (s.prob.consensus) {
          auto& rows = s.prob.consensus->rows;
          for (size_t k = 0; k < rows.size(); ++k) {
            rows[k].z = z_loc[k];
            rows[k].lambda = layout.lambda[si][k];
          }
          s.prob.consensus->rho = rho;
        }
        CompResult cr = complementarity_pass(s.prob, s.products, cfg.comp_schedule, s.x,
                                             cfg.al, s.al_lambda.size() ? &s.al_lambda : nullptr);
        s.x = cr.x;
        s.al_lambda = cr.last.lambda;
        s.comp_initialized = true;
      } else {
        x_update(s, z_loc, layout.lambda[si], rho, cfg.al);
      }
      times[si] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (specs.size() > 1) {
      std::vector<std::future<void>> jobs;
      jobs.reserve(specs.size());
      for (size_t si = 0; si < specs.size(); ++si)
        jobs.push_back(std::async(std::launch::async, solve_one, si));
      for (auto& j : jobs) j.get();
    } else if (!specs.empty()) {
      solve_one(0);
    }

    // ---- coordination ----
    layout.z = z_update(specs, layout, rho);
    out.lambda_clipped |= lambda_update(specs, layout, rho, cfg.params);
    double res = primal_residual(specs, layout);
    double max_t = 0, sum_t = 0;
    for (double v : times) {
      max_t = std::max(max_t, v);
      sum_t += v;
    }
    out.parallel_time_s += max_t;
    out.total_cpu_time_s += sum_t;
    out.trace.push_back({iter, res, rho, max_t, total_objective(specs, scale)});
    out.final_residual = res;

    if (res <= cfg.params.conv_threshold) {
      out.converged = true;
      break;
    }
    rho = penalty_update(rho, res, prev_res, cfg.params);
    prev_res = res;
  }

  // exact complementarity recovery on load subproblems
  if (cfg.comp_stage) {
    for (auto& s : specs) {
      if (!s.products) continue;
      auto t0 = std::chrono::steady_clock::now();
      CompResult cr = fix_and_recover(s.prob, s.products, s.x, cfg.al,
                                      s.al_lambda.size() ? &s.al_lambda : nullptr);
      s.x = cr.x;
      s.al_lambda = cr.last.lambda;
      double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.parallel_time_s += dt;  // recovery runs once per load spec
      out.total_cpu_time_s += dt;
    }
    out.final_residual = primal_residual(specs, layout);
  }

  out.objective = total_objective(specs, scale);
  return out;
}

AdmmMetrics admm_metrics(double obj_admm, double obj_central, double t_admm_s,
                         double t_central_s) {
  if (obj_central == 0.0) throw ModelError("central objective is zero; gap undefined");
  AdmmMetrics m;
  m.obj_gap_pct = (obj_admm - obj_central) / obj_central * 100.0;
  m.t_ratio = t_central_s > 0 ? t_admm_s / t_central_s : 0.0;
  return m;
}

}  // namespace desgn
