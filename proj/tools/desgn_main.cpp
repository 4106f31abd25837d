#include <iostream>

#include "CLI11.hpp"
#include "desgn/feeder.hpp"
#include "desgn/pipeline.hpp"

namespace {

// exit codes: 0 ok, 2 config error, 3 stage failure, 4 non-convergence
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kStageFailure = 3;
constexpr int kNonConvergence = 4;

void print_summary(const desgn::RunReport& rep) {
  for (const auto& s : rep.stages) {
    std::cout << "stage " << s.name << ": objective " << s.objective << " GBP";
    if (s.distributed)
      std::cout << " (admm iters " << s.admm_iterations << ", residual "
                << s.admm_final_residual << ")";
    std::cout << (s.converged ? "" : "  [not converged]") << "\n";
  }
  if (rep.has_violations) {
    std::cout << "voltage upper: max " << rep.upper.max_violation_pct << "% avg "
              << rep.upper.avg_violation_pct << "% violated " << rep.upper.pct_violated
              << "%\n";
    std::cout << "voltage lower: max " << rep.lower.max_violation_pct << "% avg "
              << rep.lower.avg_violation_pct << "% violated " << rep.lower.pct_violated
              << "%\n";
  }
  if (rep.has_metrics)
    std::cout << "objective gap vs reference: nlp " << rep.metrics_nlp.obj_gap_pct
              << "% comp " << rep.metrics_comp.obj_gap_pct << "%\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed energy system design on unbalanced LV feeders"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report_path, network_dir, timings_path, reference_path;
  std::string partition_out = "partition.json";
  int k = 2;
  uint64_t seed = 0;
  bool seed_set = false;

  CLI::App* central = app.add_subcommand("central", "staged solve on the whole network");
  central->add_option("--config", config_path, "run configuration json")->required();
  central->add_option("--out", out_dir, "output directory");
  central->add_option("--seed", seed, "override the configured seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* distributed =
      app.add_subcommand("distributed", "consensus solve over a spatial partition");
  distributed->add_option("--config", config_path, "run configuration json")->required();
  distributed->add_option("--out", out_dir, "output directory");
  distributed->add_option("--seed", seed, "override the configured seed")
      ->each([&](const std::string&) { seed_set = true; });
  distributed->add_option("--reference", reference_path,
                          "central report.json for gap/time metrics");

  CLI::App* validate = app.add_subcommand("validate", "power-flow check of a report");
  validate->add_option("--report", report_path, "report.json to validate")->required();
  validate->add_option("--network", network_dir, "feeder directory")->required();
  validate->add_option("--out", out_dir, "output directory for violations.csv");

  CLI::App* partition = app.add_subcommand("partition", "balance buses across partitions");
  partition->add_option("--network", network_dir, "feeder directory")->required();
  partition->add_option("-k", k, "number of partitions")->required();
  partition->add_option("--timings", timings_path, "timing_samples.csv");
  partition->add_option("--out", partition_out, "partition json path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (central->parsed() || distributed->parsed()) {
      desgn::RunConfig cfg;
      try {
        cfg = desgn::load_run_config(config_path);
        cfg.mode = central->parsed() ? "central" : "distributed";
        if (seed_set) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
      }

      desgn::RunReport rep;
      try {
        if (central->parsed()) {
          rep = desgn::run_central(cfg);
        } else {
          if (!reference_path.empty()) {
            desgn::RunReport ref = desgn::load_report(reference_path);
            rep = desgn::run_distributed(cfg, &ref);
          } else {
            rep = desgn::run_distributed(cfg);
          }
        }
      } catch (const std::exception& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kStageFailure;
      }
      if (!cfg.out_dir.empty()) desgn::emit_report(rep, cfg.out_dir);
      print_summary(rep);
      return rep.converged_all ? kOk : kNonConvergence;
    }

    if (validate->parsed()) {
      desgn::RunReport rep;
      desgn::Network net;
      try {
        rep = desgn::load_report(report_path);
        net = desgn::parse_network(network_dir, rep.cfg.s_base_mva);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
      }
      desgn::ValidationResult val = desgn::validate_run(rep, net);
      std::cout << "upper: max " << val.upper.max_violation_pct << "% avg "
                << val.upper.avg_violation_pct << "% violated " << val.upper.pct_violated
                << "%\n";
      std::cout << "lower: max " << val.lower.max_violation_pct << "% avg "
                << val.lower.avg_violation_pct << "% violated " << val.lower.pct_violated
                << "%\n";
      if (!out_dir.empty()) {
        rep.has_violations = true;
        rep.upper = val.upper;
        rep.lower = val.lower;
        rep.violation_entries = val.entries;
        desgn::emit_report(rep, out_dir);
      }
      if (!val.newton_converged) {
        std::cerr << "power flow did not converge on " << val.failed_timepoints.size()
                  << " timepoints\n";
        return kNonConvergence;
      }
      return kOk;
    }

    if (partition->parsed()) {
      desgn::Network net;
      desgn::RegressionModel model;
      try {
        net = desgn::parse_network(network_dir);
        if (!timings_path.empty()) {
          model = desgn::fit_regression(desgn::load_timing_samples(timings_path));
        } else {
          model.load_coef << 0.05, 0.01, 0.2;
          model.noload_coef << 0.01, 0.002;
        }
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
      }
      desgn::Partition part = desgn::optimize_partition(
          net, k, desgn::auto_preassign(net, k), model, desgn::PartitionOptions{}, 1);
      desgn::save_partition_json(part, net, partition_out);
      std::cout << "wrote " << partition_out << " (" << part.groups.size() << " groups, "
                << part.tie_lines.size() << " tie lines)\n";
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStageFailure;
  }
  return kOk;
}
