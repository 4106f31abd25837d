#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "desgn/admm.hpp"

namespace desgn {

struct TimingSample {
  std::string kind;  // "load" or "noload"
  int n_buses = 0;
  int n_loads = 0;
  int timepoints = 1;
  double observed_time_s = 0.0;
};

std::vector<TimingSample> load_timing_samples(const std::string& path);

/// Per-kind least-squares solve-time model:
///   load:   t = a0 + a1*n_buses + a2*n_loads
///   noload: t = b0 + b1*n_buses
struct RegressionModel {
  Eigen::Vector3d load_coef = Eigen::Vector3d::Zero();
  Eigen::Vector2d noload_coef = Eigen::Vector2d::Zero();
  double r2_load = 0.0;
  double r2_noload = 0.0;

  double predict_load(int n_buses, int n_loads) const {
    return load_coef[0] + load_coef[1] * n_buses + load_coef[2] * n_loads;
  }
  double predict_noload(int n_buses) const {
    return noload_coef[0] + noload_coef[1] * n_buses;
  }
};

RegressionModel fit_regression(const std::vector<TimingSample>& samples);

struct PartitionOptions {
  int max_buses = 64;        // cap per load partition
  int close_branches = 2;    // loads this close must share a partition
};

/// Groups loads that sit within `close_branches` of each other, then spreads
/// the clusters over groups 1..k-1 (group 0 is the trunk partition).
std::map<std::string, int> auto_preassign(const Network& net, int k,
                                          int close_branches = 2);

/// Assigns every bus to one of k partitions: group 0 holds the trunk
/// (buses on slack-to-branching-bus paths) plus whatever spur buses the
/// optimiser leaves out; groups 1..k-1 hold the loads named in `preassign`
/// and grow along their spur chains up to (not including) branching buses.
/// The exact search minimises the sum of squared differences between
/// predicted solve times.
Partition optimize_partition(const Network& net, int k,
                             const std::map<std::string, int>& preassign,
                             const RegressionModel& model, const PartitionOptions& opts,
                             int timepoints);

}  // namespace desgn
