#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "desgn/common.hpp"

namespace desgn {

/// Phase labels; ordering A < B < C is fixed and used for all vector layouts.
enum class Phase : int { A = 0, B = 1, C = 2 };

constexpr std::array<Phase, 3> kPhases{Phase::A, Phase::B, Phase::C};

char phase_label(Phase p);
Phase phase_from_label(char c);

/// Bit set over {A,B,C}.
struct PhaseSet {
  unsigned bits = 0;

  static PhaseSet parse(const std::string& s);
  void add(Phase p) { bits |= 1u << static_cast<int>(p); }
  bool has(Phase p) const { return bits & (1u << static_cast<int>(p)); }
  int count() const;
  bool empty() const { return bits == 0; }
  std::string str() const;
};

enum class BusKind { Slack, Load, Junction };

struct Bus {
  std::string id;
  BusKind kind = BusKind::Junction;
  PhaseSet phases;
  double v_base_v = 416.0;
};

/// Series branch admittance in per-unit, split into conductance and
/// susceptance 3x3 blocks. Rows/cols of absent phases are zero.
struct Branch {
  int from = -1;  // bus index
  int to = -1;
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
  PhaseSet phases;  // phases present on the branch
};

struct LoadPoint {
  std::string id;
  int bus = -1;
  Phase phase = Phase::A;
  std::vector<double> elec_profile;  // kWh per timepoint
  std::vector<double> heat_profile;  // kWh per timepoint
};

struct Network {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<LoadPoint> loads;
  double s_base_mva = 0.8;
  int slack = -1;  // index into buses

  int bus_index(const std::string& id) const;  // -1 when unknown

  /// Validates the structural invariants: unique ids, one slack, connected
  /// graph, branch endpoints, load phase membership, profile lengths.
  /// When `radial` is set, additionally requires |E| == |N|-1.
  void validate(bool radial = true) const;
};

/// Converts a series impedance line code (ohm/km, 3x3 complex, row-major
/// phase order A,B,C) into per-unit G and B for a branch of given length.
/// Absent phases are passed as exactly-zero rows/columns and stay zero in
/// the result; the present-phase submatrix must be invertible.
///
/// Z_base = v_base^2 / (s_base * 1e6).
std::pair<Eigen::Matrix3d, Eigen::Matrix3d> assemble_branch_admittance(
    const Eigen::Matrix3cd& z_ohm_per_km, double length_km, double v_base_v,
    double s_base_mva);

/// Inverse of assemble_branch_admittance: per-unit (G,B) back to ohm/km.
Eigen::Matrix3cd branch_impedance_ohm_per_km(const Eigen::Matrix3d& G,
                                             const Eigen::Matrix3d& B,
                                             double length_km, double v_base_v,
                                             double s_base_mva);

}  // namespace desgn
