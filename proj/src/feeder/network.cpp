#include "desgn/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace desgn {

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(s);
    while (std::getline(ss, field, ',')) {
      auto b = field.find_first_not_of(" \t\r");
      auto e = field.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!s.empty() && s.back() == ',') out.push_back("");
    return out;
  };
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!have_header) {
      table.header = split(line);
      have_header = true;
    } else {
      table.rows.push_back(split(line));
    }
  }
  if (!have_header) throw InputError("missing header row: " + path);
  return table;
}

double parse_double(const std::string& field, const std::string& context) {
  try {
    size_t pos = 0;
    double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad numeric field '" + field + "' in " + context);
  }
}

int parse_int(const std::string& field, const std::string& context) {
  try {
    size_t pos = 0;
    int v = std::stoi(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad integer field '" + field + "' in " + context);
  }
}

char phase_label(Phase p) { return "ABC"[static_cast<int>(p)]; }

Phase phase_from_label(char c) {
  switch (c) {
    case 'A': case 'a': return Phase::A;
    case 'B': case 'b': return Phase::B;
    case 'C': case 'c': return Phase::C;
    default: throw InputError(std::string("unknown phase label '") + c + "'");
  }
}

PhaseSet PhaseSet::parse(const std::string& s) {
  PhaseSet ps;
  for (char c : s) ps.add(phase_from_label(c));
  if (ps.empty()) throw InputError("empty phase set");
  return ps;
}

int PhaseSet::count() const {
  int n = 0;
  for (Phase p : kPhases) n += has(p) ? 1 : 0;
  return n;
}

std::string PhaseSet::str() const {
  std::string s;
  for (Phase p : kPhases)
    if (has(p)) s += phase_label(p);
  return s;
}

int Network::bus_index(const std::string& id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  return -1;
}

void Network::validate(bool radial) const {
  std::unordered_set<std::string> seen;
  int n_slack = 0;
  for (const auto& b : buses) {
    if (!seen.insert(b.id).second) throw InputError("duplicate bus id: " + b.id);
    if (b.phases.empty()) throw InputError("bus with no phases: " + b.id);
    if (b.kind == BusKind::Slack) ++n_slack;
    if (b.v_base_v <= 0) throw InputError("non-positive v_base on bus " + b.id);
  }
  if (n_slack != 1) throw InputError("network must have exactly one slack bus");
  if (slack < 0 || buses[slack].kind != BusKind::Slack)
    throw InputError("slack index inconsistent");

  for (const auto& br : branches) {
    if (br.from < 0 || br.from >= static_cast<int>(buses.size()) ||
        br.to < 0 || br.to >= static_cast<int>(buses.size()))
      throw InputError("branch references unknown bus");
    if (br.from == br.to) throw InputError("self-loop branch on " + buses[br.from].id);
  }

  // Connectivity from the slack bus.
  if (!buses.empty()) {
    std::vector<std::vector<int>> adj(buses.size());
    for (const auto& br : branches) {
      adj[br.from].push_back(br.to);
      adj[br.to].push_back(br.from);
    }
    std::vector<char> vis(buses.size(), 0);
    std::queue<int> q;
    q.push(slack);
    vis[slack] = 1;
    size_t reached = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!vis[v]) {
          vis[v] = 1;
          ++reached;
          q.push(v);
        }
    }
    if (reached != buses.size()) throw InputError("network graph is disconnected");
  }

  if (radial && branches.size() + 1 != buses.size())
    throw InputError("radial feeder must satisfy |E| = |N|-1");

  size_t profile_len = loads.empty() ? 0 : loads.front().elec_profile.size();
  for (const auto& ld : loads) {
    if (ld.bus < 0 || ld.bus >= static_cast<int>(buses.size()))
      throw InputError("load on unknown bus: " + ld.id);
    if (buses[ld.bus].kind != BusKind::Load)
      throw InputError("load " + ld.id + " attached to non-load bus " + buses[ld.bus].id);
    if (!buses[ld.bus].phases.has(ld.phase))
      throw InputError("load " + ld.id + " uses a phase absent on bus " + buses[ld.bus].id);
    if (ld.elec_profile.size() != ld.heat_profile.size() ||
        ld.elec_profile.size() != profile_len)
      throw InputError("profile length mismatch for load " + ld.id);
    for (double v : ld.elec_profile)
      if (v < 0) throw InputError("negative electrical profile entry for " + ld.id);
    for (double v : ld.heat_profile)
      if (v < 0) throw InputError("negative heat profile entry for " + ld.id);
  }
}

namespace {

// Indices of exactly-zero rows (and columns) in a complex 3x3.
PhaseSet present_phases(const Eigen::Matrix3cd& z) {
  PhaseSet ps;
  for (int r = 0; r < 3; ++r) {
    bool nonzero = false;
    for (int c = 0; c < 3; ++c)
      if (z(r, c) != std::complex<double>(0.0, 0.0)) nonzero = true;
    if (nonzero) ps.add(static_cast<Phase>(r));
  }
  return ps;
}

}  // namespace

std::pair<Eigen::Matrix3d, Eigen::Matrix3d> assemble_branch_admittance(
    const Eigen::Matrix3cd& z_ohm_per_km, double length_km, double v_base_v,
    double s_base_mva) {
  if (length_km <= 0) throw ModelError("branch length must be positive");
  PhaseSet ps = present_phases(z_ohm_per_km);
  if (ps.empty()) throw ModelError("impedance matrix has no present phases");
  int n = ps.count();

  Eigen::MatrixXcd zsub(n, n);
  std::vector<int> idx;
  for (int r = 0; r < 3; ++r)
    if (ps.has(static_cast<Phase>(r))) idx.push_back(r);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) zsub(r, c) = z_ohm_per_km(idx[r], idx[c]) * length_km;

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(zsub);
  if (!lu.isInvertible()) throw ModelError("singular impedance submatrix");
  Eigen::MatrixXcd ysub = lu.inverse();
  if (zsub.isApprox(zsub.transpose()))
    ysub = ((ysub + ysub.transpose()) / 2.0).eval();  // inverse of symmetric is symmetric

  double z_base = v_base_v * v_base_v / (s_base_mva * 1e6);
  ysub *= z_base;  // Y_pu = Y_siemens * Z_base

  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      G(idx[r], idx[c]) = ysub(r, c).real();
      B(idx[r], idx[c]) = ysub(r, c).imag();
    }
  return {G, B};
}

Eigen::Matrix3cd branch_impedance_ohm_per_km(const Eigen::Matrix3d& G,
                                             const Eigen::Matrix3d& B,
                                             double length_km, double v_base_v,
                                             double s_base_mva) {
  PhaseSet ps;
  for (int r = 0; r < 3; ++r)
    if (G.row(r).cwiseAbs().sum() + B.row(r).cwiseAbs().sum() > 0)
      ps.add(static_cast<Phase>(r));
  int n = ps.count();
  std::vector<int> idx;
  for (int r = 0; r < 3; ++r)
    if (ps.has(static_cast<Phase>(r))) idx.push_back(r);

  Eigen::MatrixXcd ysub(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      ysub(r, c) = std::complex<double>(G(idx[r], idx[c]), B(idx[r], idx[c]));

  double z_base = v_base_v * v_base_v / (s_base_mva * 1e6);
  Eigen::MatrixXcd zsub = (ysub / z_base).inverse() / length_km;

  Eigen::Matrix3cd Z = Eigen::Matrix3cd::Zero();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) Z(idx[r], idx[c]) = zsub(r, c);
  return Z;
}

}  // namespace desgn
