#include <algorithm>
#include <unordered_map>

#include "desgn/feeder.hpp"

namespace desgn {

namespace {

void expect_header(const CsvTable& t, const std::vector<std::string>& want,
                   const std::string& file) {
  if (t.header.size() < want.size())
    throw InputError("short header in " + file);
  for (size_t i = 0; i < want.size(); ++i)
    if (t.header[i] != want[i])
      throw InputError("unexpected column '" + t.header[i] + "' in " + file +
                       " (expected '" + want[i] + "')");
}

}  // namespace

Network parse_network(const std::string& dir, double s_base_mva) {
  Network net;
  net.s_base_mva = s_base_mva;

  // --- buses ---
  CsvTable buses = read_csv(dir + "/buses.csv");
  expect_header(buses, {"id", "kind", "phases", "v_base_v"}, "buses.csv");
  for (const auto& row : buses.rows) {
    if (row.size() != 4) throw InputError("bad row width in buses.csv");
    Bus b;
    b.id = row[0];
    if (row[1] == "slack") b.kind = BusKind::Slack;
    else if (row[1] == "load") b.kind = BusKind::Load;
    else if (row[1] == "junction") b.kind = BusKind::Junction;
    else throw InputError("unknown bus kind '" + row[1] + "'");
    b.phases = PhaseSet::parse(row[2]);
    b.v_base_v = parse_double(row[3], "buses.csv");
    if (b.kind == BusKind::Slack) {
      if (net.slack >= 0) throw InputError("multiple slack buses");
      net.slack = static_cast<int>(net.buses.size());
    }
    net.buses.push_back(std::move(b));
  }
  if (net.slack < 0) throw InputError("no slack bus in buses.csv");

  std::unordered_map<std::string, int> bus_of;
  for (size_t i = 0; i < net.buses.size(); ++i) {
    if (bus_of.count(net.buses[i].id))
      throw InputError("duplicate bus id: " + net.buses[i].id);
    bus_of[net.buses[i].id] = static_cast<int>(i);
  }

  // --- branches ---
  CsvTable branches = read_csv(dir + "/branches.csv");
  if (branches.header.size() != 2 + 9 + 9 + 1)
    throw InputError("branches.csv must have 21 columns");
  for (const auto& row : branches.rows) {
    if (row.size() != 21) throw InputError("bad row width in branches.csv");
    auto itf = bus_of.find(row[0]);
    auto itt = bus_of.find(row[1]);
    if (itf == bus_of.end()) throw InputError("unknown bus '" + row[0] + "' in branches.csv");
    if (itt == bus_of.end()) throw InputError("unknown bus '" + row[1] + "' in branches.csv");
    Eigen::Matrix3cd z;
    for (int k = 0; k < 9; ++k) {
      double r = parse_double(row[2 + k], "branches.csv");
      double x = parse_double(row[11 + k], "branches.csv");
      z(k / 3, k % 3) = std::complex<double>(r, x);
    }
    double length = parse_double(row[20], "branches.csv");
    Branch br;
    br.from = itf->second;
    br.to = itt->second;
    double v_base = net.buses[br.from].v_base_v;
    auto [G, B] = assemble_branch_admittance(z, length, v_base, s_base_mva);
    br.G = G;
    br.B = B;
    for (int r = 0; r < 3; ++r)
      if (G.row(r).cwiseAbs().sum() + B.row(r).cwiseAbs().sum() > 0)
        br.phases.add(static_cast<Phase>(r));
    net.branches.push_back(std::move(br));
  }

  // --- loads ---
  CsvTable loads = read_csv(dir + "/loads.csv");
  expect_header(loads, {"load_id", "bus_id", "phase"}, "loads.csv");
  std::unordered_map<std::string, int> load_of;
  for (const auto& row : loads.rows) {
    if (row.size() != 3) throw InputError("bad row width in loads.csv");
    auto it = bus_of.find(row[1]);
    if (it == bus_of.end()) throw InputError("unknown bus '" + row[1] + "' in loads.csv");
    if (row[2].size() != 1) throw InputError("load phase must be a single letter");
    LoadPoint ld;
    ld.id = row[0];
    ld.bus = it->second;
    ld.phase = phase_from_label(row[2][0]);
    if (load_of.count(ld.id)) throw InputError("duplicate load id: " + ld.id);
    load_of[ld.id] = static_cast<int>(net.loads.size());
    net.loads.push_back(std::move(ld));
  }

  // --- profiles ---
  CsvTable profiles = read_csv(dir + "/profiles.csv");
  if (profiles.header.size() < 3 || profiles.header[0] != "load_id" ||
      profiles.header[1] != "kind")
    throw InputError("profiles.csv must start with load_id,kind");
  for (const auto& row : profiles.rows) {
    if (row.size() < 3) throw InputError("bad row width in profiles.csv");
    auto it = load_of.find(row[0]);
    if (it == load_of.end()) throw InputError("unknown load '" + row[0] + "' in profiles.csv");
    std::vector<double> vals;
    for (size_t k = 2; k < row.size(); ++k)
      vals.push_back(parse_double(row[k], "profiles.csv"));
    if (row[1] == "elec") net.loads[it->second].elec_profile = std::move(vals);
    else if (row[1] == "heat") net.loads[it->second].heat_profile = std::move(vals);
    else throw InputError("unknown profile kind '" + row[1] + "'");
  }
  for (const auto& ld : net.loads)
    if (ld.elec_profile.empty() || ld.heat_profile.empty())
      throw InputError("missing elec or heat profile for load " + ld.id);

  net.validate(/*radial=*/true);
  return net;
}

EnvSeries parse_env(const std::string& dir) {
  CsvTable env = read_csv(dir + "/env.csv");
  if (env.header.empty() || env.header[0] != "kind")
    throw InputError("env.csv must start with a kind column");
  EnvSeries out;
  for (const auto& row : env.rows) {
    std::vector<double> vals;
    for (size_t k = 1; k < row.size(); ++k)
      vals.push_back(parse_double(row[k], "env.csv"));
    if (row[0] == "irr") out.irradiance = std::move(vals);
    else if (row[0] == "tamb") out.temperature = std::move(vals);
    else throw InputError("unknown env kind '" + row[0] + "'");
  }
  if (out.irradiance.empty() || out.temperature.empty())
    throw InputError("env.csv needs irr and tamb rows");
  if (out.irradiance.size() != out.temperature.size())
    throw InputError("env.csv rows differ in length");
  return out;
}

}  // namespace desgn
