#pragma once

#include <string>
#include <vector>

#include "desgn/network.hpp"

namespace desgn {

/// Loads a feeder description directory (buses.csv, branches.csv, loads.csv,
/// profiles.csv) and returns a validated Network with per-unit admittances.
///
/// File schemas:
///   buses.csv     id,kind,phases,v_base_v
///   branches.csv  from,to,r_ohm_per_km[9],x_ohm_per_km[9],length_km
///   loads.csv     load_id,bus_id,phase
///   profiles.csv  load_id,kind,t0,t1,...        kind in {elec, heat}
Network parse_network(const std::string& dir, double s_base_mva = 0.8);

/// Environmental series for a feeder directory (env.csv: kind,t0,t1,... with
/// kinds irr and tamb). Needed by the DES model, not by power flow.
struct EnvSeries {
  std::vector<double> irradiance;   // kW/m^2 per timepoint
  std::vector<double> temperature;  // degC per timepoint
};

EnvSeries parse_env(const std::string& dir);

/// Reduces a network to the minimal connected subgraph containing the slack
/// bus and the given loads. Spur branches not on any slack-to-load path are
/// dropped, as are their buses. Bus kinds of former load buses whose loads
/// were not kept degrade to junctions.
Network derive_subfeeder(const Network& net, const std::vector<std::string>& keep_loads);

}  // namespace desgn
