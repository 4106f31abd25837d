#include "desgn/robust.hpp"

#include <numeric>

#include "desgn/common.hpp"

namespace desgn {

RobustProfiles make_robust_season(const std::vector<double>& winter_elec,
                                  const std::vector<std::vector<double>>& heat_days,
                                  const std::vector<double>& irr_winter,
                                  const std::vector<std::vector<double>>& temp_days,
                                  double dt_hours) {
  if (winter_elec.empty() || heat_days.empty() || irr_winter.empty() || temp_days.empty())
    throw ModelError("robust season inputs must be non-empty");

  RobustProfiles out;
  out.elec = winter_elec;
  for (double& v : out.elec) v += 1.05 * dt_hours;

  double best_heat = -1.0;
  for (size_t d = 0; d < heat_days.size(); ++d) {
    double total = std::accumulate(heat_days[d].begin(), heat_days[d].end(), 0.0);
    if (total > best_heat) {
      best_heat = total;
      out.heat_day = static_cast<int>(d);
    }
  }
  out.heat = heat_days[out.heat_day];

  out.irradiance = irr_winter;

  double best_temp = 0.0;
  for (size_t d = 0; d < temp_days.size(); ++d) {
    if (temp_days[d].empty()) throw ModelError("empty temperature day trace");
    double mean = std::accumulate(temp_days[d].begin(), temp_days[d].end(), 0.0) /
                  temp_days[d].size();
    if (out.temp_day < 0 || mean < best_temp) {
      best_temp = mean;
      out.temp_day = static_cast<int>(d);
    }
  }
  out.temperature = temp_days[out.temp_day];

  return out;
}

}  // namespace desgn
