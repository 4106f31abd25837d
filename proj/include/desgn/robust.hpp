#pragma once

#include <vector>

namespace desgn {

struct RobustProfiles {
  std::vector<double> elec;         // kWh per hour
  std::vector<double> heat;         // kWh per hour
  std::vector<double> irradiance;   // kW/m^2 per hour
  std::vector<double> temperature;  // degC per hour
  int heat_day = -1;                // winter day picked for heat
  int temp_day = -1;                // winter day picked for temperature
};

/// Builds the extreme-day profiles used for sizing robustness:
///   elec: winter hourly values plus 1.05 kW (three standard deviations of
///         monitored mean daily load) times dt,
///   heat: the winter day with the largest total heat demand,
///   irradiance: the winter (already averaged) hourly values,
///   temperature: the winter day with the lowest mean temperature.
/// Ties pick the first day.
RobustProfiles make_robust_season(const std::vector<double>& winter_elec,
                                  const std::vector<std::vector<double>>& heat_days,
                                  const std::vector<double>& irr_winter,
                                  const std::vector<std::vector<double>>& temp_days,
                                  double dt_hours = 1.0);

}  // namespace desgn
