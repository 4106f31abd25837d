#include "desgn/timeline.hpp"

#include <fstream>

#include "desgn/common.hpp"
#include "json.hpp"

namespace desgn {

int Timeline::total_timepoints() const {
  int t = 0;
  for (const auto& s : seasons) t += s.hours_per_day;
  return t;
}

int Timeline::season_of(int t) const {
  int acc = 0;
  for (size_t s = 0; s < seasons.size(); ++s) {
    acc += seasons[s].hours_per_day;
    if (t < acc) return static_cast<int>(s);
  }
  throw ModelError("timepoint out of range");
}

int Timeline::block_start(int s) const {
  int acc = 0;
  for (int k = 0; k < s; ++k) acc += seasons[k].hours_per_day;
  return acc;
}

int Timeline::block_end(int s) const { return block_start(s) + seasons[s].hours_per_day; }

int Timeline::hour_of_day(int t) const {
  int s = season_of(t);
  return (seasons[s].start_hour + (t - block_start(s))) % 24;
}

int Timeline::n_normal_seasons() const {
  int n = 0;
  for (size_t s = 0; s < seasons.size(); ++s)
    if (!is_robust(static_cast<int>(s))) ++n;
  return n;
}

int Timeline::first_normal_season() const {
  for (size_t s = 0; s < seasons.size(); ++s)
    if (!is_robust(static_cast<int>(s))) return static_cast<int>(s);
  throw ModelError("timeline has no normal season");
}

void Timeline::validate() const {
  if (seasons.empty()) throw InputError("timeline has no seasons");
  if (dt_hours <= 0) throw InputError("dt must be positive");
  for (const auto& s : seasons) {
    if (s.hours_per_day <= 0) throw InputError("season with no timepoints: " + s.name);
    if (s.n_day < 0) throw InputError("negative n_day: " + s.name);
  }
  if (robust_index && (*robust_index < 0 || *robust_index >= static_cast<int>(seasons.size())))
    throw InputError("robust_index out of range");
  if (n_normal_seasons() == 0) throw InputError("timeline needs at least one normal season");
}

Timeline load_timeline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open timeline file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("bad timeline json: " + std::string(e.what()));
  }
  Timeline tl;
  tl.dt_hours = j.value("dt", 1.0);
  if (j.contains("robust_index") && !j["robust_index"].is_null())
    tl.robust_index = j["robust_index"].get<int>();
  for (const auto& js : j.at("seasons")) {
    Season s;
    s.name = js.at("name").get<std::string>();
    s.n_day = js.at("n_day").get<int>();
    s.hours_per_day = js.at("hours_per_day").get<int>();
    s.start_hour = js.value("start_hour", 0);
    tl.seasons.push_back(std::move(s));
  }
  tl.validate();
  return tl;
}

}  // namespace desgn
