// Generates the shipped feeder fixtures: small synthetic LV feeders with a
// three-phase trunk, service spurs, seasonal load/irradiance/temperature
// profiles and a derived extreme day for sizing robustness.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "desgn/robust.hpp"
#include "desgn/timeline.hpp"

namespace fs = std::filesystem;

namespace {

struct SeasonShape {
  std::string name;
  int n_day;
  int hours;
  int start_hour;
  std::vector<double> elec;  // per hour, kWh
  std::vector<double> heat;
  std::vector<double> irr;   // kW/m^2
  std::vector<double> tamb;  // degC
};

struct FeederPlan {
  std::string name;
  int trunk_len;
  // spur: attach trunk index (1-based), length, phases ("ABC" or single), load phase
  struct Spur {
    int attach;
    int len;
    std::string phases;
    char load_phase;
  };
  std::vector<Spur> spurs;
};

std::string csv9(double diag, double off) {
  std::string s;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) s += (r == c ? std::to_string(diag) : std::to_string(off)) + ",";
  s.pop_back();
  return s;
}

std::string csv9_single(double v, int phase) {
  std::string s;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      s += ((r == c && r == phase) ? std::to_string(v) : "0") + ",";
  s.pop_back();
  return s;
}

int phase_index(char c) { return c == 'A' ? 0 : (c == 'B' ? 1 : 2); }

void write_feeder(const fs::path& dir, const FeederPlan& plan,
                  const std::vector<SeasonShape>& seasons, int robust_index) {
  fs::create_directories(dir);

  // ---- buses & branches ----
  std::ofstream buses(dir / "buses.csv");
  std::ofstream branches(dir / "branches.csv");
  buses << "id,kind,phases,v_base_v\n";
  branches << "from,to,";
  for (int k = 0; k < 9; ++k) branches << "r" << k << ",";
  for (int k = 0; k < 9; ++k) branches << "x" << k << ",";
  branches << "length_km\n";

  buses << "b0,slack,ABC,416\n";
  std::string prev = "b0";
  const std::string trunk_r = csv9(0.45, 0.08), trunk_x = csv9(0.16, 0.05);
  for (int i = 1; i <= plan.trunk_len; ++i) {
    std::string id = "t" + std::to_string(i);
    buses << id << ",junction,ABC,416\n";
    branches << prev << "," << id << "," << trunk_r << "," << trunk_x << ",0.05\n";
    prev = id;
  }
  std::ofstream loads(dir / "loads.csv");
  loads << "load_id,bus_id,phase\n";
  int load_no = 0;
  for (size_t si = 0; si < plan.spurs.size(); ++si) {
    const auto& spur = plan.spurs[si];
    std::string up = "t" + std::to_string(spur.attach);
    bool three_phase = spur.phases == "ABC";
    std::string r9 = three_phase ? csv9(0.9, 0.0)
                                 : csv9_single(0.9, phase_index(spur.phases[0]));
    std::string x9 = three_phase ? csv9(0.15, 0.0)
                                 : csv9_single(0.15, phase_index(spur.phases[0]));
    for (int j = 1; j <= spur.len; ++j) {
      std::string id = "s" + std::to_string(si + 1) + "_" + std::to_string(j);
      bool is_load_bus = (j == spur.len);
      buses << id << "," << (is_load_bus ? "load" : "junction") << "," << spur.phases
            << ",416\n";
      branches << up << "," << id << "," << r9 << "," << x9 << ",0.03\n";
      up = id;
      if (is_load_bus) {
        ++load_no;
        loads << "L" << load_no << "," << id << "," << spur.load_phase << "\n";
      }
    }
  }

  // ---- profiles & environment ----
  const int n_loads = static_cast<int>(plan.spurs.size());
  std::vector<std::vector<double>> elec(n_loads), heat(n_loads);
  std::vector<double> irr_all, tamb_all;

  const SeasonShape& winter = seasons.front();
  for (size_t s = 0; s < seasons.size(); ++s) {
    const SeasonShape& season = seasons[s];
    if (static_cast<int>(s) == robust_index) {
      // extreme day derived from winter history (a spread of winter days
      // with growing heat demand and falling temperature), trimmed to the
      // robust block length
      size_t hours = static_cast<size_t>(season.hours);
      for (int li = 0; li < n_loads; ++li) {
        std::vector<double> welec = winter.elec;
        for (double& v : welec) v *= 1.0 + 0.08 * li;
        std::vector<std::vector<double>> heat_days, temp_days;
        for (int d = 0; d < 7; ++d) {
          std::vector<double> hd = winter.heat;
          for (double& v : hd) v *= (1.0 + 0.12 * li) * (0.9 + 0.05 * d);
          heat_days.push_back(std::move(hd));
          std::vector<double> td = winter.tamb;
          for (double& v : td) v -= 0.6 * d;
          temp_days.push_back(std::move(td));
        }
        desgn::RobustProfiles rp =
            desgn::make_robust_season(welec, heat_days, winter.irr, temp_days);
        elec[li].insert(elec[li].end(), rp.elec.begin(), rp.elec.begin() + hours);
        heat[li].insert(heat[li].end(), rp.heat.begin(), rp.heat.begin() + hours);
        if (li == 0) {
          irr_all.insert(irr_all.end(), rp.irradiance.begin(), rp.irradiance.begin() + hours);
          tamb_all.insert(tamb_all.end(), rp.temperature.begin(),
                          rp.temperature.begin() + hours);
        }
      }
      continue;
    }
    for (int li = 0; li < n_loads; ++li) {
      for (double v : season.elec) elec[li].push_back(v * (1.0 + 0.08 * li));
      for (double v : season.heat) heat[li].push_back(v * (1.0 + 0.12 * li));
    }
    irr_all.insert(irr_all.end(), season.irr.begin(), season.irr.end());
    tamb_all.insert(tamb_all.end(), season.tamb.begin(), season.tamb.end());
  }

  std::ofstream profiles(dir / "profiles.csv");
  profiles << "load_id,kind";
  for (size_t t = 0; t < elec[0].size(); ++t) profiles << ",t" << t;
  profiles << "\n";
  profiles.precision(6);
  for (int li = 0; li < n_loads; ++li) {
    profiles << "L" << (li + 1) << ",elec";
    for (double v : elec[li]) profiles << "," << v;
    profiles << "\nL" << (li + 1) << ",heat";
    for (double v : heat[li]) profiles << "," << v;
    profiles << "\n";
  }

  std::ofstream env(dir / "env.csv");
  env << "kind";
  for (size_t t = 0; t < irr_all.size(); ++t) env << ",t" << t;
  env << "\nirr";
  for (double v : irr_all) env << "," << v;
  env << "\ntamb";
  for (double v : tamb_all) env << "," << v;
  env << "\n";
}

std::vector<SeasonShape> seasons_t8() {
  return {
      {"winter", 365, 4, 5, {0.45, 0.55, 0.70, 0.80}, {1.8, 2.2, 2.6, 2.2},
       {0.30, 0.60, 0.80, 0.90}, {2.0, 2.5, 3.5, 4.0}},
      {"robust", 1, 4, 5, {}, {}, {}, {}},
  };
}

std::vector<SeasonShape> seasons_t24() {
  return {
      {"winter", 182, 10, 5,
       {0.45, 0.55, 0.70, 0.80, 0.75, 0.70, 0.65, 0.60, 0.55, 0.50},
       {1.8, 2.2, 2.6, 2.2, 1.9, 1.7, 1.6, 1.5, 1.4, 1.3},
       {0.00, 0.05, 0.30, 0.60, 0.80, 0.90, 0.85, 0.65, 0.40, 0.15},
       {1.5, 1.8, 2.5, 3.5, 4.5, 5.5, 6.0, 5.5, 4.5, 3.5}},
      {"summer", 183, 10, 5,
       {0.35, 0.40, 0.50, 0.55, 0.50, 0.48, 0.45, 0.42, 0.40, 0.38},
       {0.15, 0.20, 0.25, 0.20, 0.15, 0.12, 0.10, 0.10, 0.10, 0.10},
       {0.05, 0.15, 0.45, 0.75, 0.95, 1.00, 0.95, 0.80, 0.55, 0.30},
       {12.0, 13.0, 15.0, 17.5, 19.5, 21.0, 21.5, 21.0, 19.5, 17.5}},
      {"robust", 1, 4, 5, {}, {}, {}, {}},
  };
}

void write_timeline_t8(const fs::path& path) {
  std::ofstream out(path);
  out << R"({
  "dt": 1.0,
  "robust_index": 1,
  "seasons": [
    {"name": "winter", "n_day": 365, "hours_per_day": 4, "start_hour": 5},
    {"name": "robust", "n_day": 1, "hours_per_day": 4, "start_hour": 5}
  ]
}
)";
}

void write_timeline_t24(const fs::path& path) {
  std::ofstream out(path);
  out << R"({
  "dt": 1.0,
  "robust_index": 2,
  "seasons": [
    {"name": "winter", "n_day": 182, "hours_per_day": 10, "start_hour": 5},
    {"name": "summer", "n_day": 183, "hours_per_day": 10, "start_hour": 5},
    {"name": "robust", "n_day": 1, "hours_per_day": 4, "start_hour": 5}
  ]
}
)";
}

void write_catalog(const fs::path& path) {
  std::ofstream out(path);
  out << R"({
  "note": "desk-scale catalog; heat pump and PV capital prices are synthetic",
  "pv": {"panel_area": 1.75, "eta": 0.18, "panel_cap": 0.25, "cap_max": 5000.0,
         "r_capital": 300.0, "r_fixed_op": 12.5, "roof_max": 35.0},
  "batteries": [
    {"name": "li_ion", "ved": 148.37, "soc_max": 0.9, "dod_max": 0.9,
     "eta_chg": 0.97, "eta_dis": 0.97, "chg_rate": 0.2, "dis_rate": 0.2,
     "r_capital": 799.0, "r_op": 11.0, "vol_avail": 0.5}
  ],
  "boiler": {"eta": 0.94, "r_capital": 120.0},
  "heat_pumps": [
    {"name": "hp8", "provenance": "synthetic",
     "cop_points": [[-10, 2.0], [-5, 2.3], [0, 2.7], [5, 3.1], [10, 3.5], [15, 3.8]],
     "cap_points": [[-10, 5.5], [-5, 6.2], [0, 7.0], [5, 7.6], [10, 8.0], [15, 8.3]],
     "t_supply": 55.0, "r_capital": 6800.0, "r_install": 3000.0, "r_maint": 500.0},
    {"name": "hp11", "provenance": "synthetic",
     "cop_points": [[-10, 1.9], [-5, 2.2], [0, 2.6], [5, 3.0], [10, 3.4], [15, 3.7]],
     "cap_points": [[-10, 7.4], [-5, 8.4], [0, 9.5], [5, 10.3], [10, 10.8], [15, 11.2]],
     "t_supply": 55.0, "r_capital": 8900.0, "r_install": 3000.0, "r_maint": 500.0}
  ],
  "tanks": [
    {"name": "tank150", "volume": 150.0, "loss": 0.08, "r_capital": 550.0,
     "r_maint": 0.0, "t_min": 49.0},
    {"name": "tank210", "volume": 210.0, "loss": 0.11, "r_capital": 700.0,
     "r_maint": 0.0, "t_min": 49.0}
  ],
  "tariffs": {"day": 0.18, "night": 0.08, "seg": 0.132, "gas": 0.02514},
  "crf": 0.0981,
  "pf": 0.95,
  "t_setpoint": 20.0,
  "big_m": {"grid": 100.0, "batt_type": 100.0, "batt_chg": 100.0,
            "boiler": 100.0, "pump": 100.0, "tank": 100.0}
}
)";
}

void write_timing_samples(const fs::path& path) {
  std::ofstream out(path);
  out << "kind,n_buses,n_loads,timepoints,observed_time_s\n";
  out << "load,7,1,8,0.21\nload,13,2,8,0.34\nload,19,3,8,0.52\nload,13,1,8,0.30\n";
  out << "load,25,4,8,0.66\nload,19,2,8,0.49\n";
  out << "noload,8,0,1,0.020\nnoload,16,0,1,0.034\nnoload,24,0,1,0.051\nnoload,32,0,1,0.066\n";
}

void write_run_config(const fs::path& path, const std::string& net,
                      const std::string& timeline, const std::string& mode, int k) {
  std::ofstream out(path);
  out << "{\n";
  out << "  \"network\": \"" << net << "\",\n";
  out << "  \"catalog\": \"catalog.json\",\n";
  out << "  \"timeline\": \"" << timeline << "\",\n";
  out << "  \"mode\": \"" << mode << "\",\n";
  out << "  \"stages\": [\"milp\", \"nlp\", \"comp\"],\n";
  out << "  \"s_base_mva\": 0.8,\n";
  out << "  \"v_max\": 1.01,\n";
  out << "  \"v_min\": 0.95,\n";
  out << "  \"seed\": 0";
  if (mode == "distributed")
    out << ",\n  \"partition\": {\"source\": \"auto\", \"k\": " << k << "}";
  out << "\n}\n";
}

}  // namespace

int main(int argc, char** argv) {
  fs::path root = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(root);

  FeederPlan f1{"elvtf1", 1, {{1, 2, "ABC", 'A'}}};
  FeederPlan f2{"elvtf2", 2, {{1, 2, "ABC", 'A'}, {2, 2, "B", 'B'}}};
  FeederPlan f5{"elvtf5",
                15,
                {{3, 6, "ABC", 'A'},
                 {6, 6, "B", 'B'},
                 {9, 6, "C", 'C'},
                 {12, 6, "ABC", 'B'},
                 {15, 6, "A", 'A'}}};

  for (const auto& plan : {f1, f2, f5}) {
    write_feeder(root / (plan.name + "_t8"), plan, seasons_t8(), 1);
    write_feeder(root / (plan.name + "_t24"), plan, seasons_t24(), 2);
  }
  write_timeline_t8(root / "timeline8.json");
  write_timeline_t24(root / "timeline24.json");
  write_catalog(root / "catalog.json");
  write_timing_samples(root / "timing_samples.csv");
  write_run_config(root / "run_elvtf5_t8_central.json", "elvtf5_t8", "timeline8.json",
                   "central", 0);
  write_run_config(root / "run_elvtf5_t8_distributed.json", "elvtf5_t8", "timeline8.json",
                   "distributed", 3);

  std::cout << "fixtures written under " << root << "\n";
  return 0;
}
