#pragma once

#include <string>
#include <vector>

#include "desgn/common.hpp"

namespace desgn {

/// L / (1 + exp(-k (x - x0))) + c
struct Logistic {
  double L = 0, k = 0, x0 = 0, c = 0;

  double eval(double x) const;
};

struct PvSpec {
  double panel_area_m2 = 1.75;
  double eta = 0.18;
  double panel_cap_kw = 0.25;
  double cap_max_kw = 5000.0;
  double r_capital = 450.0;   // GBP per panel
  double r_fixed_op = 12.5;   // GBP per kW-year
  double roof_max_m2 = 35.0;
};

struct BatterySpec {
  std::string name;
  double ved_kwh_m3 = 148.37;
  double soc_max = 0.9;
  double dod_max = 0.9;
  double eta_chg = 0.97;
  double eta_dis = 0.97;
  double chg_rate = 0.2;
  double dis_rate = 0.2;
  double r_capital = 799.0;  // GBP per kWh
  double r_op = 11.0;        // GBP per kWh-year
  double vol_avail_m3 = 0.5;
};

struct BoilerSpec {
  double eta = 0.94;
  double r_capital = 120.0;  // GBP per kW
};

struct HeatPumpSpec {
  std::string name;
  Logistic cop_fit;
  Logistic cap_fit;
  double t_supply_c = 55.0;
  double r_capital = 7000.0;
  double r_install = 3000.0;
  double r_maint = 500.0;
};

struct TankSpec {
  std::string name;
  double volume_l = 150.0;
  double loss_kw = 0.1;
  double r_capital = 600.0;
  double r_maint = 0.0;
  double t_min_c = 49.0;
};

struct Tariffs {
  double day = 0.18;     // GBP/kWh
  double night = 0.08;
  double seg = 0.132;
  double gas = 0.02514;
};

struct BigM {
  double grid = 100.0;
  double batt_type = 100.0;
  double batt_chg = 100.0;
  double boiler = 100.0;
  double pump = 100.0;
  double tank = 100.0;
};

struct TechCatalog {
  PvSpec pv;
  std::vector<BatterySpec> batteries;
  BoilerSpec boiler;
  std::vector<HeatPumpSpec> heat_pumps;
  std::vector<TankSpec> tanks;
  Tariffs tariffs;
  double crf = 0.0981;
  double pf = 0.95;
  double t_setpoint_c = 20.0;
  BigM big_m;

  // c_water [g/cm^3] and rho_water [kWh/(kg degC)]; product with litres
  // gives tank heat capacity in kWh/degC.
  double c_water = 1.0;
  double rho_water = 0.00116;

  void validate() const;
};

/// Capital recovery factor i(1+i)^n / ((1+i)^n - 1).
double crf(double interest, int n_years);

TechCatalog load_catalog(const std::string& path);

}  // namespace desgn
