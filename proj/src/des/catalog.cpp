#include "desgn/catalog.hpp"

#include <cmath>
#include <fstream>

#include "desgn/logistic_fit.hpp"
#include "json.hpp"

namespace desgn {

double crf(double interest, int n_years) {
  if (interest <= 0) throw ModelError("interest rate must be positive");
  if (n_years < 1) throw ModelError("n_years must be at least 1");
  double a = std::pow(1.0 + interest, n_years);
  return interest * a / (a - 1.0);
}

void TechCatalog::validate() const {
  auto chk_eff = [](double e, const char* what) {
    if (e <= 0 || e > 1) throw InputError(std::string("efficiency out of (0,1]: ") + what);
  };
  chk_eff(pv.eta, "pv.eta");
  chk_eff(boiler.eta, "boiler.eta");
  if (pf <= 0 || pf > 1) throw InputError("power factor out of (0,1]");
  for (const auto& b : batteries) {
    chk_eff(b.eta_chg, "battery eta_chg");
    chk_eff(b.eta_dis, "battery eta_dis");
    if (b.r_capital < 0 || b.r_op < 0) throw InputError("negative battery price");
  }
  if (pv.r_capital < 0 || pv.r_fixed_op < 0) throw InputError("negative pv price");
  if (boiler.r_capital < 0) throw InputError("negative boiler price");
  for (const auto& hp : heat_pumps)
    if (hp.r_capital < 0 || hp.r_install < 0 || hp.r_maint < 0)
      throw InputError("negative heat pump price");
  for (const auto& w : tanks)
    if (w.r_capital < 0 || w.r_maint < 0) throw InputError("negative tank price");
  if (tariffs.day < 0 || tariffs.night < 0 || tariffs.seg < 0 || tariffs.gas < 0)
    throw InputError("negative tariff");
  auto chk_m = [](double m, const char* what) {
    if (m <= 0) throw InputError(std::string("big-M must be positive: ") + what);
  };
  chk_m(big_m.grid, "grid");
  chk_m(big_m.batt_type, "batt_type");
  chk_m(big_m.batt_chg, "batt_chg");
  chk_m(big_m.boiler, "boiler");
  chk_m(big_m.pump, "pump");
  chk_m(big_m.tank, "tank");
}

namespace {

Logistic logistic_from_json(const nlohmann::json& j) {
  if (j.is_array()) {
    // Data points: fit here.
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return fit_logistic(pts);
  }
  Logistic lg;
  lg.L = j.at("L").get<double>();
  lg.k = j.at("k").get<double>();
  lg.x0 = j.at("x0").get<double>();
  lg.c = j.at("c").get<double>();
  return lg;
}

}  // namespace

TechCatalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open catalog file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("bad catalog json: " + std::string(e.what()));
  }

  TechCatalog cat;
  const auto& jpv = j.at("pv");
  cat.pv.panel_area_m2 = jpv.at("panel_area").get<double>();
  cat.pv.eta = jpv.at("eta").get<double>();
  cat.pv.panel_cap_kw = jpv.at("panel_cap").get<double>();
  cat.pv.cap_max_kw = jpv.at("cap_max").get<double>();
  cat.pv.r_capital = jpv.at("r_capital").get<double>();
  cat.pv.r_fixed_op = jpv.at("r_fixed_op").get<double>();
  cat.pv.roof_max_m2 = jpv.at("roof_max").get<double>();

  cat.batteries.clear();
  for (const auto& jb : j.at("batteries")) {
    BatterySpec b;
    b.name = jb.value("name", "battery");
    b.ved_kwh_m3 = jb.at("ved").get<double>();
    b.soc_max = jb.at("soc_max").get<double>();
    b.dod_max = jb.at("dod_max").get<double>();
    b.eta_chg = jb.at("eta_chg").get<double>();
    b.eta_dis = jb.at("eta_dis").get<double>();
    b.chg_rate = jb.at("chg_rate").get<double>();
    b.dis_rate = jb.at("dis_rate").get<double>();
    b.r_capital = jb.at("r_capital").get<double>();
    b.r_op = jb.at("r_op").get<double>();
    b.vol_avail_m3 = jb.at("vol_avail").get<double>();
    cat.batteries.push_back(std::move(b));
  }

  cat.boiler.eta = j.at("boiler").at("eta").get<double>();
  cat.boiler.r_capital = j.at("boiler").at("r_capital").get<double>();

  cat.heat_pumps.clear();
  for (const auto& jh : j.at("heat_pumps")) {
    HeatPumpSpec hp;
    hp.name = jh.value("name", "hp");
    hp.cop_fit = logistic_from_json(jh.contains("cop_fit") ? jh.at("cop_fit") : jh.at("cop_points"));
    hp.cap_fit = logistic_from_json(jh.contains("cap_fit") ? jh.at("cap_fit") : jh.at("cap_points"));
    hp.t_supply_c = jh.at("t_supply").get<double>();
    hp.r_capital = jh.at("r_capital").get<double>();
    hp.r_install = jh.at("r_install").get<double>();
    hp.r_maint = jh.at("r_maint").get<double>();
    cat.heat_pumps.push_back(std::move(hp));
  }

  cat.tanks.clear();
  for (const auto& jw : j.at("tanks")) {
    TankSpec w;
    w.name = jw.value("name", "tank");
    w.volume_l = jw.at("volume").get<double>();
    w.loss_kw = jw.at("loss").get<double>();
    w.r_capital = jw.at("r_capital").get<double>();
    w.r_maint = jw.at("r_maint").get<double>();
    w.t_min_c = jw.at("t_min").get<double>();
    cat.tanks.push_back(std::move(w));
  }

  const auto& jt = j.at("tariffs");
  cat.tariffs.day = jt.at("day").get<double>();
  cat.tariffs.night = jt.at("night").get<double>();
  cat.tariffs.seg = jt.at("seg").get<double>();
  cat.tariffs.gas = jt.at("gas").get<double>();

  cat.crf = j.at("crf").get<double>();
  cat.pf = j.at("pf").get<double>();
  cat.t_setpoint_c = j.at("t_setpoint").get<double>();

  if (j.contains("big_m")) {
    const auto& jm = j.at("big_m");
    cat.big_m.grid = jm.value("grid", 100.0);
    cat.big_m.batt_type = jm.value("batt_type", 100.0);
    cat.big_m.batt_chg = jm.value("batt_chg", 100.0);
    cat.big_m.boiler = jm.value("boiler", 100.0);
    cat.big_m.pump = jm.value("pump", 100.0);
    cat.big_m.tank = jm.value("tank", 100.0);
  }

  cat.validate();
  return cat;
}

}  // namespace desgn
