#include "desgn/des_problem.hpp"

#include <cmath>

#include "desgn/logistic_fit.hpp"

namespace desgn {

const char* var_fam_name(VarFam f) {
  switch (f) {
    case VarFam::PvPanels: return "pv_panels";
    case VarFam::CapBatt: return "cap_batt";
    case VarFam::HBoilerMax: return "h_boiler_max";
    case VarFam::PPump: return "p_pump";
    case VarFam::ZTank: return "z_tank";
    case VarFam::WBatt: return "w_batt";
    case VarFam::VolBatt: return "vol_batt";
    case VarFam::BBoiler: return "b_boiler";
    case VarFam::ELoad: return "e_load";
    case VarFam::EGrid: return "e_grid";
    case VarFam::EGridLoad: return "e_grid_load";
    case VarFam::EGridCharge: return "e_grid_charge";
    case VarFam::EPvUsed: return "e_pv_used";
    case VarFam::EPvSold: return "e_pv_sold";
    case VarFam::EPvCharge: return "e_pv_charge";
    case VarFam::EBattStored: return "e_batt_stored";
    case VarFam::EBattCharge: return "e_batt_charge";
    case VarFam::EBattDischarge: return "e_batt_discharge";
    case VarFam::XSell: return "x_sell";
    case VarFam::QBatt: return "q_batt";
    case VarFam::HBoiler: return "h_boiler";
    case VarFam::HPump: return "h_pump";
    case VarFam::EHp: return "e_hp";
    case VarFam::HTankCharge: return "h_tank_charge";
    case VarFam::HTankDischarge: return "h_tank_discharge";
    case VarFam::HTankInternal: return "h_tank_internal";
    case VarFam::TTank: return "t_tank";
    default: return "?";
  }
}

double LinearRow::activity(const std::vector<double>& x) const {
  double a = 0;
  for (auto [i, c] : terms) a += c * x[i];
  return a;
}

double LinearRow::violation(const std::vector<double>& x) const {
  double a = activity(x);
  switch (sense) {
    case RowSense::Eq: return std::abs(a - rhs);
    case RowSense::Le: return std::max(0.0, a - rhs);
    case RowSense::Ge: return std::max(0.0, rhs - a);
  }
  return 0;
}

int DesProblem::var(VarFam f, int a, int b) const {
  const FamInfo& fi = fam[static_cast<size_t>(f)];
  return fi.base + a * fi.dim_b + b;
}

std::string DesProblem::var_name(int idx) const {
  for (size_t f = 0; f < fam.size(); ++f) {
    const FamInfo& fi = fam[f];
    int count = fi.dim_a * fi.dim_b;
    if (idx >= fi.base && idx < fi.base + count) {
      int rel = idx - fi.base;
      return std::string(var_fam_name(static_cast<VarFam>(f))) + "[" +
             std::to_string(rel / fi.dim_b) + "," + std::to_string(rel % fi.dim_b) + "]";
    }
  }
  return "var" + std::to_string(idx);
}

std::map<std::string, int> DesProblem::rows_per_family() const {
  std::map<std::string, int> out;
  for (const auto& r : rows) out[r.family]++;
  return out;
}

double CostBreakdown::total_capex() const {
  double s = 0;
  for (size_t i = 0; i < pv_capex.size(); ++i)
    s += pv_capex[i] + batt_capex[i] + boiler_capex[i] + pump_capex[i] + tank_capex[i];
  return s;
}

double CostBreakdown::total_opex() const {
  double s = 0;
  for (size_t i = 0; i < pv_opex.size(); ++i)
    s += pv_opex[i] + batt_opex[i] + boiler_opex[i] + pump_opex[i] + tank_opex[i] +
         grid_opex[i];
  return s;
}

double CostBreakdown::total_income() const {
  double s = 0;
  for (double v : seg_income) s += v;
  return s;
}

namespace {

struct Builder {
  DesProblem& p;

  int add_var(VarFam f, int dim_a, int dim_b, double lo, double hi, bool binary) {
    auto& fi = p.fam[static_cast<size_t>(f)];
    fi.base = p.n_vars;
    fi.dim_a = dim_a;
    fi.dim_b = dim_b;
    int count = dim_a * dim_b;
    p.n_vars += count;
    p.lb.insert(p.lb.end(), count, lo);
    p.ub.insert(p.ub.end(), count, hi);
    p.is_binary.insert(p.is_binary.end(), count, binary ? 1 : 0);
    return fi.base;
  }

  LinearRow& row(const std::string& family, RowSense sense, double rhs) {
    p.rows.push_back(LinearRow{family, sense, rhs, {}});
    return p.rows.back();
  }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

DesProblem build_des_problem(const LoadPoint& load, const TechCatalog& cat,
                             const Timeline& tl, const EnvSeries& env) {
  if (cat.batteries.empty()) throw ModelError("catalog has no battery option");
  if (cat.heat_pumps.empty()) throw ModelError("catalog has no heat pump option");
  if (cat.tanks.empty()) throw ModelError("catalog has no hot water tank option");

  DesProblem p;
  p.load = load;
  p.cat = cat;
  p.tl = tl;
  p.irr = env.irradiance;
  p.tamb = env.temperature;

  const int T = tl.total_timepoints();
  const int S = static_cast<int>(tl.seasons.size());
  const int C = static_cast<int>(cat.batteries.size());
  const int HP = static_cast<int>(cat.heat_pumps.size());
  const int W = static_cast<int>(cat.tanks.size());
  const double dt = tl.dt_hours;

  if (static_cast<int>(load.elec_profile.size()) != T ||
      static_cast<int>(load.heat_profile.size()) != T)
    throw ModelError("profiles do not match the timeline length for load " + load.id);
  if (static_cast<int>(env.irradiance.size()) != T ||
      static_cast<int>(env.temperature.size()) != T)
    throw ModelError("environmental series do not match the timeline length");

  for (const auto& hp : cat.heat_pumps) {
    HpProfile prof = hp_profile(hp, env.temperature);
    p.hp_cap.push_back(std::move(prof.cap_kw));
    p.hp_cop.push_back(std::move(prof.cop));
  }

  Builder b{p};
  // sizing, per season
  b.add_var(VarFam::PvPanels, S, 1, 0, kInf, false);
  b.add_var(VarFam::CapBatt, S, C, 0, kInf, false);
  b.add_var(VarFam::HBoilerMax, S, 1, 0, kInf, false);
  b.add_var(VarFam::PPump, S, HP, 0, 1, true);
  b.add_var(VarFam::ZTank, S, W, 0, 1, true);
  // sizing, single
  b.add_var(VarFam::WBatt, 1, C, 0, 1, true);
  b.add_var(VarFam::VolBatt, 1, C, 0, kInf, false);
  b.add_var(VarFam::BBoiler, 1, 1, 0, 1, true);
  // schedule
  b.add_var(VarFam::ELoad, T, 1, 0, kInf, false);
  b.add_var(VarFam::EGrid, T, 1, 0, kInf, false);
  b.add_var(VarFam::EGridLoad, T, 1, 0, kInf, false);
  b.add_var(VarFam::EGridCharge, T, C, 0, kInf, false);
  b.add_var(VarFam::EPvUsed, T, 1, 0, kInf, false);
  b.add_var(VarFam::EPvSold, T, 1, 0, kInf, false);
  b.add_var(VarFam::EPvCharge, T, C, 0, kInf, false);
  b.add_var(VarFam::EBattStored, T, C, 0, kInf, false);
  b.add_var(VarFam::EBattCharge, T, C, 0, kInf, false);
  b.add_var(VarFam::EBattDischarge, T, C, 0, kInf, false);
  b.add_var(VarFam::XSell, T, 1, 0, 1, true);
  b.add_var(VarFam::QBatt, T, C, 0, 1, true);
  b.add_var(VarFam::HBoiler, T, 1, 0, kInf, false);
  b.add_var(VarFam::HPump, T, HP * W, 0, kInf, false);
  b.add_var(VarFam::EHp, T, HP, 0, kInf, false);
  b.add_var(VarFam::HTankCharge, T, W, 0, kInf, false);
  b.add_var(VarFam::HTankDischarge, T, W, 0, kInf, false);
  b.add_var(VarFam::HTankInternal, T, W, 0, kInf, false);
  b.add_var(VarFam::TTank, T, W, 0, kInf, false);

  auto hpw = [&](int hp, int w) { return hp * W + w; };

  // --- objective (annualised cost in GBP) ---
  p.obj.assign(p.n_vars, 0.0);
  const int n_norm = tl.n_normal_seasons();
  for (int s = 0; s < S; ++s) {
    if (tl.is_robust(s)) continue;
    double nd = tl.seasons[s].n_day;
    p.obj[p.var(VarFam::PvPanels, s)] +=
        cat.pv.r_capital * cat.crf / n_norm + cat.pv.r_fixed_op * (nd / 365.0) * cat.pv.panel_cap_kw;
    for (int c = 0; c < C; ++c)
      p.obj[p.var(VarFam::CapBatt, s, c)] +=
          cat.batteries[c].r_capital * cat.crf / n_norm + cat.batteries[c].r_op * nd / 365.0;
    p.obj[p.var(VarFam::HBoilerMax, s)] += cat.boiler.r_capital * cat.crf / n_norm;
    for (int h = 0; h < HP; ++h)
      p.obj[p.var(VarFam::PPump, s, h)] +=
          (cat.heat_pumps[h].r_capital + cat.heat_pumps[h].r_install) * cat.crf / n_norm +
          cat.heat_pumps[h].r_maint / n_norm;
    for (int w = 0; w < W; ++w)
      p.obj[p.var(VarFam::ZTank, s, w)] +=
          cat.tanks[w].r_capital * cat.crf / n_norm + cat.tanks[w].r_maint / n_norm;
    for (int t = tl.block_start(s); t < tl.block_end(s); ++t) {
      double pg = tl.is_night(t) ? cat.tariffs.night : cat.tariffs.day;
      p.obj[p.var(VarFam::EGrid, t)] += pg * nd;
      p.obj[p.var(VarFam::EPvSold, t)] -= cat.tariffs.seg * nd;
      p.obj[p.var(VarFam::HBoiler, t)] += dt * cat.tariffs.gas / cat.boiler.eta * nd;
    }
  }

  // --- energy balances ---
  for (int t = 0; t < T; ++t) {
    auto& heat = b.row("Heating Balance", RowSense::Eq, load.heat_profile[t]);
    heat.terms.push_back({p.var(VarFam::HBoiler, t), dt});
    for (int w = 0; w < W; ++w) heat.terms.push_back({p.var(VarFam::HTankDischarge, t, w), 1.0});

    auto& eload = b.row("Electrical Load", RowSense::Eq, load.elec_profile[t]);
    eload.terms.push_back({p.var(VarFam::ELoad, t), 1.0});
    for (int h = 0; h < HP; ++h) eload.terms.push_back({p.var(VarFam::EHp, t, h), -1.0});

    auto& ebal = b.row("Electrical Balance", RowSense::Eq, 0.0);
    ebal.terms.push_back({p.var(VarFam::ELoad, t), 1.0});
    ebal.terms.push_back({p.var(VarFam::EGridLoad, t), -1.0});
    ebal.terms.push_back({p.var(VarFam::EPvUsed, t), -1.0});
    for (int c = 0; c < C; ++c) ebal.terms.push_back({p.var(VarFam::EBattDischarge, t, c), -1.0});
  }

  // --- PV ---
  for (int t = 0; t < T; ++t) {
    int s = tl.season_of(t);
    double gen_coef = cat.pv.panel_area_m2 * p.irr[t] * cat.pv.eta * dt;
    auto& gen = b.row("PV Generation", RowSense::Le, 0.0);
    gen.terms.push_back({p.var(VarFam::EPvUsed, t), 1.0});
    gen.terms.push_back({p.var(VarFam::EPvSold, t), 1.0});
    for (int c = 0; c < C; ++c) gen.terms.push_back({p.var(VarFam::EPvCharge, t, c), 1.0});
    gen.terms.push_back({p.var(VarFam::PvPanels, s), -gen_coef});

    auto& cap = b.row("PV Maximum Generation Capacity", RowSense::Le, 0.0);
    cap.terms.push_back({p.var(VarFam::EPvUsed, t), 1.0});
    cap.terms.push_back({p.var(VarFam::EPvSold, t), 1.0});
    for (int c = 0; c < C; ++c) cap.terms.push_back({p.var(VarFam::EPvCharge, t, c), 1.0});
    cap.terms.push_back({p.var(VarFam::PvPanels, s), -cat.pv.panel_cap_kw * dt});
  }
  for (int s = 0; s < S; ++s) {
    auto& roof = b.row("Maximum Roof Area", RowSense::Le, cat.pv.roof_max_m2);
    roof.terms.push_back({p.var(VarFam::PvPanels, s), cat.pv.panel_area_m2});
    auto& seg = b.row("PV Capacity Limitation", RowSense::Le, cat.pv.cap_max_kw);
    seg.terms.push_back({p.var(VarFam::PvPanels, s), cat.pv.panel_cap_kw});
  }

  // sizing copies agree across season blocks
  auto link = [&](const std::string& fam_name, VarFam f, int nb, const char* season_link,
                  const char* robust_link) {
    (void)fam_name;
    int prev = -1;
    for (int s = 0; s < S; ++s) {
      if (tl.is_robust(s)) continue;
      if (prev >= 0)
        for (int k = 0; k < nb; ++k) {
          auto& r = b.row(season_link, RowSense::Eq, 0.0);
          r.terms.push_back({p.var(f, s, k), 1.0});
          r.terms.push_back({p.var(f, prev, k), -1.0});
        }
      prev = s;
    }
    int s1 = tl.first_normal_season();
    for (int s = 0; s < S; ++s) {
      if (!tl.is_robust(s)) continue;
      for (int k = 0; k < nb; ++k) {
        auto& r = b.row(robust_link, RowSense::Eq, 0.0);
        r.terms.push_back({p.var(f, s, k), 1.0});
        r.terms.push_back({p.var(f, s1, k), -1.0});
      }
    }
  };
  link("pv", VarFam::PvPanels, 1, "PV Seasonal Linking", "PV Robust Linking");
  link("batt", VarFam::CapBatt, C, "Battery Seasonal Linking", "Battery Robust Linking");
  link("boiler", VarFam::HBoilerMax, 1, "Boiler Seasonal Linking", "Boiler Robust Linking");
  link("pump", VarFam::PPump, HP, "Heat Pump Seasonal Linking", "Heat Pump Robust Linking");
  link("tank", VarFam::ZTank, W, "Hot Water Tank Seasonal Linking", "Hot Water Tank Robust Linking");

  // --- battery storage ---
  {
    auto& one = b.row("Battery Type", RowSense::Le, 1.0);
    for (int c = 0; c < C; ++c) one.terms.push_back({p.var(VarFam::WBatt, 0, c), 1.0});
    auto& vol = b.row("Battery Volume Limit", RowSense::Le, cat.batteries[0].vol_avail_m3);
    for (int c = 0; c < C; ++c) vol.terms.push_back({p.var(VarFam::VolBatt, 0, c), 1.0});
  }
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c) {
      auto& bigm = b.row("Battery Type BigM", RowSense::Le, 0.0);
      bigm.terms.push_back({p.var(VarFam::CapBatt, s, c), 1.0});
      bigm.terms.push_back({p.var(VarFam::WBatt, 0, c), -cat.big_m.batt_type});
      auto& vc = b.row("Installed Battery Capacity", RowSense::Eq, 0.0);
      vc.terms.push_back({p.var(VarFam::CapBatt, s, c), 1.0});
      vc.terms.push_back({p.var(VarFam::VolBatt, 0, c), -cat.batteries[c].ved_kwh_m3});
    }
  for (int t = 0; t < T; ++t) {
    int s = tl.season_of(t);
    bool block_start = (t == tl.block_start(s));
    for (int c = 0; c < C; ++c) {
      const auto& bat = cat.batteries[c];
      auto& cap1 = b.row("Battery Capacity 1", RowSense::Le, 0.0);
      cap1.terms.push_back({p.var(VarFam::EBattStored, t, c), 1.0});
      cap1.terms.push_back({p.var(VarFam::CapBatt, s, c), -bat.soc_max});
      auto& cap2 = b.row("Battery Capacity 2", RowSense::Ge, 0.0);
      cap2.terms.push_back({p.var(VarFam::EBattStored, t, c), 1.0});
      cap2.terms.push_back({p.var(VarFam::CapBatt, s, c), -(1.0 - bat.dod_max)});

      auto& bal = b.row("Battery Storage Balance", RowSense::Eq, 0.0);
      bal.terms.push_back({p.var(VarFam::EBattStored, t, c), 1.0});
      if (!block_start) bal.terms.push_back({p.var(VarFam::EBattStored, t - 1, c), -1.0});
      bal.terms.push_back({p.var(VarFam::EBattCharge, t, c), -bat.eta_chg});
      bal.terms.push_back({p.var(VarFam::EBattDischarge, t, c), 1.0 / bat.eta_dis});

      if (!block_start) {
        auto& cond = b.row("Battery Discharge Condition", RowSense::Le, 0.0);
        cond.terms.push_back({p.var(VarFam::EBattDischarge, t, c), 1.0 / bat.eta_dis});
        cond.terms.push_back({p.var(VarFam::EBattStored, t - 1, c), -1.0});
      }

      auto& chg_lim = b.row("Battery Charge Limitation", RowSense::Le, 0.0);
      chg_lim.terms.push_back({p.var(VarFam::EBattCharge, t, c), bat.eta_chg});
      chg_lim.terms.push_back({p.var(VarFam::CapBatt, s, c), -bat.chg_rate});
      auto& dis_lim = b.row("Battery Discharge Limitation", RowSense::Le, 0.0);
      dis_lim.terms.push_back({p.var(VarFam::EBattDischarge, t, c), 1.0 / bat.eta_dis});
      dis_lim.terms.push_back({p.var(VarFam::CapBatt, s, c), -bat.dis_rate});

      auto& split = b.row("Battery Charge", RowSense::Eq, 0.0);
      split.terms.push_back({p.var(VarFam::EBattCharge, t, c), 1.0});
      split.terms.push_back({p.var(VarFam::EPvCharge, t, c), -1.0});
      split.terms.push_back({p.var(VarFam::EGridCharge, t, c), -1.0});

      auto& qc = b.row("Battery Charge BigM", RowSense::Le, 0.0);
      qc.terms.push_back({p.var(VarFam::EBattCharge, t, c), 1.0});
      qc.terms.push_back({p.var(VarFam::QBatt, t, c), -cat.big_m.batt_chg});
      auto& qd = b.row("Battery Discharge BigM", RowSense::Le, cat.big_m.batt_chg);
      qd.terms.push_back({p.var(VarFam::EBattDischarge, t, c), 1.0});
      qd.terms.push_back({p.var(VarFam::QBatt, t, c), cat.big_m.batt_chg});
    }
  }
  for (int s = 0; s < S; ++s)
    for (int c = 0; c < C; ++c) {
      auto& cyc = b.row("Battery Start and End SoC", RowSense::Eq, 0.0);
      cyc.terms.push_back({p.var(VarFam::EBattStored, tl.block_start(s), c), 1.0});
      cyc.terms.push_back({p.var(VarFam::EBattStored, tl.block_end(s) - 1, c), -1.0});
    }

  // --- grid interaction ---
  for (int t = 0; t < T; ++t) {
    auto& usage = b.row("Grid Electricity Usage", RowSense::Eq, 0.0);
    usage.terms.push_back({p.var(VarFam::EGrid, t), 1.0});
    usage.terms.push_back({p.var(VarFam::EGridLoad, t), -1.0});
    for (int c = 0; c < C; ++c) usage.terms.push_back({p.var(VarFam::EGridCharge, t, c), -1.0});

    auto& cap = b.row("Grid Electricity Usage for Local Load", RowSense::Le, 0.0);
    cap.terms.push_back({p.var(VarFam::EGridLoad, t), 1.0});
    cap.terms.push_back({p.var(VarFam::ELoad, t), -1.0});

    auto& buy = b.row("Grid Electricity Purchase", RowSense::Le, cat.big_m.grid);
    buy.terms.push_back({p.var(VarFam::EGrid, t), 1.0});
    buy.terms.push_back({p.var(VarFam::XSell, t), cat.big_m.grid});
    auto& sell = b.row("Grid Electricity Sale", RowSense::Le, 0.0);
    sell.terms.push_back({p.var(VarFam::EPvSold, t), 1.0});
    sell.terms.push_back({p.var(VarFam::XSell, t), -cat.big_m.grid});
  }

  // --- boiler ---
  for (int s = 0; s < S; ++s) {
    auto& bigm = b.row("Boiler BigM", RowSense::Le, 0.0);
    bigm.terms.push_back({p.var(VarFam::HBoilerMax, s), 1.0});
    bigm.terms.push_back({p.var(VarFam::BBoiler, 0), -cat.big_m.boiler});
  }
  for (int t = 0; t < T; ++t) {
    auto& cap = b.row("Maximum Boiler Capacity", RowSense::Le, 0.0);
    cap.terms.push_back({p.var(VarFam::HBoiler, t), 1.0});
    cap.terms.push_back({p.var(VarFam::HBoilerMax, tl.season_of(t)), -1.0});
  }

  // --- heat pump ---
  for (int s = 0; s < S; ++s) {
    auto& lim = b.row("Heat Pump Limitation", RowSense::Le, 1.0);
    for (int h = 0; h < HP; ++h) lim.terms.push_back({p.var(VarFam::PPump, s, h), 1.0});
    auto& simu = b.row("Simultaneous Heating Technologies", RowSense::Le, 1.0);
    for (int h = 0; h < HP; ++h) simu.terms.push_back({p.var(VarFam::PPump, s, h), 1.0});
    simu.terms.push_back({p.var(VarFam::BBoiler, 0), 1.0});
  }
  for (int t = 0; t < T; ++t) {
    int s = tl.season_of(t);
    for (int h = 0; h < HP; ++h) {
      for (int w = 0; w < W; ++w) {
        auto& bigm = b.row("Heat Pump BigM", RowSense::Le, 0.0);
        bigm.terms.push_back({p.var(VarFam::HPump, t, hpw(h, w)), 1.0});
        bigm.terms.push_back({p.var(VarFam::PPump, s, h), -cat.big_m.pump});
      }
      auto& elec = b.row("Heat Pump Electrical Load", RowSense::Eq, 0.0);
      elec.terms.push_back({p.var(VarFam::EHp, t, h), 1.0});
      for (int w = 0; w < W; ++w)
        elec.terms.push_back({p.var(VarFam::HPump, t, hpw(h, w)), -1.0 / p.hp_cop[h][t]});
      auto& cap = b.row("Heat Pump Maximum Capacity", RowSense::Le, p.hp_cap[h][t] * dt);
      for (int w = 0; w < W; ++w) cap.terms.push_back({p.var(VarFam::HPump, t, hpw(h, w)), 1.0});
    }
  }

  // --- hot water tank ---
  for (int s = 0; s < S; ++s) {
    auto& lim = b.row("Hot Water Tank Limitation", RowSense::Le, 1.0);
    for (int w = 0; w < W; ++w) lim.terms.push_back({p.var(VarFam::ZTank, s, w), 1.0});
  }
  for (int t = 0; t < T; ++t) {
    int s = tl.season_of(t);
    bool block_start = (t == tl.block_start(s));
    for (int w = 0; w < W; ++w) {
      const auto& tank = cat.tanks[w];
      double heat_cap = cat.c_water * cat.rho_water * tank.volume_l;  // kWh/degC

      auto& chg = b.row("Hot Water Tank Heat Charge", RowSense::Eq, 0.0);
      chg.terms.push_back({p.var(VarFam::HTankCharge, t, w), 1.0});
      for (int h = 0; h < HP; ++h)
        chg.terms.push_back({p.var(VarFam::HPump, t, hpw(h, w)), -1.0});

      auto& bigm = b.row("Hot Water Tank BigM Limitation", RowSense::Le, 0.0);
      bigm.terms.push_back({p.var(VarFam::HTankCharge, t, w), 1.0});
      bigm.terms.push_back({p.var(VarFam::ZTank, s, w), -cat.big_m.tank});

      auto& tmin = b.row("Hot Water Tank Minimum Temperature", RowSense::Le, 0.0);
      tmin.terms.push_back({p.var(VarFam::ZTank, s, w), tank.t_min_c});
      tmin.terms.push_back({p.var(VarFam::TTank, t, w), -1.0});

      auto& temp = b.row("Hot Water Tank Temperature", RowSense::Eq, 0.0);
      temp.terms.push_back({p.var(VarFam::TTank, t, w), 1.0});
      temp.terms.push_back({p.var(VarFam::HTankInternal, t, w), -1.0 / heat_cap});
      temp.terms.push_back({p.var(VarFam::ZTank, s, w), -cat.t_setpoint_c});

      auto& tmax = b.row("Hot Water Tank Maximum Temperature", RowSense::Le, 0.0);
      tmax.terms.push_back({p.var(VarFam::TTank, t, w), 1.0});
      for (int h = 0; h < HP; ++h)
        tmax.terms.push_back({p.var(VarFam::PPump, s, h), -cat.heat_pumps[h].t_supply_c});

      auto& heat = b.row("Hot Water Tank Heat", RowSense::Eq, 0.0);
      heat.terms.push_back({p.var(VarFam::HTankInternal, t, w), 1.0});
      heat.terms.push_back({p.var(VarFam::HTankCharge, t, w), -1.0});
      heat.terms.push_back({p.var(VarFam::HTankDischarge, t, w), 1.0});
      if (block_start) {
        double init = (tank.t_min_c - cat.t_setpoint_c) * heat_cap;
        heat.terms.push_back({p.var(VarFam::ZTank, s, w), -init + tank.loss_kw * dt});
      } else {
        heat.terms.push_back({p.var(VarFam::HTankInternal, t - 1, w), -1.0});
        heat.terms.push_back({p.var(VarFam::ZTank, s, w), tank.loss_kw * dt});
      }
    }
  }
  for (int s = 0; s < S; ++s)
    for (int w = 0; w < W; ++w) {
      auto& cyc = b.row("Hot Water Tank Heat Timebounds", RowSense::Eq, 0.0);
      cyc.terms.push_back({p.var(VarFam::HTankInternal, tl.block_start(s), w), 1.0});
      cyc.terms.push_back({p.var(VarFam::HTankInternal, tl.block_end(s) - 1, w), -1.0});
    }

  return p;
}

FeasReport eval_feasibility(const DesProblem& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.n_vars)
    throw ModelError("point dimension does not match the problem");
  FeasReport rep;
  for (const auto& r : p.rows) {
    double v = r.violation(x);
    auto& slot = rep.family_violation[r.family];
    slot = std::max(slot, v);
    rep.max_violation = std::max(rep.max_violation, v);
  }
  for (int i = 0; i < p.n_vars; ++i) {
    double v = std::max(p.lb[i] - x[i], x[i] - p.ub[i]);
    rep.bound_violation = std::max(rep.bound_violation, std::max(0.0, v));
  }
  rep.max_violation = std::max(rep.max_violation, rep.bound_violation);
  return rep;
}

CostBreakdown cost_breakdown(const std::vector<double>& x, const DesProblem& p) {
  const auto& tl = p.tl;
  const auto& cat = p.cat;
  const int S = static_cast<int>(tl.seasons.size());
  const int n_norm = tl.n_normal_seasons();
  CostBreakdown cb;
  auto zero = [&](std::vector<double>& v) { v.assign(S, 0.0); };
  zero(cb.pv_capex); zero(cb.batt_capex); zero(cb.boiler_capex);
  zero(cb.pump_capex); zero(cb.tank_capex);
  zero(cb.pv_opex); zero(cb.batt_opex); zero(cb.boiler_opex);
  zero(cb.pump_opex); zero(cb.tank_opex);
  zero(cb.grid_opex); zero(cb.seg_income);

  for (int s = 0; s < S; ++s) {
    if (tl.is_robust(s)) continue;
    double nd = tl.seasons[s].n_day;
    cb.pv_capex[s] = cat.pv.r_capital * x[p.var(VarFam::PvPanels, s)] * cat.crf / n_norm;
    cb.pv_opex[s] =
        x[p.var(VarFam::PvPanels, s)] * cat.pv.r_fixed_op * (nd / 365.0) * cat.pv.panel_cap_kw;
    for (int c = 0; c < p.nC(); ++c) {
      cb.batt_capex[s] +=
          x[p.var(VarFam::CapBatt, s, c)] * cat.batteries[c].r_capital * cat.crf / n_norm;
      cb.batt_opex[s] += x[p.var(VarFam::CapBatt, s, c)] * cat.batteries[c].r_op * nd / 365.0;
    }
    cb.boiler_capex[s] = cat.boiler.r_capital * x[p.var(VarFam::HBoilerMax, s)] * cat.crf / n_norm;
    for (int h = 0; h < p.nHp(); ++h) {
      cb.pump_capex[s] += x[p.var(VarFam::PPump, s, h)] *
                          (cat.heat_pumps[h].r_capital + cat.heat_pumps[h].r_install) *
                          cat.crf / n_norm;
      cb.pump_opex[s] += x[p.var(VarFam::PPump, s, h)] * cat.heat_pumps[h].r_maint / n_norm;
    }
    for (int w = 0; w < p.nW(); ++w) {
      cb.tank_capex[s] +=
          x[p.var(VarFam::ZTank, s, w)] * cat.tanks[w].r_capital * cat.crf / n_norm;
      cb.tank_opex[s] += x[p.var(VarFam::ZTank, s, w)] * cat.tanks[w].r_maint / n_norm;
    }
    for (int t = tl.block_start(s); t < tl.block_end(s); ++t) {
      double pg = tl.is_night(t) ? cat.tariffs.night : cat.tariffs.day;
      cb.grid_opex[s] += x[p.var(VarFam::EGrid, t)] * pg * nd;
      cb.seg_income[s] += x[p.var(VarFam::EPvSold, t)] * cat.tariffs.seg * nd;
      cb.boiler_opex[s] +=
          x[p.var(VarFam::HBoiler, t)] * tl.dt_hours * cat.tariffs.gas / cat.boiler.eta * nd;
    }
  }
  cb.tac = cb.total_capex() + cb.total_opex() - cb.total_income();
  return cb;
}

double reactive_injection_pu(double e_building_kwh, double pf, double s_base_mva,
                             double dt_hours) {
  if (pf <= 0) throw ModelError("power factor must be positive");
  double q = std::sqrt(e_building_kwh * e_building_kwh * (1.0 / (pf * pf) - 1.0));
  return -1e-3 * q / s_base_mva / dt_hours;
}

Injections compute_injections(const std::vector<double>& x, const DesProblem& p,
                              double s_base_mva) {
  const int T = p.T();
  Injections inj;
  for (int ph = 0; ph < 3; ++ph) {
    inj.P[ph].assign(T, 0.0);
    inj.Q[ph].assign(T, 0.0);
  }
  int ph = static_cast<int>(p.load.phase);
  for (int t = 0; t < T; ++t) {
    double sold = x[p.var(VarFam::EPvSold, t)];
    double grid = x[p.var(VarFam::EGrid, t)];
    inj.P[ph][t] = 1e-3 * (sold - grid) / s_base_mva / p.tl.dt_hours;
    inj.Q[ph][t] =
        reactive_injection_pu(p.load.elec_profile[t], p.cat.pf, s_base_mva, p.tl.dt_hours);
  }
  return inj;
}

}  // namespace desgn
