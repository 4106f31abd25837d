#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "desgn/des_problem.hpp"
#include "desgn/logistic_fit.hpp"
#include "desgn/robust.hpp"
#include "doctest.h"

using namespace desgn;

namespace {

TechCatalog test_catalog() {
  TechCatalog cat;
  cat.batteries.push_back(BatterySpec{});
  HeatPumpSpec hp1;
  hp1.cop_fit = {1.8, 0.1, 2.0, 2.0};
  hp1.cap_fit = {2.8, 0.09, 1.0, 5.5};
  HeatPumpSpec hp2 = hp1;
  hp2.cap_fit.c = 7.4;
  cat.heat_pumps = {hp1, hp2};
  cat.tanks.push_back(TankSpec{});
  cat.tanks.push_back(TankSpec{"tank210", 210.0, 0.11, 700.0, 0.0, 49.0});
  return cat;
}

Timeline two_season_timeline(int hours) {
  Timeline tl;
  tl.seasons.push_back({"winter", 365, hours, 5});
  tl.seasons.push_back({"robust", 1, hours, 5});
  tl.robust_index = 1;
  return tl;
}

LoadPoint test_load(int T, double elec = 0.5, double heat = 1.5) {
  LoadPoint ld;
  ld.id = "L1";
  ld.bus = 0;
  ld.phase = Phase::A;
  ld.elec_profile.assign(T, elec);
  ld.heat_profile.assign(T, heat);
  return ld;
}

EnvSeries test_env(int T) {
  EnvSeries env;
  env.irradiance.assign(T, 0.5);
  env.temperature.assign(T, 5.0);
  return env;
}

}  // namespace

TEST_CASE("capital recovery factor") {
  CHECK(crf(0.075, 20) == doctest::Approx(0.0981).epsilon(0).scale(1).epsilon(5e-4));
  CHECK(std::abs(crf(0.075, 20) - 0.0981) < 5e-5);
  CHECK(crf(0.10, 1) == doctest::Approx(1.10).epsilon(1e-12));
  CHECK(crf(0.075, 1000) - 0.075 < 1e-6);
  CHECK(crf(0.075, 1000) >= 0.075);
  CHECK_THROWS_AS(crf(-0.1, 20), ModelError);
  CHECK_THROWS_AS(crf(0.05, 0), ModelError);
}

TEST_CASE("logistic fit recovers exact parameters") {
  Logistic truth{4.0, 1.0, 0.0, 2.0};
  std::vector<std::pair<double, double>> pts;
  for (int x = -3; x <= 3; ++x) pts.push_back({(double)x, truth.eval(x)});
  LogisticFit fit = fit_logistic_full(pts);
  CHECK(fit.converged);
  for (int x = -5; x <= 5; ++x)
    CHECK(fit.curve.eval(x) == doctest::Approx(truth.eval(x)).epsilon(1e-6));
  CHECK(fit.curve.L == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(fit.curve.k == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(fit.curve.x0 == doctest::Approx(0.0).scale(1).epsilon(1e-5));
  CHECK(fit.curve.c == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("flat data degenerates to a constant") {
  std::vector<std::pair<double, double>> pts{{0, 3.0}, {1, 3.0}, {2, 3.0}, {3, 3.0}};
  Logistic lg = fit_logistic(pts);
  CHECK(lg.k == 0.0);
  for (double x : {-100.0, 0.0, 42.0}) CHECK(std::abs(lg.eval(x) - 3.0) < 1e-8);
}

TEST_CASE("logistic midpoint is L/2 + c") {
  Logistic lg{3.0, 0.7, 1.5, 2.0};
  CHECK(lg.eval(1.5) == doctest::Approx(3.0 / 2 + 2.0).epsilon(1e-12));
}

TEST_CASE("heat pump profile") {
  HeatPumpSpec hp;
  hp.cop_fit = {2.0, 0.2, 5.0, 2.0};
  hp.cap_fit = {3.0, 0.15, 2.0, 5.0};

  SUBCASE("midpoint") {
    HpProfile prof = hp_profile(hp, {5.0});
    CHECK(prof.cop[0] == doctest::Approx(3.0).epsilon(1e-12));  // L/2 + c
  }
  SUBCASE("monotone in temperature when k > 0") {
    std::vector<double> temps;
    for (int t = -15; t <= 20; ++t) temps.push_back(t);
    HpProfile prof = hp_profile(hp, temps);
    for (size_t i = 1; i < prof.cop.size(); ++i) CHECK(prof.cop[i] >= prof.cop[i - 1]);
  }
  SUBCASE("saturation keeps outputs inside [c, c+L]") {
    HpProfile prof = hp_profile(hp, {5.0 - 50.0, 5.0 + 50.0});
    for (double v : prof.cop) {
      CHECK(v >= 2.0 - 1e-12);
      CHECK(v <= 4.0 + 1e-12);
    }
  }
  SUBCASE("cop clamped above zero") {
    HeatPumpSpec bad;
    bad.cop_fit = {0.0, 0.0, 0.0, -5.0};
    bad.cap_fit = {1.0, 0.1, 0.0, 1.0};
    HpProfile prof = hp_profile(bad, {0.0});
    CHECK(prof.cop[0] == 1e-3);
  }
}

TEST_CASE("problem dimensions match the index-set hand count") {
  const int hours = 4;
  Timeline tl = two_season_timeline(hours);
  TechCatalog cat = test_catalog();
  const int T = tl.total_timepoints();
  DesProblem p = build_des_problem(test_load(T), cat, tl, test_env(T));

  const int S = 2, C = 1, HP = 2, W = 2;
  // sizing: panels,capbatt,hmax,pump,tank per season; wbatt,volbatt,boiler single
  int n_sizing = S * (1 + C + 1 + HP + W) + C + C + 1;
  // per timepoint: eload egrid egridload egridcharge[c] epvused epvsold epvcharge[c]
  //   stored[c] chg[c] dis[c] X q[c] hboiler hpump[hp][w] ehp[hp]
  //   tankchg[w] tankdis[w] tankint[w] ttank[w]
  int per_t = 1 + 1 + 1 + C + 1 + 1 + C + C + C + C + 1 + C + 1 + HP * W + HP + 4 * W;
  CHECK(p.n_vars == n_sizing + T * per_t);

  auto fam = p.rows_per_family();
  CHECK(fam["Heating Balance"] == T);
  CHECK(fam["Electrical Load"] == T);
  CHECK(fam["Electrical Balance"] == T);
  CHECK(fam["PV Generation"] == T);
  CHECK(fam["PV Maximum Generation Capacity"] == T);
  CHECK(fam["Maximum Roof Area"] == S);
  CHECK(fam["PV Capacity Limitation"] == S);
  CHECK(fam["PV Seasonal Linking"] == 0 + 0);  // one normal season: no chain rows
  CHECK(fam["PV Robust Linking"] == 1);
  CHECK(fam["Battery Type"] == 1);
  CHECK(fam["Battery Type BigM"] == S * C);
  CHECK(fam["Installed Battery Capacity"] == S * C);
  CHECK(fam["Battery Volume Limit"] == 1);
  CHECK(fam["Battery Capacity 1"] == T * C);
  CHECK(fam["Battery Capacity 2"] == T * C);
  CHECK(fam["Battery Storage Balance"] == T * C);
  CHECK(fam["Battery Discharge Condition"] == (T - S) * C);  // none at block starts
  CHECK(fam["Battery Start and End SoC"] == S * C);
  CHECK(fam["Battery Charge Limitation"] == T * C);
  CHECK(fam["Battery Discharge Limitation"] == T * C);
  CHECK(fam["Battery Charge"] == T * C);
  CHECK(fam["Battery Charge BigM"] == T * C);
  CHECK(fam["Battery Discharge BigM"] == T * C);
  CHECK(fam["Battery Robust Linking"] == C);
  CHECK(fam["Grid Electricity Usage"] == T);
  CHECK(fam["Grid Electricity Usage for Local Load"] == T);
  CHECK(fam["Grid Electricity Purchase"] == T);
  CHECK(fam["Grid Electricity Sale"] == T);
  CHECK(fam["Boiler BigM"] == S);
  CHECK(fam["Maximum Boiler Capacity"] == T);
  CHECK(fam["Boiler Robust Linking"] == 1);
  CHECK(fam["Heat Pump Limitation"] == S);
  CHECK(fam["Heat Pump BigM"] == T * HP * W);
  CHECK(fam["Heat Pump Electrical Load"] == T * HP);
  CHECK(fam["Heat Pump Maximum Capacity"] == T * HP);
  CHECK(fam["Heat Pump Robust Linking"] == HP);
  CHECK(fam["Simultaneous Heating Technologies"] == S);
  CHECK(fam["Hot Water Tank Limitation"] == S);
  CHECK(fam["Hot Water Tank Heat Charge"] == T * W);
  CHECK(fam["Hot Water Tank BigM Limitation"] == T * W);
  CHECK(fam["Hot Water Tank Minimum Temperature"] == T * W);
  CHECK(fam["Hot Water Tank Temperature"] == T * W);
  CHECK(fam["Hot Water Tank Maximum Temperature"] == T * W);
  CHECK(fam["Hot Water Tank Heat"] == T * W);
  CHECK(fam["Hot Water Tank Heat Timebounds"] == S * W);
  CHECK(fam["Hot Water Tank Robust Linking"] == W);
}

TEST_CASE("zero-load problem accepts the all-zero point") {
  Timeline tl = two_season_timeline(4);
  const int T = tl.total_timepoints();
  DesProblem p = build_des_problem(test_load(T, 0.0, 0.0), test_catalog(), tl, test_env(T));
  std::vector<double> x(p.n_vars, 0.0);
  FeasReport rep = eval_feasibility(p, x);
  CHECK(rep.feasible());
  CHECK(rep.max_violation == 0.0);
}

TEST_CASE("constructed violation lands in the right family") {
  Timeline tl = two_season_timeline(4);
  const int T = tl.total_timepoints();
  DesProblem p = build_des_problem(test_load(T, 0.0, 0.0), test_catalog(), tl, test_env(T));
  std::vector<double> x(p.n_vars, 0.0);
  // stored exceeds cap*soc_max by exactly 0.1 with cap = 0
  x[p.var(VarFam::EBattStored, 1, 0)] = 0.1;
  FeasReport rep = eval_feasibility(p, x);
  CHECK(rep.family_violation["Battery Capacity 1"] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("battery balance holds with constant storage and zero flows") {
  Timeline tl = two_season_timeline(4);
  const int T = tl.total_timepoints();
  DesProblem p = build_des_problem(test_load(T, 0.0, 0.0), test_catalog(), tl, test_env(T));
  std::vector<double> x(p.n_vars, 0.0);
  FeasReport rep = eval_feasibility(p, x);
  CHECK(rep.family_violation["Battery Storage Balance"] == 0.0);
  CHECK(rep.family_violation["Battery Start and End SoC"] == 0.0);
}

TEST_CASE("real and reactive injections") {
  Timeline tl;
  tl.seasons.push_back({"winter", 92, 1, 12});
  DesProblem p = build_des_problem(test_load(1, 1.0, 0.0), test_catalog(), tl, test_env(1));

  SUBCASE("hand-evaluated real injection") {
    std::vector<double> x(p.n_vars, 0.0);
    x[p.var(VarFam::EPvSold, 0)] = 2.0;
    x[p.var(VarFam::EGrid, 0)] = 1.0;
    Injections inj = compute_injections(x, p, 0.8);
    CHECK(inj.P[0][0] == doctest::Approx(1.25e-3).epsilon(1e-12));
    CHECK(inj.P[1][0] == 0.0);
    CHECK(inj.P[2][0] == 0.0);
  }
  SUBCASE("hand-evaluated reactive injection") {
    double q = reactive_injection_pu(1.0, 0.95, 0.8, 1.0);
    CHECK(std::abs(q - (-4.1085e-4)) < 1e-8);
  }
  SUBCASE("zero activity gives zero injection") {
    DesProblem pz = build_des_problem(test_load(1, 0.0, 0.0), test_catalog(), tl, test_env(1));
    std::vector<double> xz(pz.n_vars, 0.0);
    Injections inj = compute_injections(xz, pz, 0.8);
    CHECK(inj.P[0][0] == 0.0);
    CHECK(inj.Q[0][0] == 0.0);
  }
  SUBCASE("zero power factor is rejected") {
    CHECK_THROWS_AS(reactive_injection_pu(1.0, 0.0, 0.8, 1.0), ModelError);
  }
}

TEST_CASE("robust season construction") {
  std::vector<double> winter_elec{0.5, 0.7};
  std::vector<std::vector<double>> heat_days{{1.0, 1.0}, {2.0, 1.5}, {1.2, 1.2}};
  std::vector<double> irr{0.2, 0.3};
  std::vector<std::vector<double>> temp_days{{5, 6}, {2, 3}, {4, 4}};

  RobustProfiles rp = make_robust_season(winter_elec, heat_days, irr, temp_days);
  CHECK(rp.elec[0] == doctest::Approx(1.55).epsilon(1e-12));
  CHECK(rp.elec[1] == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(rp.heat_day == 1);  // largest total heat
  CHECK(rp.temp_day == 1);  // coldest mean
  CHECK(rp.irradiance == irr);

  SUBCASE("ties pick the first day") {
    std::vector<std::vector<double>> same{{1.0, 1.0}, {1.0, 1.0}};
    RobustProfiles tie = make_robust_season(winter_elec, same, irr, same);
    CHECK(tie.heat_day == 0);
    CHECK(tie.temp_day == 0);
  }
  SUBCASE("empty inputs rejected") {
    CHECK_THROWS_AS(make_robust_season({}, heat_days, irr, temp_days), ModelError);
  }
}

TEST_CASE("cost terms evaluate per their formulas") {
  // four normal seasons, one timepoint each, to pin the capex split
  Timeline tl;
  tl.seasons.push_back({"winter", 92, 24, 0});
  TechCatalog cat = test_catalog();
  cat.crf = 0.0981;
  cat.pv.r_capital = 450.0;
  cat.tariffs.seg = 0.132;

  SUBCASE("pv capex over four seasons") {
    Timeline tl4;
    tl4.seasons = {{"winter", 92, 2, 0}, {"spring", 92, 2, 0}, {"summer", 91, 2, 0},
                   {"autumn", 90, 2, 0}};
    const int T = tl4.total_timepoints();
    DesProblem p = build_des_problem(test_load(T, 0.0, 0.0), cat, tl4, test_env(T));
    std::vector<double> x(p.n_vars, 0.0);
    for (int s = 0; s < 4; ++s) x[p.var(VarFam::PvPanels, s)] = 10.0;
    CostBreakdown cb = cost_breakdown(x, p);
    for (int s = 0; s < 4; ++s)
      CHECK(std::abs(cb.pv_capex[s] - 110.36) < 0.01);
  }
  SUBCASE("zero point costs nothing") {
    const int T = tl.total_timepoints();
    DesProblem p = build_des_problem(test_load(T, 0.0, 0.0), cat, tl, test_env(T));
    std::vector<double> x(p.n_vars, 0.0);
    CHECK(cost_breakdown(x, p).tac == 0.0);
  }
  SUBCASE("export income over a 92-day season") {
    const int T = tl.total_timepoints();
    DesProblem p = build_des_problem(test_load(T, 0.0, 0.0), cat, tl, test_env(T));
    std::vector<double> x(p.n_vars, 0.0);
    for (int t = 0; t < T; ++t) x[p.var(VarFam::EPvSold, t)] = 1.0;
    CostBreakdown cb = cost_breakdown(x, p);
    CHECK(std::abs(cb.seg_income[0] - 291.46) < 0.01);
    CHECK(cb.tac == doctest::Approx(-cb.seg_income[0]).epsilon(1e-12));
  }
}

TEST_CASE("missing technology family is rejected") {
  Timeline tl = two_season_timeline(2);
  TechCatalog cat = test_catalog();
  cat.heat_pumps.clear();
  CHECK_THROWS_AS(build_des_problem(test_load(4), cat, tl, test_env(4)), ModelError);
}
