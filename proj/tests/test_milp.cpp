#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <random>

#include "desgn/feeder.hpp"
#include "desgn/siting.hpp"
#include "doctest.h"

using namespace desgn;

namespace {

const std::string kFixtures = DESGN_FIXTURE_DIR;

// Brute-force optimum by enumerating intersections of n active constraints
// drawn from rows and bounds. Only for tiny instances.
double vertex_enumeration_opt(const LinearProgram& lp, bool* feasible) {
  struct HalfSpace {
    Eigen::VectorXd a;
    double b;
    bool eq;
  };
  std::vector<HalfSpace> pool;
  for (const auto& r : lp.rows) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lp.n);
    for (auto [i, v] : r.terms) a[i] += v;
    if (r.sense == RowSense::Eq) pool.push_back({a, r.rhs, true});
    else if (r.sense == RowSense::Le) pool.push_back({a, r.rhs, false});
    else pool.push_back({-a, -r.rhs, false});
  }
  for (int i = 0; i < lp.n; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(lp.n);
    a[i] = -1;
    pool.push_back({a, -lp.lb[i], false});
    a[i] = 1;
    pool.push_back({a, lp.ub[i], false});
  }

  double best = lp.maximize ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
  *feasible = false;
  std::vector<int> idx(lp.n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == lp.n) {
      Eigen::MatrixXd A(lp.n, lp.n);
      Eigen::VectorXd b(lp.n);
      for (int r = 0; r < lp.n; ++r) {
        A.row(r) = pool[idx[r]].a.transpose();
        b[r] = pool[idx[r]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd x = lu.solve(b);
      for (const auto& h : pool) {
        double v = h.a.dot(x);
        if (h.eq ? std::abs(v - h.b) > 1e-7 : v > h.b + 1e-7) return;
      }
      double obj = 0;
      for (int i = 0; i < lp.n; ++i) obj += lp.c[i] * x[i];
      *feasible = true;
      best = lp.maximize ? std::max(best, obj) : std::min(best, obj);
      return;
    }
    for (int i = start; i < (int)pool.size(); ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("simplex basics") {
  SUBCASE("max x+y subject to x+y <= 1") {
    LinearProgram lp;
    lp.maximize = true;
    lp.add_var(0, 1, 1.0);
    lp.add_var(0, 1, 1.0);
    auto& r = lp.add_row(RowSense::Le, 1.0);
    r.terms = {{0, 1.0}, {1, 1.0}};
    LpResult res = solve_lp(lp);
    CHECK(res.status == LpStatus::Optimal);
    CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("infeasible pair") {
    LinearProgram lp;
    lp.add_var(0, 10, 1.0);
    auto& r1 = lp.add_row(RowSense::Ge, 2.0);
    r1.terms = {{0, 1.0}};
    auto& r2 = lp.add_row(RowSense::Le, 1.0);
    r2.terms = {{0, 1.0}};
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
  }
  SUBCASE("unbounded") {
    LinearProgram lp;
    lp.maximize = true;
    lp.add_var(0, std::numeric_limits<double>::infinity(), 1.0);
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
  }
  SUBCASE("free variables and equality rows") {
    // min x + y st x + y = 3, x - y = 1 -> unique point (2,1)
    LinearProgram lp;
    double inf = std::numeric_limits<double>::infinity();
    lp.add_var(-inf, inf, 1.0);
    lp.add_var(-inf, inf, 1.0);
    auto& r1 = lp.add_row(RowSense::Eq, 3.0);
    r1.terms = {{0, 1.0}, {1, 1.0}};
    auto& r2 = lp.add_row(RowSense::Eq, 1.0);
    r2.terms = {{0, 1.0}, {1, -1.0}};
    LpResult res = solve_lp(lp);
    CHECK(res.status == LpStatus::Optimal);
    CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("random LPs agree with vertex enumeration") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), rhs(0.5, 4.0);
  int solved = 0;
  for (int inst = 0; inst < 25; ++inst) {
    LinearProgram lp;
    int n = 4 + (int)(rng() % 3);  // 4..6 vars
    int m = 4 + (int)(rng() % 3);
    for (int i = 0; i < n; ++i) lp.add_var(0.0, 3.0, coef(rng));
    for (int r = 0; r < m; ++r) {
      auto& row = lp.add_row(rng() % 3 == 0 ? RowSense::Ge : RowSense::Le,
                             rng() % 3 == 0 ? -rhs(rng) : rhs(rng));
      for (int i = 0; i < n; ++i) {
        double v = coef(rng);
        if (std::abs(v) > 0.4) row.terms.push_back({i, v});
      }
      if (row.terms.empty()) row.terms.push_back({0, 1.0});
    }
    bool feasible = false;
    double oracle = vertex_enumeration_opt(lp, &feasible);
    LpResult res = solve_lp(lp);
    if (!feasible) {
      CHECK(res.status == LpStatus::Infeasible);
    } else {
      REQUIRE(res.status == LpStatus::Optimal);
      CHECK(std::abs(res.objective - oracle) < 1e-7 * (1.0 + std::abs(oracle)));
      ++solved;
    }
  }
  CHECK(solved > 5);
}

TEST_CASE("knapsack branch and bound") {
  LinearProgram lp;
  lp.maximize = true;
  lp.add_var(0, 1, 5.0);
  lp.add_var(0, 1, 4.0);
  auto& r = lp.add_row(RowSense::Le, 4.0);
  r.terms = {{0, 3.0}, {1, 2.0}};
  BnbResult res = branch_and_bound(lp, {0, 1});
  CHECK(res.status == LpStatus::Optimal);
  // enumeration: (0,0)=0 (1,0)=5 (0,1)=4 (1,1) infeasible
  CHECK(res.objective == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(res.x[0] == doctest::Approx(1.0));
  CHECK(res.x[1] == doctest::Approx(0.0));
  CHECK(res.proven_optimal);
}

TEST_CASE("integral relaxation solves at the root") {
  LinearProgram lp;
  lp.add_var(0, 1, 1.0);   // minimised binary rests at 0
  lp.add_var(0, 5, -1.0);  // continuous pushes to its bound
  auto& r = lp.add_row(RowSense::Le, 5.0);
  r.terms = {{1, 1.0}};
  BnbResult res = branch_and_bound(lp, {0});
  CHECK(res.status == LpStatus::Optimal);
  CHECK(res.nodes == 1);
}

TEST_CASE("random binary instances match exhaustive enumeration") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), rhs(1.0, 6.0);
  for (int inst = 0; inst < 10; ++inst) {
    int nb = 6 + (int)(rng() % 5);  // 6..10 binaries
    LinearProgram lp;
    for (int i = 0; i < nb; ++i) lp.add_var(0, 1, coef(rng));
    int m = 3 + (int)(rng() % 3);
    for (int r = 0; r < m; ++r) {
      auto& row = lp.add_row(RowSense::Le, rhs(rng));
      for (int i = 0; i < nb; ++i) {
        double v = coef(rng);
        if (std::abs(v) > 0.8) row.terms.push_back({i, v});
      }
      if (row.terms.empty()) row.terms.push_back({0, 1.0});
    }
    std::vector<int> bins(nb);
    for (int i = 0; i < nb; ++i) bins[i] = i;

    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int mask = 0; mask < (1 << nb); ++mask) {
      double obj = 0;
      bool ok = true;
      for (const auto& row : lp.rows) {
        double act = 0;
        for (auto [i, v] : row.terms) act += v * ((mask >> i) & 1);
        if (act > row.rhs + 1e-9) ok = false;
      }
      if (!ok) continue;
      for (int i = 0; i < nb; ++i) obj += lp.c[i] * ((mask >> i) & 1);
      best = std::min(best, obj);
      any = true;
    }
    BnbResult res = branch_and_bound(lp, bins);
    if (!any) {
      CHECK(res.status == LpStatus::Infeasible);
    } else {
      REQUIRE(res.status == LpStatus::Optimal);
      CHECK(std::abs(res.objective - best) < 1e-7 * (1.0 + std::abs(best)));
    }
  }
}

TEST_CASE("siting stage on fixtures") {
  Network net = parse_network(kFixtures + "/elvtf2_t8");
  EnvSeries env = parse_env(kFixtures + "/elvtf2_t8");
  TechCatalog cat = load_catalog(kFixtures + "/catalog.json");
  Timeline tl = load_timeline(kFixtures + "/timeline8.json");
  std::vector<DesProblem> des;
  for (const auto& ld : net.loads) des.push_back(build_des_problem(ld, cat, tl, env));

  SitingResult res = solve_siting_milp(des);

  SUBCASE("aggregate equals the per-load sum") {
    double sum = 0;
    for (const auto& cb : res.costs) sum += cb.tac;
    CHECK(res.tac == doctest::Approx(sum).epsilon(1e-12));
  }
  SUBCASE("solutions satisfy the full constraint set") {
    for (size_t li = 0; li < des.size(); ++li) {
      FeasReport rep = eval_feasibility(des[li], res.x[li]);
      CHECK(rep.max_violation < 1e-7);
    }
  }
  SUBCASE("sizing copies agree across seasons including robust") {
    for (size_t li = 0; li < des.size(); ++li) {
      const DesProblem& d = des[li];
      for (int s = 1; s < d.nS(); ++s) {
        CHECK(res.x[li][d.var(VarFam::PvPanels, s)] ==
              doctest::Approx(res.x[li][d.var(VarFam::PvPanels, 0)]).epsilon(1e-7));
        CHECK(res.x[li][d.var(VarFam::HBoilerMax, s)] ==
              doctest::Approx(res.x[li][d.var(VarFam::HBoilerMax, 0)]).epsilon(1e-7));
      }
    }
  }
  SUBCASE("battery and tank cycles close") {
    for (size_t li = 0; li < des.size(); ++li) {
      const DesProblem& d = des[li];
      for (int s = 0; s < d.nS(); ++s) {
        int t0 = d.tl.block_start(s), t1 = d.tl.block_end(s) - 1;
        CHECK(res.x[li][d.var(VarFam::EBattStored, t0, 0)] ==
              doctest::Approx(res.x[li][d.var(VarFam::EBattStored, t1, 0)]).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("zero tariffs and zero loads cost nothing") {
  Network net = parse_network(kFixtures + "/elvtf1_t8");
  EnvSeries env = parse_env(kFixtures + "/elvtf1_t8");
  TechCatalog cat = load_catalog(kFixtures + "/catalog.json");
  cat.tariffs = Tariffs{0.0, 0.0, 0.0, 0.0};
  Timeline tl = load_timeline(kFixtures + "/timeline8.json");
  LoadPoint zero = net.loads[0];
  std::fill(zero.elec_profile.begin(), zero.elec_profile.end(), 0.0);
  std::fill(zero.heat_profile.begin(), zero.heat_profile.end(), 0.0);
  std::vector<DesProblem> des{build_des_problem(zero, cat, tl, env)};
  SitingResult res = solve_siting_milp(des);
  CHECK(std::abs(res.tac) < 1e-7);
}

TEST_CASE("generous export tariff fills the roof up to the binding limit") {
  Network net = parse_network(kFixtures + "/elvtf1_t8");
  EnvSeries env = parse_env(kFixtures + "/elvtf1_t8");
  TechCatalog cat = load_catalog(kFixtures + "/catalog.json");
  cat.tariffs.seg = 0.25;  // above the day tariff
  Timeline tl = load_timeline(kFixtures + "/timeline8.json");
  std::vector<DesProblem> des{build_des_problem(net.loads[0], cat, tl, env)};
  SitingResult res = solve_siting_milp(des);

  double panels = res.x[0][des[0].var(VarFam::PvPanels, 0)];
  double roof_limit = cat.pv.roof_max_m2 / cat.pv.panel_area_m2;
  CHECK(panels == doctest::Approx(roof_limit).epsilon(1e-6));

  // exhaustive oracle over the panel count
  double best = std::numeric_limits<double>::infinity();
  for (double fixed = 0.0; fixed <= roof_limit + 1e-9; fixed += roof_limit / 8.0) {
    LinearProgram lp = lp_from_des(des[0]);
    for (int s = 0; s < des[0].nS(); ++s) {
      lp.lb[des[0].var(VarFam::PvPanels, s)] = fixed;
      lp.ub[des[0].var(VarFam::PvPanels, s)] = fixed;
    }
    BnbResult r = branch_and_bound(lp, binary_indices(des[0]));
    if (r.status == LpStatus::Optimal) best = std::min(best, r.objective);
  }
  CHECK(res.tac <= best + 1e-6);
}
