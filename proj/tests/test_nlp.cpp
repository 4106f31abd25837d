#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <random>

#include "desgn/comp.hpp"
#include "doctest.h"

using namespace desgn;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NlpProblem make_problem(int n) {
  NlpProblem p;
  p.n = n;
  p.lb = Eigen::VectorXd::Constant(n, -kInf);
  p.ub = Eigen::VectorXd::Constant(n, kInf);
  p.c_lin = Eigen::VectorXd::Zero(n);
  return p;
}

}  // namespace

TEST_CASE("active bound: min (x-2)^2 with x <= 1") {
  NlpProblem p = make_problem(1);
  p.ub[0] = 1.0;
  p.quad.push_back({{{0, 1.0}}, 2.0, 2.0});  // (x-2)^2
  AlResult res = solve_augmented(p, Eigen::VectorXd::Zero(1));
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("symmetric projection: min x^2+y^2 with x+y=1") {
  NlpProblem p = make_problem(2);
  p.quad.push_back({{{0, 1.0}}, 0.0, 2.0});
  p.quad.push_back({{{1, 1.0}}, 0.0, 2.0});
  std::vector<LinearBlock::Row> rows{{{{0, 1.0}, {1, 1.0}}, 1.0}};
  p.eq.push_back(std::make_unique<LinearBlock>(rows));
  AlResult res = solve_augmented(p, Eigen::VectorXd::Zero(2));
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(res.x[1] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(res.feasibility < 1e-9);
}

TEST_CASE("random convex QPs match the KKT oracle") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int inst = 0; inst < 8; ++inst) {
    int n = 4 + (int)(rng() % 3);
    int m = 1 + (int)(rng() % 2);
    // Q = I + sum_k w_k a_k a_k^T via quadratic terms
    NlpProblem p = make_problem(n);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) p.quad.push_back({{{i, 1.0}}, 0.0, 1.0});
    for (int k = 0; k < 3; ++k) {
      QuadTerm qt;
      Eigen::VectorXd a(n);
      for (int i = 0; i < n; ++i) {
        a[i] = u(rng);
        qt.terms.push_back({i, a[i]});
      }
      qt.weight = 0.8;
      qt.target = 0.0;
      p.quad.push_back(qt);
      Q += 0.8 * a * a.transpose();
    }
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) {
      c[i] = u(rng);
      p.c_lin[i] = c[i];
    }
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m);
    std::vector<LinearBlock::Row> rows;
    for (int r = 0; r < m; ++r) {
      LinearBlock::Row row;
      for (int i = 0; i < n; ++i) {
        A(r, i) = u(rng);
        row.terms.push_back({i, A(r, i)});
      }
      b[r] = u(rng);
      row.rhs = b[r];
      rows.push_back(row);
    }
    p.eq.push_back(std::make_unique<LinearBlock>(rows));

    // KKT: [Q A^T; A 0][x; y] = [-c; b]
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = Q;
    K.topRightCorner(n, m) = A.transpose();
    K.bottomLeftCorner(m, n) = A;
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = -c;
    rhs.tail(m) = b;
    Eigen::VectorXd sol = K.fullPivLu().solve(rhs);

    AlResult res = solve_augmented(p, Eigen::VectorXd::Zero(n));
    REQUIRE(res.converged);
    for (int i = 0; i < n; ++i)
      CHECK(res.x[i] == doctest::Approx(sol[i]).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("inner iterations never increase the merit") {
  NlpProblem p = make_problem(3);
  p.quad.push_back({{{0, 1.0}, {1, 0.5}}, 1.0, 2.0});
  p.quad.push_back({{{2, 1.0}}, -0.5, 1.0});
  std::vector<LinearBlock::Row> rows{{{{0, 1.0}, {1, 1.0}, {2, 1.0}}, 1.0}};
  p.eq.push_back(std::make_unique<LinearBlock>(rows));
  AlOptions opts;
  opts.record_merit = true;
  Eigen::VectorXd x0(3);
  x0 << 3.0, -2.0, 5.0;
  AlResult res = solve_augmented(p, x0, opts);
  CHECK(res.converged);
  // monotone within each outer iteration; multiplier updates may move it
  int violations = 0;
  for (size_t i = 1; i < res.merit_trace.size(); ++i)
    if (res.merit_trace[i] > res.merit_trace[i - 1] + 1e-9) ++violations;
  CHECK(violations <= res.outer_iters);
}

TEST_CASE("blocks differentiate correctly (finite differences)") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.2, 1.2);

  auto fd_check = [&](Block& blk, int n, const Eigen::VectorXd& x) {
    int m = blk.rows();
    Eigen::VectorXd r0(m), rp(m), rm(m);
    JacRows J;
    blk.jac(x, J);
    REQUIRE(J.rows() == m);
    double worst = 0;
    const double h = 1e-6;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(m, n);
    for (int r = 0; r < m; ++r)
      for (int k = J.row_ptr[r]; k < J.row_ptr[r + 1]; ++k)
        dense(r, J.col[k]) += J.val[k];
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      blk.eval(xp, rp.data());
      blk.eval(xm, rm.data());
      for (int r = 0; r < m; ++r) {
        double fd = (rp[r] - rm[r]) / (2 * h);
        worst = std::max(worst, std::abs(dense(r, i) - fd) / std::max(1.0, std::abs(fd)));
      }
    }
    return worst;
  };

  SUBCASE("product block") {
    ProductBlock blk({{0, 1}, {2, 3}}, 0.1);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd x(4);
      for (int i = 0; i < 4; ++i) x[i] = u(rng);
      CHECK(fd_check(blk, 4, x) < 1e-6);
    }
  }
  SUBCASE("branch flow block") {
    Eigen::Matrix3d G, B;
    G << 4, -0.5, -0.4, -0.5, 4.2, -0.5, -0.4, -0.5, 4.4;
    B << -8, 0.6, 0.5, 0.6, -8.2, 0.6, 0.5, 0.6, -8.4;
    auto blk = BranchFlowDefBlock(G, B, {0, 1, 2});
    BranchFlowDefBlock::RowGroup grp;
    for (int ph = 0; ph < 3; ++ph) {
      grp.from[ph] = {ph, 3 + ph};        // V_from 0..2, th_from 3..5
      grp.to[ph] = {6 + ph, 9 + ph};      // V_to, th_to
    }
    grp.pb = {12, 13, 14};
    grp.qb = {15, 16, 17};
    blk.add_timepoint(grp);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd x(18);
      for (int i = 0; i < 6; ++i) x[i] = 0.95 + 0.1 * u(rng);   // V
      for (int i = 3; i < 6; ++i) x[i] = 0.1 * (u(rng) - 0.7);  // th_from
      for (int i = 9; i < 12; ++i) x[i] = 0.1 * (u(rng) - 0.7);
      for (int i = 6; i < 9; ++i) x[i] = 0.95 + 0.1 * u(rng);
      for (int i = 12; i < 18; ++i) x[i] = u(rng);
      CHECK(fd_check(blk, 18, x) < 1e-5);
    }
  }
}

TEST_CASE("complementarity pass drives products below threshold") {
  // maximise u+v subject to u+v <= 0.8 and u*v <= eps
  NlpProblem p = make_problem(2);
  p.lb.setZero();
  p.c_lin << -1.0, -1.0;
  std::vector<LinearBlock::Row> rows{{{{0, 1.0}, {1, 1.0}}, 0.8}};
  p.ineq.push_back(std::make_unique<LinearBlock>(rows));
  auto prod = std::make_unique<ProductBlock>(
      std::vector<std::pair<int, int>>{{0, 1}}, 1.0);
  ProductBlock* handle = prod.get();
  p.ineq.push_back(std::move(prod));

  CompSchedule sched;
  sched.eps0 = 0.5;
  sched.shrink = 0.1;
  sched.threshold = 1e-6;
  Eigen::VectorXd x0(2);
  x0 << 0.5, 0.3;
  AlOptions opts;
  CompResult res = complementarity_pass(p, handle, sched, x0, opts);
  CHECK(res.feasible);
  CHECK(res.x[0] * res.x[1] <= 1e-6 + 1e-9);
  CHECK(res.x[0] + res.x[1] == doctest::Approx(0.8).epsilon(1e-6));

  SUBCASE("fix and recover pins the smaller member") {
    CompResult rec = fix_and_recover(p, handle, res.x, opts);
    CHECK(rec.feasible);
    CHECK(rec.x[0] * rec.x[1] == 0.0);
    CHECK(rec.x[0] + rec.x[1] == doctest::Approx(0.8).epsilon(1e-6));
    double obj_before = p.c_lin.dot(res.x);
    double obj_after = p.c_lin.dot(rec.x);
    CHECK(obj_after <= obj_before + 1e-6);
  }
}

TEST_CASE("already complementary start solves once") {
  NlpProblem p = make_problem(2);
  p.lb.setZero();
  p.c_lin << 1.0, 1.0;  // both want zero
  auto prod = std::make_unique<ProductBlock>(
      std::vector<std::pair<int, int>>{{0, 1}}, 1.0);
  ProductBlock* handle = prod.get();
  p.ineq.push_back(std::move(prod));
  CompSchedule sched;
  sched.eps0 = 1.0;
  sched.threshold = 1e-6;
  CompResult res = complementarity_pass(p, handle, sched, Eigen::VectorXd::Zero(2),
                                        AlOptions{});
  CHECK(res.solves == 1);
  CHECK(res.feasible);
}

TEST_CASE("pair forced positive on both sides flags infeasibility") {
  NlpProblem p = make_problem(2);
  p.lb.setZero();
  std::vector<LinearBlock::Row> rows{{{{0, 1.0}}, 0.5}, {{{1, 1.0}}, 0.5}};
  p.eq.push_back(std::make_unique<LinearBlock>(rows));
  auto prod = std::make_unique<ProductBlock>(
      std::vector<std::pair<int, int>>{{0, 1}}, 1.0);
  ProductBlock* handle = prod.get();
  p.ineq.push_back(std::move(prod));
  CompSchedule sched;
  sched.eps0 = 0.5;
  sched.threshold = 1e-6;
  Eigen::VectorXd x0(2);
  x0 << 0.5, 0.5;
  CompResult res = complementarity_pass(p, handle, sched, x0, AlOptions{});
  CHECK_FALSE(res.feasible);
  CHECK(res.eps_reached > 1e-6);  // stopped above the target
}

TEST_CASE("fix and recover tie rule and revert") {
  SUBCASE("tie fixes the first member") {
    NlpProblem p = make_problem(2);
    p.lb.setZero();
    p.c_lin << 0.0, 0.0;
    auto prod = std::make_unique<ProductBlock>(
        std::vector<std::pair<int, int>>{{0, 1}}, 1e-6);
    ProductBlock* handle = prod.get();
    p.ineq.push_back(std::move(prod));
    Eigen::VectorXd x(2);
    x << 0.3, 0.3;
    CompResult rec = fix_and_recover(p, handle, x, AlOptions{});
    CHECK(rec.feasible);
    CHECK(p.ub[0] == 0.0);  // first member pinned
    CHECK(p.ub[1] > 0.0);
  }
  SUBCASE("smaller member fixed") {
    NlpProblem p = make_problem(2);
    p.lb.setZero();
    auto prod = std::make_unique<ProductBlock>(
        std::vector<std::pair<int, int>>{{0, 1}}, 1e-6);
    ProductBlock* handle = prod.get();
    p.ineq.push_back(std::move(prod));
    Eigen::VectorXd x(2);
    x << 1e-7, 0.4;
    CompResult rec = fix_and_recover(p, handle, x, AlOptions{});
    CHECK(p.ub[0] == 0.0);
    CHECK(rec.x[0] == 0.0);
  }
  SUBCASE("infeasible fix is reverted and reported") {
    NlpProblem p = make_problem(2);
    p.lb.setZero();
    std::vector<LinearBlock::Row> rows{{{{0, 1.0}}, 0.4}};  // u must be 0.4
    p.eq.push_back(std::make_unique<LinearBlock>(rows));
    auto prod = std::make_unique<ProductBlock>(
        std::vector<std::pair<int, int>>{{0, 1}}, 1e-6);
    ProductBlock* handle = prod.get();
    p.ineq.push_back(std::move(prod));
    Eigen::VectorXd x(2);
    x << 0.4, 0.5;  // smaller member is u, but u cannot be zero
    CompResult rec = fix_and_recover(p, handle, x, AlOptions{});
    CHECK(rec.feasible);
    CHECK(rec.reverted_pairs.size() == 1);
  }
}
