#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "desgn/acpf.hpp"
#include "desgn/feeder.hpp"
#include "doctest.h"

using namespace desgn;

namespace {

const std::string kFixtures = DESGN_FIXTURE_DIR;

Network two_bus_single_phase(double g = 0.0, double b = -10.0) {
  Network net;
  Bus slack;
  slack.id = "s";
  slack.kind = BusKind::Slack;
  slack.phases = PhaseSet::parse("A");
  Bus load = slack;
  load.id = "b";
  load.kind = BusKind::Load;
  net.buses = {slack, load};
  net.slack = 0;
  Branch br;
  br.from = 0;
  br.to = 1;
  br.G(0, 0) = g;
  br.B(0, 0) = b;
  br.phases = PhaseSet::parse("A");
  net.branches.push_back(br);
  return net;
}

Network isolated_slack() {
  Network net;
  Bus slack;
  slack.id = "s";
  slack.kind = BusKind::Slack;
  slack.phases = PhaseSet::parse("ABC");
  net.buses = {slack};
  net.slack = 0;
  return net;
}

}  // namespace

TEST_CASE("isolated slack bus has zero mismatch") {
  Network net = isolated_slack();
  YBus yb = YBus::build(net);
  SystemState st = flat_start(yb.nodes, 2);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(yb.nodes.n, 2);
  BimMismatch mm = bim_residual(st, yb, zero, zero);
  CHECK(mm.max_abs() == 0.0);
}

TEST_CASE("flat start on a pure-susceptance line leaves the injection as mismatch") {
  Network net = two_bus_single_phase(0.0, -10.0);
  YBus yb = YBus::build(net);
  SystemState st = flat_start(yb.nodes, 1);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2, 1), Q = Eigen::MatrixXd::Zero(2, 1);
  P(1, 0) = 0.03;
  Q(1, 0) = -0.01;
  BimMismatch mm = bim_residual(st, yb, P, Q);
  CHECK(mm.dP(1, 0) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(mm.dQ(1, 0) == doctest::Approx(-0.01).epsilon(1e-12));
}

TEST_CASE("branch flow hand check") {
  Network net = two_bus_single_phase(0.0, -10.0);
  NodeMap nodes = NodeMap::build(net);
  SystemState st = flat_start(nodes, 1);
  st.theta(1, 0) = -0.1;
  BranchFlow bf = branch_flow(st, nodes, net.branches[0], 0);
  CHECK(bf.P[0] == doctest::Approx(10.0 * std::sin(0.1)).epsilon(1e-9));
  CHECK(bf.P[1] == 0.0);
  CHECK(bf.P[2] == 0.0);
}

TEST_CASE("equal endpoint voltages carry no flow") {
  Network net = two_bus_single_phase(2.0, -6.0);
  NodeMap nodes = NodeMap::build(net);
  SystemState st = flat_start(nodes, 1);
  BranchFlow bf = branch_flow(st, nodes, net.branches[0], 0);
  CHECK(std::abs(bf.P[0]) < 1e-15);
  CHECK(std::abs(bf.Q[0]) < 1e-15);
}

TEST_CASE("series loss of a resistive line is nonnegative") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dv(0.9, 1.1), dth(-0.2, 0.2);
  Network net = two_bus_single_phase(4.0, -8.0);
  NodeMap nodes = NodeMap::build(net);
  for (int trial = 0; trial < 50; ++trial) {
    SystemState st = flat_start(nodes, 1);
    st.V(0, 0) = dv(rng);
    st.V(1, 0) = dv(rng);
    st.theta(0, 0) = dth(rng);
    st.theta(1, 0) = dth(rng);
    BranchFlow fwd = branch_flow(st, nodes, net.branches[0], 0);
    BranchFlow rev = branch_flow(st, nodes, net.branches[0], 0, /*reverse=*/true);
    CHECK(fwd.P[0] + rev.P[0] >= -1e-12);
  }
}

TEST_CASE("zero-admittance phases flow nothing") {
  Network net = two_bus_single_phase(0.0, -10.0);
  NodeMap nodes = NodeMap::build(net);
  SystemState st = flat_start(nodes, 1);
  st.theta(1, 0) = -0.05;
  BranchFlow bf = branch_flow(st, nodes, net.branches[0], 0);
  CHECK(bf.P[1] == 0.0);
  CHECK(bf.Q[2] == 0.0);
}

TEST_CASE("newton with zero injections stays at flat start") {
  Network net = parse_network(kFixtures + "/elvtf2_t8");
  YBus yb = YBus::build(net);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(yb.nodes.n, 1);
  SystemState st = flat_start(yb.nodes, 1);
  std::vector<int> slack_nodes;
  for (int ph = 0; ph < 3; ++ph) {
    int n = yb.nodes.node_of[net.slack][ph];
    if (n >= 0) slack_nodes.push_back(n);
  }
  NewtonReport rep = newton_pf(yb, slack_nodes, zero, zero, st);
  CHECK(rep.converged);
  CHECK(rep.worst_iterations <= 1);
  CHECK((st.V.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("two-bus solution matches a refined grid search") {
  Network net = two_bus_single_phase(1.5, -9.0);
  YBus yb = YBus::build(net);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2, 1), Q = Eigen::MatrixXd::Zero(2, 1);
  P(1, 0) = -0.04;
  Q(1, 0) = -0.015;
  SystemState st = flat_start(yb.nodes, 1);
  NewtonOptions opts;
  opts.tol = 1e-12;
  NewtonReport rep = newton_pf(yb, {0}, P, Q, st, opts);
  REQUIRE(rep.converged);

  // brute force over (V, theta): shrink the grid around the best point
  auto mismatch = [&](double v, double th) {
    SystemState s2 = st;
    s2.V(1, 0) = v;
    s2.theta(1, 0) = th;
    BimMismatch mm = bim_residual(s2, yb, P, Q);
    return std::max(std::abs(mm.dP(1, 0)), std::abs(mm.dQ(1, 0)));
  };
  double vlo = 0.8, vhi = 1.1, tlo = -0.3, thi = 0.3;
  double bv = 1.0, bt = 0.0;
  for (int round = 0; round < 12; ++round) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) {
        double v = vlo + (vhi - vlo) * i / 40.0;
        double th = tlo + (thi - tlo) * j / 40.0;
        double m = mismatch(v, th);
        if (m < best) {
          best = m;
          bv = v;
          bt = th;
        }
      }
    double dv = (vhi - vlo) / 8.0, dt = (thi - tlo) / 8.0;
    vlo = bv - dv;
    vhi = bv + dv;
    tlo = bt - dt;
    thi = bt + dt;
  }
  CHECK(std::abs(st.V(1, 0) - bv) < 1e-6);
  CHECK(std::abs(st.theta(1, 0) - bt) < 1e-6);
}

TEST_CASE("jacobian matches central finite differences") {
  Network net = parse_network(kFixtures + "/elvtf2_t8");
  YBus yb = YBus::build(net);
  std::vector<int> free_nodes;
  for (int k = 0; k < yb.nodes.n; ++k)
    if (yb.nodes.of_node[k].first != net.slack) free_nodes.push_back(k);
  const int nf = (int)free_nodes.size();

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dv(0.95, 1.05), dth(-0.05, 0.05);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    SystemState st = flat_start(yb.nodes, 1);
    for (int k = 0; k < yb.nodes.n; ++k) {
      st.V(k, 0) *= dv(rng);
      st.theta(k, 0) += dth(rng);
    }
    Eigen::MatrixXd J = bim_jacobian(yb, st, 0, free_nodes);
    const double h = 1e-6;
    Eigen::VectorXd Pp(yb.nodes.n), Qp(yb.nodes.n), Pm(yb.nodes.n), Qm(yb.nodes.n);
    for (int c = 0; c < 2 * nf; ++c) {
      SystemState plus = st, minus = st;
      int node = free_nodes[c % nf];
      if (c < nf) {
        plus.theta(node, 0) += h;
        minus.theta(node, 0) -= h;
      } else {
        plus.V(node, 0) += h;
        minus.V(node, 0) -= h;
      }
      bim_power(yb, plus, 0, Pp, Qp);
      bim_power(yb, minus, 0, Pm, Qm);
      for (int r = 0; r < nf; ++r) {
        double fd_p = (Pp[free_nodes[r]] - Pm[free_nodes[r]]) / (2 * h);
        double fd_q = (Qp[free_nodes[r]] - Qm[free_nodes[r]]) / (2 * h);
        double scale = std::max(1.0, std::abs(fd_p));
        worst = std::max(worst, std::abs(J(r, c) - fd_p) / scale);
        scale = std::max(1.0, std::abs(fd_q));
        worst = std::max(worst, std::abs(J(nf + r, c) - fd_q) / scale);
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("power balances at a newton solution") {
  Network net = parse_network(kFixtures + "/elvtf5_t8");
  YBus yb = YBus::build(net);
  const int T = 2;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(yb.nodes.n, T);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(yb.nodes.n, T);
  for (const auto& ld : net.loads) {
    int node = yb.nodes.node_of[ld.bus][(int)ld.phase];
    for (int t = 0; t < T; ++t) {
      P(node, t) = -2e-3;
      Q(node, t) = -6e-4;
    }
  }
  std::vector<int> slack_nodes;
  for (int ph = 0; ph < 3; ++ph) slack_nodes.push_back(yb.nodes.node_of[net.slack][ph]);
  SystemState st = flat_start(yb.nodes, T);
  NewtonOptions opts;
  opts.tol = 1e-10;
  NewtonReport rep = newton_pf(yb, slack_nodes, P, Q, st, opts);
  REQUIRE(rep.converged);
  CHECK(rep.worst_mismatch <= 1e-10);

  // self-consistency: residual at the solution
  BimMismatch mm = bim_residual(st, yb, P, Q);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < yb.nodes.n; ++k) {
      bool slackbus = yb.nodes.of_node[k].first == net.slack;
      if (slackbus) continue;
      CHECK(std::abs(mm.dP(k, t)) <= 1e-8);
      CHECK(std::abs(mm.dQ(k, t)) <= 1e-8);
    }

  // slack output + injections = losses
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd Pc(yb.nodes.n), Qc(yb.nodes.n);
    bim_power(yb, st, t, Pc, Qc);
    double slack_out = 0;
    for (int s : slack_nodes) slack_out += Pc[s];
    double injected = P.col(t).sum();  // load nodes only (slack rows are zero)
    double losses = 0;
    for (const auto& br : net.branches) {
      BranchFlow fwd = branch_flow(st, yb.nodes, br, t);
      BranchFlow rev = branch_flow(st, yb.nodes, br, t, true);
      losses += fwd.P.sum() + rev.P.sum();
    }
    CHECK(std::abs(injected + slack_out - losses) < 1e-6);
  }
}

TEST_CASE("violation statistics") {
  Network net = two_bus_single_phase();
  NodeMap nodes = NodeMap::build(net);
  SystemState st = flat_start(nodes, 1);

  SUBCASE("all within limits") {
    ViolationReport rep = violation_stats(st, nodes, 1.05, 0.95);
    CHECK(rep.upper.max_violation_pct == 0.0);
    CHECK(rep.upper.avg_violation_pct == 0.0);
    CHECK(rep.upper.pct_violated == 0.0);
    CHECK(rep.lower.max_violation_pct == 0.0);
  }
  SUBCASE("hand-computed upper violation") {
    st.V(0, 0) = 1.06;
    st.V(1, 0) = 1.00;
    ViolationReport rep = violation_stats(st, nodes, 1.05, 0.95);
    CHECK(rep.upper.max_violation_pct == doctest::Approx(0.952381).epsilon(1e-4));
    CHECK(rep.upper.pct_violated == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(rep.upper.avg_violation_pct == doctest::Approx(0.47619).epsilon(1e-4));
    CHECK(rep.lower.max_violation_pct == 0.0);
  }
  SUBCASE("entries populated for the csv") {
    ViolationReport rep = violation_stats(st, nodes, 1.05, 0.95);
    CHECK(rep.entries.size() == 2);
    CHECK(rep.entries[0].v_pu == 1.0);
  }
}
