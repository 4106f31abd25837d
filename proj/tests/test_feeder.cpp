#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <queue>
#include <set>

#include "desgn/feeder.hpp"
#include "doctest.h"

using namespace desgn;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = DESGN_FIXTURE_DIR;

fs::path write_trivial_feeder() {
  fs::path dir = fs::temp_directory_path() / "desgn_trivial_feeder";
  fs::create_directories(dir);
  std::ofstream(dir / "buses.csv") << "id,kind,phases,v_base_v\nslack,slack,ABC,416\n";
  {
    std::ofstream b(dir / "branches.csv");
    b << "from,to";
    for (int k = 0; k < 9; ++k) b << ",r" << k;
    for (int k = 0; k < 9; ++k) b << ",x" << k;
    b << ",length_km\n";
  }
  std::ofstream(dir / "loads.csv") << "load_id,bus_id,phase\n";
  std::ofstream(dir / "profiles.csv") << "load_id,kind,t0\n";
  return dir;
}

// independent path-union oracle for sub-feeder derivation
std::pair<int, int> bfs_path_union_counts(const Network& net, const std::vector<std::string>& keep) {
  std::vector<std::vector<std::pair<int, int>>> adj(net.buses.size());
  for (size_t e = 0; e < net.branches.size(); ++e) {
    adj[net.branches[e].from].push_back({net.branches[e].to, (int)e});
    adj[net.branches[e].to].push_back({net.branches[e].from, (int)e});
  }
  std::vector<int> parent(net.buses.size(), -1), pedge(net.buses.size(), -1);
  std::vector<char> vis(net.buses.size(), 0);
  std::queue<int> q;
  q.push(net.slack);
  vis[net.slack] = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, e] : adj[u])
      if (!vis[v]) {
        vis[v] = 1;
        parent[v] = u;
        pedge[v] = e;
        q.push(v);
      }
  }
  std::set<int> buses{net.slack}, edges;
  for (const auto& id : keep) {
    int b = -1;
    for (const auto& ld : net.loads)
      if (ld.id == id) b = ld.bus;
    REQUIRE(b >= 0);
    while (b != net.slack) {
      buses.insert(b);
      edges.insert(pedge[b]);
      b = parent[b];
    }
  }
  return {(int)buses.size(), (int)edges.size()};
}

}  // namespace

TEST_CASE("elvtf5 fixture dimensions") {
  Network net = parse_network(kFixtures + "/elvtf5_t8");
  CHECK(net.buses.size() == 46);
  CHECK(net.branches.size() == 45);
  CHECK(net.loads.size() == 5);
  // radial: every bus reachable, |E| = |N|-1 (validated inside parse)
  CHECK(net.slack >= 0);
}

TEST_CASE("trivial single-bus feeder parses") {
  fs::path dir = write_trivial_feeder();
  Network net = parse_network(dir.string());
  CHECK(net.buses.size() == 1);
  CHECK(net.branches.empty());
  CHECK(net.loads.empty());
}

TEST_CASE("branch with unknown bus is rejected") {
  fs::path dir = fs::temp_directory_path() / "desgn_bad_feeder";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::copy(kFixtures + "/elvtf1_t8", dir,
           fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  std::ofstream b(dir / "branches.csv", std::ios::app);
  b << "nosuchbus,t1";
  for (int k = 0; k < 18; ++k) b << ",0.1";
  b << ",0.05\n";
  b.close();
  CHECK_THROWS_WITH_AS(parse_network(dir.string()), doctest::Contains("unknown bus"),
                       InputError);
}

TEST_CASE("sub-feeder matches the path-union oracle") {
  Network net = parse_network(kFixtures + "/elvtf5_t8");
  std::vector<std::string> keep{"L1", "L3"};
  auto [nb, ne] = bfs_path_union_counts(net, keep);
  Network sub = derive_subfeeder(net, keep);
  CHECK((int)sub.buses.size() == nb);
  CHECK((int)sub.branches.size() == ne);
  CHECK(sub.loads.size() == 2);

  SUBCASE("idempotent") {
    Network sub2 = derive_subfeeder(sub, keep);
    CHECK(sub2.buses.size() == sub.buses.size());
    CHECK(sub2.branches.size() == sub.branches.size());
    for (size_t i = 0; i < sub.buses.size(); ++i) CHECK(sub2.buses[i].id == sub.buses[i].id);
  }
}

TEST_CASE("sub-feeder keeping everything is identity") {
  Network net = parse_network(kFixtures + "/elvtf5_t8");
  std::vector<std::string> all;
  for (const auto& ld : net.loads) all.push_back(ld.id);
  Network sub = derive_subfeeder(net, all);
  CHECK(sub.buses.size() == net.buses.size());
  CHECK(sub.branches.size() == net.branches.size());
}

TEST_CASE("sub-feeder with one load is a path") {
  Network net = parse_network(kFixtures + "/elvtf5_t8");
  Network sub = derive_subfeeder(net, {"L5"});
  CHECK(sub.branches.size() == sub.buses.size() - 1);
  std::vector<int> deg(sub.buses.size(), 0);
  for (const auto& br : sub.branches) {
    deg[br.from]++;
    deg[br.to]++;
  }
  for (int d : deg) CHECK(d <= 2);
}

TEST_CASE("sub-feeder errors") {
  Network net = parse_network(kFixtures + "/elvtf5_t8");
  CHECK_THROWS_AS(derive_subfeeder(net, {}), ModelError);
  CHECK_THROWS_AS(derive_subfeeder(net, {"nope"}), ModelError);
}

TEST_CASE("diagonal impedance inverts by hand") {
  Eigen::Matrix3cd z = Eigen::Matrix3cd::Zero();
  for (int k = 0; k < 3; ++k) z(k, k) = std::complex<double>(0.0, 0.1);
  // v_base 1000 V, s_base 1 MVA -> Z_base exactly 1 ohm
  auto [G, B] = assemble_branch_admittance(z, 1.0, 1000.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    CHECK(G(k, k) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(B(k, k) == doctest::Approx(-10.0).epsilon(1e-12));
  }
}

TEST_CASE("doubling length halves every admittance entry") {
  Eigen::Matrix3cd z;
  z << std::complex<double>(0.3, 0.1), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.04, 0.015), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.31, 0.11), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.04, 0.015), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.32, 0.12);
  auto [G1, B1] = assemble_branch_admittance(z, 1.0, 416.0, 0.8);
  auto [G2, B2] = assemble_branch_admittance(z, 2.0, 416.0, 0.8);
  CHECK((G2 - 0.5 * G1).cwiseAbs().maxCoeff() < 1e-12 * G1.cwiseAbs().maxCoeff());
  CHECK((B2 - 0.5 * B1).cwiseAbs().maxCoeff() < 1e-12 * B1.cwiseAbs().maxCoeff());
}

TEST_CASE("absent phase stays zero, others match the 2x2 oracle") {
  Eigen::Matrix3cd z = Eigen::Matrix3cd::Zero();
  z(0, 0) = std::complex<double>(0.3, 0.1);
  z(0, 2) = z(2, 0) = std::complex<double>(0.05, 0.02);
  z(2, 2) = std::complex<double>(0.31, 0.12);
  auto [G, B] = assemble_branch_admittance(z, 1.0, 416.0, 0.8);
  for (int k = 0; k < 3; ++k) {
    CHECK(G(1, k) == 0.0);
    CHECK(G(k, 1) == 0.0);
    CHECK(B(1, k) == 0.0);
    CHECK(B(k, 1) == 0.0);
  }
  Eigen::Matrix2cd zsub;
  zsub << z(0, 0), z(0, 2), z(2, 0), z(2, 2);
  double z_base = 416.0 * 416.0 / (0.8 * 1e6);
  Eigen::Matrix2cd ysub = zsub.inverse() * z_base;
  CHECK(G(0, 0) == doctest::Approx(ysub(0, 0).real()).epsilon(1e-12));
  CHECK(B(0, 2) == doctest::Approx(ysub(0, 1).imag()).epsilon(1e-12));
  CHECK(G(2, 2) == doctest::Approx(ysub(1, 1).real()).epsilon(1e-12));
}

TEST_CASE("per-unit round trip within 1e-12 relative") {
  Eigen::Matrix3cd z;
  z << std::complex<double>(0.3, 0.1), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.04, 0.015), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.31, 0.11), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.04, 0.015), std::complex<double>(0.05, 0.02),
      std::complex<double>(0.32, 0.12);
  auto [G, B] = assemble_branch_admittance(z, 0.045, 416.0, 0.8);
  Eigen::Matrix3cd back = branch_impedance_ohm_per_km(G, B, 0.045, 416.0, 0.8);
  CHECK((back - z).cwiseAbs().maxCoeff() < 1e-12 * z.cwiseAbs().maxCoeff());
}

TEST_CASE("line admittance blocks are symmetric on fixtures") {
  for (const char* name : {"elvtf1_t8", "elvtf2_t8", "elvtf5_t8"}) {
    Network net = parse_network(kFixtures + "/" + name);
    for (const auto& br : net.branches) {
      CHECK((br.G - br.G.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((br.B - br.B.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("singular impedance is rejected") {
  Eigen::Matrix3cd z;
  z.setConstant(std::complex<double>(0.1, 0.05));  // rank 1
  CHECK_THROWS_AS(assemble_branch_admittance(z, 1.0, 416.0, 0.8), ModelError);
}
