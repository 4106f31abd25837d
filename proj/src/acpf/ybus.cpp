#include <algorithm>
#include <map>

#include "desgn/acpf.hpp"

namespace desgn {

NodeMap NodeMap::build(const Network& net) {
  std::vector<int> all(net.buses.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return build_subset(net, all);
}

NodeMap NodeMap::build_subset(const Network& net, const std::vector<int>& buses) {
  NodeMap nm;
  nm.node_of.assign(net.buses.size(), {-1, -1, -1});
  for (int b : buses) {
    for (Phase p : kPhases) {
      if (!net.buses[b].phases.has(p)) continue;
      nm.node_of[b][static_cast<int>(p)] = nm.n++;
      nm.of_node.push_back({b, p});
    }
  }
  return nm;
}

YBus YBus::build(const Network& net) {
  std::vector<int> all_buses(net.buses.size());
  for (size_t i = 0; i < all_buses.size(); ++i) all_buses[i] = static_cast<int>(i);
  std::vector<int> all_branches(net.branches.size());
  for (size_t i = 0; i < all_branches.size(); ++i) all_branches[i] = static_cast<int>(i);
  return build_subset(net, all_buses, all_branches);
}

YBus YBus::build_subset(const Network& net, const std::vector<int>& buses,
                        const std::vector<int>& branch_ids) {
  YBus yb;
  yb.nodes = NodeMap::build_subset(net, buses);
  std::vector<std::map<int, std::pair<double, double>>> acc(yb.nodes.n);

  auto add = [&](int node_a, int node_b, double g, double b) {
    auto& slot = acc[node_a][node_b];
    slot.first += g;
    slot.second += b;
  };

  for (int e : branch_ids) {
    const Branch& br = net.branches[e];
    for (int pr = 0; pr < 3; ++pr) {
      int a_from = yb.nodes.node_of[br.from][pr];
      int a_to = yb.nodes.node_of[br.to][pr];
      for (int pc = 0; pc < 3; ++pc) {
        double g = br.G(pr, pc), b = br.B(pr, pc);
        if (g == 0.0 && b == 0.0) continue;
        int b_from = yb.nodes.node_of[br.from][pc];
        int b_to = yb.nodes.node_of[br.to][pc];
        if (a_from < 0 || a_to < 0 || b_from < 0 || b_to < 0)
          throw ModelError("branch admittance touches a phase absent on its bus");
        // series element: +Y on both diagonal blocks, -Y off-diagonal
        add(a_from, b_from, g, b);
        add(a_to, b_to, g, b);
        add(a_from, b_to, -g, -b);
        add(a_to, b_from, -g, -b);
      }
    }
  }

  yb.y.resize(yb.nodes.n);
  for (int a = 0; a < yb.nodes.n; ++a) {
    yb.y[a].reserve(acc[a].size());
    for (const auto& [node, gb] : acc[a])
      yb.y[a].push_back(YEntry{node, gb.first, gb.second});
  }
  return yb;
}

}  // namespace desgn
