#include <algorithm>
#include <queue>
#include <unordered_set>

#include "desgn/feeder.hpp"

namespace desgn {

Network derive_subfeeder(const Network& net, const std::vector<std::string>& keep_loads) {
  if (keep_loads.empty()) throw ModelError("empty keep set");

  std::unordered_set<std::string> keep(keep_loads.begin(), keep_loads.end());
  std::vector<int> kept_load_idx;
  for (const auto& id : keep_loads) {
    int found = -1;
    for (size_t i = 0; i < net.loads.size(); ++i)
      if (net.loads[i].id == id) found = static_cast<int>(i);
    if (found < 0) throw ModelError("load id not found: " + id);
    kept_load_idx.push_back(found);
  }

  // BFS tree from the slack, then walk each kept load back to the root.
  std::vector<std::vector<std::pair<int, int>>> adj(net.buses.size());  // (bus, branch)
  for (size_t e = 0; e < net.branches.size(); ++e) {
    adj[net.branches[e].from].push_back({net.branches[e].to, static_cast<int>(e)});
    adj[net.branches[e].to].push_back({net.branches[e].from, static_cast<int>(e)});
  }
  std::vector<int> parent(net.buses.size(), -1), parent_edge(net.buses.size(), -1);
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
        parent_edge[v] = e;
        q.push(v);
      }
  }

  std::vector<char> keep_bus(net.buses.size(), 0), keep_branch(net.branches.size(), 0);
  keep_bus[net.slack] = 1;
  for (int li : kept_load_idx) {
    int b = net.loads[li].bus;
    if (!vis[b]) throw ModelError("load bus unreachable from slack");
    while (b != net.slack && !keep_bus[b]) {
      keep_bus[b] = 1;
      keep_branch[parent_edge[b]] = 1;
      b = parent[b];
    }
  }

  Network sub;
  sub.s_base_mva = net.s_base_mva;
  std::vector<int> remap(net.buses.size(), -1);
  for (size_t i = 0; i < net.buses.size(); ++i) {
    if (!keep_bus[i]) continue;
    Bus b = net.buses[i];
    bool hosts_kept_load = false;
    for (int li : kept_load_idx)
      if (net.loads[li].bus == static_cast<int>(i)) hosts_kept_load = true;
    if (b.kind == BusKind::Load && !hosts_kept_load) b.kind = BusKind::Junction;
    remap[i] = static_cast<int>(sub.buses.size());
    if (b.kind == BusKind::Slack) sub.slack = remap[i];
    sub.buses.push_back(std::move(b));
  }
  for (size_t e = 0; e < net.branches.size(); ++e) {
    if (!keep_branch[e]) continue;
    Branch br = net.branches[e];
    br.from = remap[br.from];
    br.to = remap[br.to];
    sub.branches.push_back(std::move(br));
  }
  for (const auto& ld : net.loads) {
    if (!keep.count(ld.id)) continue;
    LoadPoint copy = ld;
    copy.bus = remap[copy.bus];
    sub.loads.push_back(std::move(copy));
  }

  sub.validate(/*radial=*/true);
  return sub;
}

}  // namespace desgn
