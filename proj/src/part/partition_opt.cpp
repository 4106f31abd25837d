#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

#include "desgn/timing_model.hpp"

namespace desgn {

namespace {

struct Tree {
  std::vector<int> parent, depth, degree;

  static Tree build(const Network& net) {
    Tree tr;
    tr.parent.assign(net.buses.size(), -1);
    tr.depth.assign(net.buses.size(), -1);
    tr.degree.assign(net.buses.size(), 0);
    std::vector<std::vector<int>> adj(net.buses.size());
    for (const auto& br : net.branches) {
      adj[br.from].push_back(br.to);
      adj[br.to].push_back(br.from);
      tr.degree[br.from]++;
      tr.degree[br.to]++;
    }
    std::queue<int> q;
    q.push(net.slack);
    tr.depth[net.slack] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (tr.depth[v] < 0) {
          tr.depth[v] = tr.depth[u] + 1;
          tr.parent[v] = u;
          q.push(v);
        }
    }
    return tr;
  }
};

int hop_distance(const Network& net, int a, int b) {
  std::vector<int> dist(net.buses.size(), -1);
  std::vector<std::vector<int>> adj(net.buses.size());
  for (const auto& br : net.branches) {
    adj[br.from].push_back(br.to);
    adj[br.to].push_back(br.from);
  }
  std::queue<int> q;
  q.push(a);
  dist[a] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    if (u == b) return dist[u];
    for (int v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return -1;
}

}  // namespace

std::map<std::string, int> auto_preassign(const Network& net, int k, int close_branches) {
  if (k < 2) throw ModelError("auto preassignment needs k >= 2");
  int n_load_groups = k - 1;
  if (static_cast<int>(net.loads.size()) < n_load_groups)
    throw ModelError("fewer loads than load partitions");

  // union-find over loads that sit close together
  std::vector<int> uf(net.loads.size());
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int a) { return uf[a] == a ? a : uf[a] = find(uf[a]); };
  for (size_t i = 0; i < net.loads.size(); ++i)
    for (size_t j = i + 1; j < net.loads.size(); ++j)
      if (hop_distance(net, net.loads[i].bus, net.loads[j].bus) <= close_branches)
        uf[find(static_cast<int>(i))] = find(static_cast<int>(j));

  std::map<int, std::vector<int>> clusters;
  for (size_t i = 0; i < net.loads.size(); ++i)
    clusters[find(static_cast<int>(i))].push_back(static_cast<int>(i));
  if (static_cast<int>(clusters.size()) < n_load_groups)
    throw ModelError("k too large: only " + std::to_string(clusters.size()) +
                     " separable load clusters");

  // largest clusters first, then fill the lightest group
  std::vector<std::vector<int>> ordered;
  for (auto& [root, members] : clusters) ordered.push_back(members);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });

  std::vector<int> group_sizes(n_load_groups, 0);
  std::map<std::string, int> out;
  for (size_t ci = 0; ci < ordered.size(); ++ci) {
    int g;
    if (ci < static_cast<size_t>(n_load_groups)) {
      g = static_cast<int>(ci);
    } else {
      g = static_cast<int>(std::min_element(group_sizes.begin(), group_sizes.end()) -
                           group_sizes.begin());
    }
    for (int li : ordered[ci]) {
      out[net.loads[li].id] = g + 1;  // groups are 1-based; 0 is the trunk
      group_sizes[g]++;
    }
  }
  return out;
}

Partition optimize_partition(const Network& net, int k,
                             const std::map<std::string, int>& preassign,
                             const RegressionModel& model, const PartitionOptions& opts,
                             int timepoints) {
  (void)timepoints;
  if (k < 1) throw ModelError("partition count must be positive");
  if (k == 1) {
    Partition part = single_partition(net);
    part.rebuild_tie_lines(net);
    return part;
  }

  // every load must be assigned to a load group in [1, k-1]
  std::vector<int> load_group(net.loads.size(), -1);
  for (size_t li = 0; li < net.loads.size(); ++li) {
    auto it = preassign.find(net.loads[li].id);
    if (it == preassign.end())
      throw ModelError("preassignment misses load " + net.loads[li].id);
    if (it->second < 1 || it->second >= k)
      throw ModelError("preassignment group out of range for load " + net.loads[li].id);
    load_group[li] = it->second;
  }
  for (int g = 1; g < k; ++g)
    if (std::count(load_group.begin(), load_group.end(), g) == 0)
      throw ModelError("load partition " + std::to_string(g) + " has no loads");

  // loads electrically close together must share a partition
  for (size_t i = 0; i < net.loads.size(); ++i)
    for (size_t j = i + 1; j < net.loads.size(); ++j)
      if (hop_distance(net, net.loads[i].bus, net.loads[j].bus) <= opts.close_branches &&
          load_group[i] != load_group[j])
        throw ModelError("preassignment splits the inseparable load pair " +
                         net.loads[i].id + "/" + net.loads[j].id);

  Tree tr = Tree::build(net);
  std::vector<char> is_trunk(net.buses.size(), 0);
  is_trunk[net.slack] = 1;
  for (size_t b = 0; b < net.buses.size(); ++b) {
    if (tr.degree[b] < 3) continue;
    int u = static_cast<int>(b);  // branching bus: trunk all the way up
    while (u >= 0 && !is_trunk[u]) {
      is_trunk[u] = 1;
      u = tr.parent[u];
    }
  }

  for (size_t li = 0; li < net.loads.size(); ++li)
    if (is_trunk[net.loads[li].bus])
      throw ModelError("load " + net.loads[li].id +
                       " sits on a trunk bus and cannot join a load partition");

  // mandatory buses per group: load buses plus the spur path between loads
  std::vector<std::set<int>> mandatory(k);
  for (size_t li = 0; li < net.loads.size(); ++li) {
    int g = load_group[li];
    int u = net.loads[li].bus;
    mandatory[g].insert(u);
  }
  // walk each load up; buses below another same-group load stay mandatory
  for (size_t li = 0; li < net.loads.size(); ++li) {
    int g = load_group[li];
    int u = tr.parent[net.loads[li].bus];
    std::vector<int> walk;
    while (u >= 0 && !is_trunk[u]) {
      walk.push_back(u);
      if (mandatory[g].count(u)) {
        // connect through: everything between becomes mandatory
        for (int b : walk) mandatory[g].insert(b);
      }
      u = tr.parent[u];
    }
  }

  // optional chain per group: consecutive non-trunk ancestors above the
  // mandatory set, ordered bottom-up; a chain belongs to exactly one group
  struct Run {
    int group;
    std::vector<int> buses;  // bottom-up
  };
  std::vector<Run> runs;
  std::vector<int> eligible_group(net.buses.size(), -2);  // -2 unseen, -1 conflict
  for (int g = 1; g < k; ++g)
    for (int b : mandatory[g]) eligible_group[b] = g;
  for (size_t li = 0; li < net.loads.size(); ++li) {
    int g = load_group[li];
    int u = tr.parent[net.loads[li].bus];
    std::vector<int> run;
    while (u >= 0 && !is_trunk[u]) {
      if (eligible_group[u] == g) {
        run.clear();  // still inside the mandatory part
      } else if (eligible_group[u] == -2) {
        eligible_group[u] = g;
        run.push_back(u);
      } else if (eligible_group[u] != g) {
        throw ModelError("spur chain shared between partitions near bus " +
                         net.buses[u].id);
      } else {
        run.clear();  // already claimed by an earlier load of this group
        break;
      }
      u = tr.parent[u];
    }
    if (!run.empty()) runs.push_back(Run{g, std::move(run)});
  }

  // exact search over chain cut positions
  const int n_runs = static_cast<int>(runs.size());
  std::vector<int> cut(n_runs, 0), best_cut(n_runs, 0);
  double best_obj = std::numeric_limits<double>::infinity();
  bool found = false;

  std::vector<int> base_count(k, 0);
  int trunk_extra = 0;  // unassigned spur buses always land in group 0
  {
    std::vector<char> seen(net.buses.size(), 0);
    for (int g = 1; g < k; ++g)
      for (int b : mandatory[g]) seen[b] = 1;
    for (const auto& r : runs)
      for (int b : r.buses) seen[b] = 1;
    for (size_t b = 0; b < net.buses.size(); ++b) {
      if (is_trunk[b]) base_count[0]++;
      else if (!seen[b]) trunk_extra++;  // spur bus not eligible anywhere
    }
    base_count[0] += trunk_extra;
    for (int g = 1; g < k; ++g) base_count[g] = static_cast<int>(mandatory[g].size());
  }
  std::vector<int> n_loads_of(k, 0);
  for (size_t li = 0; li < net.loads.size(); ++li) n_loads_of[load_group[li]]++;

  std::function<void(int)> search = [&](int ri) {
    if (ri == n_runs) {
      std::vector<int> count = base_count;
      for (int i = 0; i < n_runs; ++i) {
        count[runs[i].group] += cut[i];
        count[0] += static_cast<int>(runs[i].buses.size()) - cut[i];
      }
      for (int g = 1; g < k; ++g)
        if (count[g] > opts.max_buses) return;
      std::vector<double> t_hat(k);
      t_hat[0] = model.predict_noload(count[0]);
      for (int g = 1; g < k; ++g) t_hat[g] = model.predict_load(count[g], n_loads_of[g]);
      double obj = 0;
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) obj += (t_hat[a] - t_hat[b]) * (t_hat[a] - t_hat[b]);
      if (obj < best_obj - 1e-15) {
        best_obj = obj;
        best_cut = cut;
        found = true;
      }
      return;
    }
    for (int c = 0; c <= static_cast<int>(runs[ri].buses.size()); ++c) {
      cut[ri] = c;
      search(ri + 1);
    }
  };
  search(0);
  if (!found) throw ModelError("no feasible partition under the bus-count bounds");

  Partition part;
  part.groups.assign(k, {});
  std::vector<int> assigned(net.buses.size(), 0);  // group id
  for (int g = 1; g < k; ++g)
    for (int b : mandatory[g]) assigned[b] = g;
  for (int i = 0; i < n_runs; ++i)
    for (int c = 0; c < best_cut[i]; ++c) assigned[runs[i].buses[c]] = runs[i].group;
  for (size_t b = 0; b < net.buses.size(); ++b)
    part.groups[assigned[b]].push_back(static_cast<int>(b));
  part.rebuild_tie_lines(net);
  part.validate(net);
  return part;
}

}  // namespace desgn
