#include <algorithm>
#include <fstream>
#include <queue>
#include <set>

#include "desgn/admm.hpp"
#include "json.hpp"

namespace desgn {

std::vector<int> Partition::group_of_bus(const Network& net) const {
  std::vector<int> g(net.buses.size(), -1);
  for (size_t gi = 0; gi < groups.size(); ++gi)
    for (int b : groups[gi]) {
      if (b < 0 || b >= static_cast<int>(net.buses.size()))
        throw ModelError("partition references unknown bus");
      if (g[b] != -1) throw ModelError("bus assigned to two partitions: " + net.buses[b].id);
      g[b] = static_cast<int>(gi);
    }
  for (size_t b = 0; b < g.size(); ++b)
    if (g[b] < 0) throw ModelError("bus not assigned to any partition: " + net.buses[b].id);
  return g;
}

bool Partition::group_has_load(const Network& net, int g) const {
  for (const auto& ld : net.loads)
    for (int b : groups[g])
      if (ld.bus == b) return true;
  return false;
}

void Partition::rebuild_tie_lines(const Network& net) {
  std::vector<int> g = group_of_bus(net);
  // slack side of each branch = endpoint closer to the slack in the tree
  std::vector<int> depth(net.buses.size(), -1);
  std::queue<int> q;
  q.push(net.slack);
  depth[net.slack] = 0;
  std::vector<std::vector<std::pair<int, int>>> adj(net.buses.size());
  for (size_t e = 0; e < net.branches.size(); ++e) {
    adj[net.branches[e].from].push_back({net.branches[e].to, static_cast<int>(e)});
    adj[net.branches[e].to].push_back({net.branches[e].from, static_cast<int>(e)});
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, e] : adj[u])
      if (depth[v] < 0) {
        depth[v] = depth[u] + 1;
        q.push(v);
      }
  }
  tie_lines.clear();
  for (size_t e = 0; e < net.branches.size(); ++e) {
    int a = net.branches[e].from, bb = net.branches[e].to;
    if (g[a] == g[bb]) continue;
    int up = (depth[a] <= depth[bb]) ? a : bb;
    int dn = (up == a) ? bb : a;
    tie_lines.push_back(TieLine{static_cast<int>(e), g[up], g[dn]});
  }
}

void Partition::validate(const Network& net) const {
  std::vector<int> g = group_of_bus(net);
  for (const auto& tie : tie_lines) {
    if (tie.branch < 0 || tie.branch >= static_cast<int>(net.branches.size()))
      throw ModelError("tie line references unknown branch");
    const Branch& br = net.branches[tie.branch];
    if (g[br.from] == g[br.to]) throw ModelError("tie line inside one partition");
    std::set<int> got{g[br.from], g[br.to]};
    if (got != std::set<int>{tie.owner_group, tie.neighbor_group})
      throw ModelError("tie line group labels inconsistent");
  }
}

Partition single_partition(const Network& net) {
  Partition part;
  part.groups.emplace_back();
  for (size_t b = 0; b < net.buses.size(); ++b)
    part.groups[0].push_back(static_cast<int>(b));
  return part;
}

Partition load_partition_json(const std::string& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open partition file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("bad partition json: " + std::string(e.what()));
  }
  Partition part;
  for (const auto& jg : j.at("groups")) {
    std::vector<int> buses;
    for (const auto& id : jg.at("buses")) {
      int b = net.bus_index(id.get<std::string>());
      if (b < 0) throw InputError("partition references unknown bus " + id.get<std::string>());
      buses.push_back(b);
    }
    part.groups.push_back(std::move(buses));
  }
  part.rebuild_tie_lines(net);
  part.validate(net);
  return part;
}

void save_partition_json(const Partition& part, const Network& net, const std::string& path) {
  nlohmann::ordered_json j;
  j["groups"] = nlohmann::ordered_json::array();
  for (size_t g = 0; g < part.groups.size(); ++g) {
    nlohmann::ordered_json jg;
    jg["id"] = g;
    jg["kind"] = part.group_has_load(net, static_cast<int>(g)) ? "load" : "noload";
    auto& buses = jg["buses"] = nlohmann::ordered_json::array();
    for (int b : part.groups[g]) buses.push_back(net.buses[b].id);
    j["groups"].push_back(std::move(jg));
  }
  j["tie_lines"] = nlohmann::ordered_json::array();
  for (const auto& tie : part.tie_lines) {
    nlohmann::ordered_json jt;
    jt["from"] = net.buses[net.branches[tie.branch].from].id;
    jt["to"] = net.buses[net.branches[tie.branch].to].id;
    jt["owner"] = tie.owner_group;
    jt["neighbor"] = tie.neighbor_group;
    j["tie_lines"].push_back(std::move(jt));
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << "\n";
}

namespace {

// Phases carrying load beyond `far_bus` when the branch is cut.
PhaseSet loads_beyond(const Network& net, int branch, int far_bus) {
  std::vector<std::vector<std::pair<int, int>>> adj(net.buses.size());
  for (size_t e = 0; e < net.branches.size(); ++e) {
    adj[net.branches[e].from].push_back({net.branches[e].to, static_cast<int>(e)});
    adj[net.branches[e].to].push_back({net.branches[e].from, static_cast<int>(e)});
  }
  std::vector<char> vis(net.buses.size(), 0);
  std::queue<int> q;
  q.push(far_bus);
  vis[far_bus] = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, e] : adj[u]) {
      if (e == branch || vis[v]) continue;
      vis[v] = 1;
      q.push(v);
    }
  }
  PhaseSet ps;
  for (const auto& ld : net.loads)
    if (vis[ld.bus]) ps.add(ld.phase);
  return ps;
}

}  // namespace

std::vector<SubproblemSpec> decompose(const Network& net, const Partition& part,
                                      const Timeline& tl,
                                      const std::vector<DesProblem>& des,
                                      const SitingResult& milp,
                                      const DecomposeOptions& opts) {
  part.validate(net);
  std::vector<int> group_of = part.group_of_bus(net);
  const int T = tl.total_timepoints();
  const auto& st_opts = opts.stage;

  // loads per group
  std::vector<std::vector<size_t>> loads_in(part.n_groups());
  for (size_t li = 0; li < des.size(); ++li) loads_in[group_of[des[li].load.bus]].push_back(li);

  // tie ordinals per group
  std::vector<std::vector<int>> ties_of(part.n_groups());
  for (size_t ti = 0; ti < part.tie_lines.size(); ++ti) {
    ties_of[part.tie_lines[ti].owner_group].push_back(static_cast<int>(ti));
    ties_of[part.tie_lines[ti].neighbor_group].push_back(static_cast<int>(ti));
  }

  // slack must be reachable: every group needs a path (radial network is
  // connected, so every group touches the tree; just check ties exist)
  for (int g = 0; g < part.n_groups(); ++g)
    if (part.n_groups() > 1 && ties_of[g].empty())
      throw ModelError("partition group has no tie line to the rest of the network");

  auto build_spec = [&](int g, SubproblemSpec::Kind kind, int t_begin,
                        int t_count) -> SubproblemSpec {
    SubproblemSpec spec;
    spec.kind = kind;
    spec.group = g;
    spec.t_begin = t_begin;
    spec.t_count = t_count;
    spec.buses = part.groups[g];
    std::sort(spec.buses.begin(), spec.buses.end());
    spec.ties = ties_of[g];
    spec.scale = st_opts.scale;
    if (kind == SubproblemSpec::Kind::LoadAllT) spec.load_idx = loads_in[g];

    std::set<int> owned(spec.buses.begin(), spec.buses.end());
    std::set<int> all_buses = owned;
    for (int ti : spec.ties) {
      const Branch& br = net.branches[part.tie_lines[ti].branch];
      int far = owned.count(br.from) ? br.to : br.from;
      if (!owned.count(far)) {
        if (all_buses.insert(far).second) spec.overlap.push_back(far);
      }
    }

    // every branch incident to an owned bus (internal + tie)
    std::vector<int> branch_ids;
    for (size_t e = 0; e < net.branches.size(); ++e)
      if (owned.count(net.branches[e].from) || owned.count(net.branches[e].to))
        branch_ids.push_back(static_cast<int>(e));

    std::vector<int> bus_list(all_buses.begin(), all_buses.end());
    spec.yb = YBus::build_subset(net, bus_list, branch_ids);
    spec.n_nodes = spec.yb.nodes.n;

    // tie phase lists and per-block flow offsets
    int flow_vars = 0;
    for (int ti : spec.ties) {
      const Branch& br = net.branches[part.tie_lines[ti].branch];
      std::vector<int> phases;
      for (Phase ph : kPhases)
        if (br.phases.has(ph)) phases.push_back(static_cast<int>(ph));
      spec.tie_pb_base.push_back(2 * spec.n_nodes + flow_vars);
      flow_vars += static_cast<int>(phases.size());
      spec.tie_qb_base.push_back(2 * spec.n_nodes + flow_vars);
      flow_vars += static_cast<int>(phases.size());
      spec.tie_phases.push_back(std::move(phases));
    }
    spec.stride_t = 2 * spec.n_nodes + flow_vars;
    spec.net_base = 0;

    NlpProblem& p = spec.prob;
    int n = spec.stride_t * t_count;
    spec.des_base = n;
    for (size_t k = 0; k < spec.load_idx.size(); ++k) {
      spec.des_offsets.push_back(n);
      n += des[spec.load_idx[k]].n_vars;
    }
    p.n = n;
    p.lb = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    p.ub = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    p.c_lin = Eigen::VectorXd::Zero(n);

    // network variable bounds
    for (int tloc = 0; tloc < t_count; ++tloc) {
      for (int k = 0; k < spec.n_nodes; ++k) {
        auto [bus, phase] = spec.yb.nodes.of_node[k];
        int vi = spec.v_index(k, tloc), thi = spec.th_index(k, tloc);
        if (bus == net.slack) {
          p.lb[vi] = p.ub[vi] = 1.0;
          p.lb[thi] = p.ub[thi] = slack_angle(phase);
        } else {
          p.lb[vi] = st_opts.v_min;
          p.ub[vi] = st_opts.v_max;
          p.lb[thi] = -std::numbers::pi;
          p.ub[thi] = std::numbers::pi;
        }
      }
    }

    // zero-fix: in no-load subproblems, tie phases with no load beyond the
    // far side carry no flow
    bool has_load = !loads_in[g].empty();
    if (!has_load) {
      for (size_t to = 0; to < spec.ties.size(); ++to) {
        const auto& tie = part.tie_lines[spec.ties[to]];
        const Branch& br = net.branches[tie.branch];
        int far = owned.count(br.from) ? br.to : br.from;
        PhaseSet beyond = loads_beyond(net, tie.branch, far);
        for (size_t po = 0; po < spec.tie_phases[to].size(); ++po) {
          Phase ph = static_cast<Phase>(spec.tie_phases[to][po]);
          if (beyond.has(ph)) continue;
          for (int tloc = 0; tloc < t_count; ++tloc) {
            int pb = spec.pb_index(static_cast<int>(to), static_cast<int>(po), tloc);
            int qb = spec.qb_index(static_cast<int>(to), static_cast<int>(po), tloc);
            p.lb[pb] = p.ub[pb] = 0.0;
            p.lb[qb] = p.ub[qb] = 0.0;
          }
        }
      }
    }

    // technology payload
    for (size_t k = 0; k < spec.load_idx.size(); ++k) {
      const DesProblem& d = des[spec.load_idx[k]];
      int base = spec.des_offsets[k];
      for (int i = 0; i < d.n_vars; ++i) {
        p.lb[base + i] = d.lb[i];
        p.ub[base + i] = d.ub[i];
        p.c_lin[base + i] = spec.scale * d.obj[i];
        if (d.is_binary[i]) {
          double v = std::round(milp.x[spec.load_idx[k]][i]);
          p.lb[base + i] = v;
          p.ub[base + i] = v;
        }
      }
      std::vector<LinearBlock::Row> eq_rows, ineq_rows;
      for (const auto& r : d.rows) {
        if (st_opts.comp_stage && family_dropped_in_comp(r.family)) continue;
        LinearBlock::Row lr;
        double flip = (r.sense == RowSense::Ge) ? -1.0 : 1.0;
        lr.rhs = flip * r.rhs;
        for (auto [i, c] : r.terms) lr.terms.push_back({base + i, flip * c});
        if (r.sense == RowSense::Eq) eq_rows.push_back(std::move(lr));
        else ineq_rows.push_back(std::move(lr));
      }
      if (!eq_rows.empty()) p.eq.push_back(std::make_unique<LinearBlock>(std::move(eq_rows)));
      if (!ineq_rows.empty())
        p.ineq.push_back(std::make_unique<LinearBlock>(std::move(ineq_rows)));
    }

    // power balance at owned non-slack nodes
    std::vector<int> free_nodes;
    for (int k = 0; k < spec.n_nodes; ++k) {
      auto [bus, phase] = spec.yb.nodes.of_node[k];
      (void)phase;
      if (bus != net.slack && owned.count(bus)) free_nodes.push_back(k);
    }
    auto bim = std::make_unique<BimBlock>(spec.yb, free_nodes, spec.net_base, spec.stride_t,
                                          t_count);
    for (size_t k = 0; k < spec.load_idx.size(); ++k) {
      const DesProblem& d = des[spec.load_idx[k]];
      int base = spec.des_offsets[k];
      int node = spec.yb.nodes.node_of[d.load.bus][static_cast<int>(d.load.phase)];
      if (node < 0) throw ModelError("load phase missing from subproblem node map");
      double k_inj = 1e-3 / (net.s_base_mva * tl.dt_hours);
      for (int tloc = 0; tloc < t_count; ++tloc) {
        int tg = t_begin + tloc;
        BimBlock::InjTerm pterm;
        pterm.terms = {{base + d.var(VarFam::EPvSold, tg), k_inj},
                       {base + d.var(VarFam::EGrid, tg), -k_inj}};
        bim->set_p_injection(node, tloc, std::move(pterm));
        BimBlock::InjTerm qterm;
        qterm.constant = reactive_injection_pu(d.load.elec_profile[tg], d.cat.pf,
                                               net.s_base_mva, tl.dt_hours);
        bim->set_q_injection(node, tloc, std::move(qterm));
      }
    }
    p.eq.push_back(std::move(bim));

    // tie-line flow definitions
    for (size_t to = 0; to < spec.ties.size(); ++to) {
      const auto& tie = part.tie_lines[spec.ties[to]];
      const Branch& br = net.branches[tie.branch];
      auto block = std::make_unique<BranchFlowDefBlock>(br.G, br.B, spec.tie_phases[to]);
      for (int tloc = 0; tloc < t_count; ++tloc) {
        BranchFlowDefBlock::RowGroup grp;
        for (int ph = 0; ph < 3; ++ph) {
          int nf = spec.yb.nodes.node_of[br.from][ph];
          int nt = spec.yb.nodes.node_of[br.to][ph];
          if (nf >= 0) grp.from[ph] = {spec.v_index(nf, tloc), spec.th_index(nf, tloc)};
          if (nt >= 0) grp.to[ph] = {spec.v_index(nt, tloc), spec.th_index(nt, tloc)};
        }
        for (size_t po = 0; po < spec.tie_phases[to].size(); ++po) {
          grp.pb.push_back(spec.pb_index(static_cast<int>(to), static_cast<int>(po), tloc));
          grp.qb.push_back(spec.qb_index(static_cast<int>(to), static_cast<int>(po), tloc));
        }
        block->add_timepoint(std::move(grp));
      }
      p.eq.push_back(std::move(block));
    }

    // complementarity products for contained loads
    if (st_opts.comp_stage && !spec.load_idx.empty()) {
      std::vector<std::pair<int, int>> pairs;
      for (size_t k = 0; k < spec.load_idx.size(); ++k) {
        const DesProblem& d = des[spec.load_idx[k]];
        int base = spec.des_offsets[k];
        for (int t = 0; t < d.T(); ++t) {
          pairs.push_back(
              {base + d.var(VarFam::EGrid, t), base + d.var(VarFam::EPvSold, t)});
          for (int c = 0; c < d.nC(); ++c)
            pairs.push_back({base + d.var(VarFam::EBattCharge, t, c),
                             base + d.var(VarFam::EBattDischarge, t, c)});
        }
      }
      auto prod = std::make_unique<ProductBlock>(std::move(pairs), 1.0);
      spec.products = prod.get();
      p.ineq.push_back(std::move(prod));
    }

    // warm start: flat voltages, zero flows, stage-one technology schedule
    spec.x = Eigen::VectorXd::Zero(p.n);
    for (int tloc = 0; tloc < t_count; ++tloc)
      for (int k = 0; k < spec.n_nodes; ++k) {
        spec.x[spec.v_index(k, tloc)] = 1.0;
        spec.x[spec.th_index(k, tloc)] = slack_angle(spec.yb.nodes.of_node[k].second);
      }
    for (size_t k = 0; k < spec.load_idx.size(); ++k) {
      const DesProblem& d = des[spec.load_idx[k]];
      for (int i = 0; i < d.n_vars; ++i)
        spec.x[spec.des_offsets[k] + i] = milp.x[spec.load_idx[k]][i];
    }
    return spec;
  };

  std::vector<SubproblemSpec> specs;
  if (part.n_groups() == 1) {
    specs.push_back(build_spec(0, SubproblemSpec::Kind::LoadAllT, 0, T));
    return specs;
  }
  for (int g = 0; g < part.n_groups(); ++g) {
    if (!loads_in[g].empty()) {
      specs.push_back(build_spec(g, SubproblemSpec::Kind::LoadAllT, 0, T));
    } else {
      for (int t = 0; t < T; ++t)
        specs.push_back(build_spec(g, SubproblemSpec::Kind::NoLoadSingleT, t, 1));
    }
  }
  return specs;
}

}  // namespace desgn
