#include <algorithm>

#include "desgn/admm.hpp"

namespace desgn {

ConsensusLayout build_consensus(std::vector<SubproblemSpec>& specs, const Partition& part,
                                const Network& net) {
  ConsensusLayout layout;
  if (specs.empty()) return layout;

  const int T = [&] {
    int t = 0;
    for (const auto& s : specs) t = std::max(t, s.t_begin + s.t_count);
    return t;
  }();

  // (group, t) -> spec index
  std::vector<std::vector<int>> spec_at(part.n_groups(), std::vector<int>(T, -1));
  for (size_t si = 0; si < specs.size(); ++si)
    for (int t = specs[si].t_begin; t < specs[si].t_begin + specs[si].t_count; ++t)
      spec_at[specs[si].group][t] = static_cast<int>(si);

  layout.spec_rows.resize(specs.size());
  std::vector<std::vector<ConsensusPenalty::Row>> pen_rows(specs.size());

  auto local_tie_ordinal = [&](const SubproblemSpec& s, int tie) {
    for (size_t k = 0; k < s.ties.size(); ++k)
      if (s.ties[k] == tie) return static_cast<int>(k);
    throw ModelError("tie line not represented in an adjacent subproblem");
  };

  for (size_t ti = 0; ti < part.tie_lines.size(); ++ti) {
    const auto& tie = part.tie_lines[ti];
    const Branch& br = net.branches[tie.branch];
    std::vector<int> phases;
    for (Phase ph : kPhases)
      if (br.phases.has(ph)) phases.push_back(static_cast<int>(ph));

    for (int t = 0; t < T; ++t) {
      int sa = spec_at[tie.owner_group][t];
      int sb = spec_at[tie.neighbor_group][t];
      if (sa < 0 || sb < 0)
        throw ModelError("tie line not represented in both adjacent subproblems");

      for (int ph : phases) {
        auto add_row = [&](ConsensusLayout::Quantity q) {
          int row = layout.rows();
          layout.catalog.push_back(
              {static_cast<int>(ti), tie.branch, ph, t, q});
          for (int si : {sa, sb}) {
            SubproblemSpec& s = specs[si];
            int tloc = t - s.t_begin;
            int lt = local_tie_ordinal(s, static_cast<int>(ti));
            int po = -1;
            for (size_t k = 0; k < s.tie_phases[lt].size(); ++k)
              if (s.tie_phases[lt][k] == ph) po = static_cast<int>(k);
            int n_from = s.yb.nodes.node_of[br.from][ph];
            int n_to = s.yb.nodes.node_of[br.to][ph];
            ConsensusPenalty::Row prow;
            switch (q) {
              case ConsensusLayout::VAdd:
                prow.terms = {{s.v_index(n_from, tloc), 1.0}, {s.v_index(n_to, tloc), 1.0}};
                break;
              case ConsensusLayout::VSub:
                prow.terms = {{s.v_index(n_from, tloc), 1.0}, {s.v_index(n_to, tloc), -1.0}};
                break;
              case ConsensusLayout::ThAdd:
                prow.terms = {{s.th_index(n_from, tloc), 1.0}, {s.th_index(n_to, tloc), 1.0}};
                break;
              case ConsensusLayout::ThSub:
                prow.terms = {{s.th_index(n_from, tloc), 1.0}, {s.th_index(n_to, tloc), -1.0}};
                break;
              case ConsensusLayout::PbRow:
                prow.terms = {{s.pb_index(lt, po, tloc), 1.0}};
                break;
              case ConsensusLayout::QbRow:
                prow.terms = {{s.qb_index(lt, po, tloc), 1.0}};
                break;
            }
            pen_rows[si].push_back(std::move(prow));
            layout.spec_rows[si].push_back(row);
          }
        };
        add_row(ConsensusLayout::VAdd);
        add_row(ConsensusLayout::VSub);
        add_row(ConsensusLayout::ThAdd);
        add_row(ConsensusLayout::ThSub);
        add_row(ConsensusLayout::PbRow);
        add_row(ConsensusLayout::QbRow);
      }
    }
  }

  layout.z = Eigen::VectorXd::Zero(layout.rows());
  layout.lambda.resize(specs.size());
  for (size_t si = 0; si < specs.size(); ++si) {
    layout.lambda[si] = Eigen::VectorXd::Zero(pen_rows[si].size());
    auto pen = std::make_unique<ConsensusPenalty>();
    pen->rows = std::move(pen_rows[si]);
    specs[si].prob.consensus = std::move(pen);
  }
  return layout;
}

}  // namespace desgn
