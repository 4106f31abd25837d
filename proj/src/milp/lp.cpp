#include "desgn/lp.hpp"

#include <cmath>
#include <fstream>

namespace desgn {

int LinearProgram::add_var(double lo, double hi, double cost) {
  lb.push_back(lo);
  ub.push_back(hi);
  c.push_back(cost);
  return n++;
}

LpRow& LinearProgram::add_row(RowSense sense, double rhs) {
  rows.push_back(LpRow{sense, rhs, {}});
  return rows.back();
}

void LinearProgram::check() const {
  if (static_cast<int>(c.size()) != n || static_cast<int>(lb.size()) != n ||
      static_cast<int>(ub.size()) != n)
    throw ModelError("inconsistent LP dimensions");
  for (int i = 0; i < n; ++i)
    if (lb[i] > ub[i]) throw ModelError("variable with lb > ub");
  for (const auto& r : rows)
    for (auto [i, v] : r.terms) {
      if (i < 0 || i >= n) throw ModelError("row references unknown variable");
      if (!std::isfinite(v)) throw ModelError("non-finite coefficient");
    }
}

const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterLimit: return "iteration_limit";
  }
  return "?";
}

LinearProgram lp_from_des(const DesProblem& p) {
  LinearProgram lp;
  lp.n = p.n_vars;
  lp.c = p.obj;
  lp.lb = p.lb;
  lp.ub = p.ub;
  lp.rows.reserve(p.rows.size());
  for (const auto& r : p.rows) {
    LpRow lr;
    lr.sense = r.sense;
    lr.rhs = r.rhs;
    lr.terms = r.terms;
    lp.rows.push_back(std::move(lr));
  }
  return lp;
}

std::vector<int> binary_indices(const DesProblem& p) {
  std::vector<int> out;
  for (int i = 0; i < p.n_vars; ++i)
    if (p.is_binary[i]) out.push_back(i);
  return out;
}

void dump_lp(const LinearProgram& lp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "vars " << lp.n << "\nsense " << (lp.maximize ? "max" : "min") << "\n";
  out << "obj";
  for (int i = 0; i < lp.n; ++i)
    if (lp.c[i] != 0.0) out << " " << i << ":" << lp.c[i];
  out << "\nbounds\n";
  for (int i = 0; i < lp.n; ++i) out << i << " " << lp.lb[i] << " " << lp.ub[i] << "\n";
  out << "rows " << lp.rows.size() << "\n";
  for (const auto& r : lp.rows) {
    out << static_cast<char>(r.sense) << " " << r.rhs;
    for (auto [i, v] : r.terms) out << " " << i << ":" << v;
    out << "\n";
  }
}

}  // namespace desgn
