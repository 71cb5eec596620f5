#include "polylim/lopf.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace polylim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kCostSegments = 10;

std::unordered_map<int, int> bus_positions(const CaseData& cd) {
  std::unordered_map<int, int> pos;
  for (std::size_t i = 0; i < cd.buses.size(); ++i) pos[cd.buses[i].id] = static_cast<int>(i);
  return pos;
}

std::string num12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

LinearFlowModel make_flow_model(const CaseData& cd) {
  const auto pos = bus_positions(cd);
  LinearFlowModel model;
  model.branches.reserve(cd.branches.size());
  for (const Branch& br : cd.branches) {
    const double den = br.r * br.r + br.x * br.x;
    model.branches.push_back(
        {pos.at(br.from), pos.at(br.to), br.r / den, -br.x / den});
  }
  return model;
}

double branch_p(const BranchFlow& bf, const std::vector<double>& v,
                const std::vector<double>& delta) {
  return bf.g * (v[bf.from_pos] - v[bf.to_pos]) - bf.b * (delta[bf.from_pos] - delta[bf.to_pos]);
}

double branch_q(const BranchFlow& bf, const std::vector<double>& v,
                const std::vector<double>& delta) {
  return -bf.b * (v[bf.from_pos] - v[bf.to_pos]) - bf.g * (delta[bf.from_pos] - delta[bf.to_pos]);
}

LopfModel build_model(const CaseData& cd, double e, PolygonKind kind, bool parallel) {
  LopfModel model;
  model.flow = make_flow_model(cd);
  model.nb = static_cast<int>(cd.buses.size());
  model.ng = static_cast<int>(cd.gens.size());
  const double base = cd.base_mva;

  // Quadratic costs get an epigraph variable under a secant overestimate;
  // linear costs go straight into the objective.
  std::vector<int> t_index(model.ng, -1);
  for (int g = 0; g < model.ng; ++g) {
    if (cd.costs[g].c2 < 0.0) {
      throw std::invalid_argument("generator at bus " + std::to_string(cd.gens[g].bus) +
                                  " has a concave quadratic cost");
    }
    if (cd.costs[g].c2 > 0.0) t_index[g] = model.nt++;
  }

  model.v_ofs = 0;
  model.d_ofs = model.nb;
  model.pg_ofs = 2 * model.nb;
  model.qg_ofs = 2 * model.nb + model.ng;
  model.t_ofs = 2 * model.nb + 2 * model.ng;
  const int nvars = model.t_ofs + model.nt;

  LpProblem& lp = model.lp;
  lp.num_vars = nvars;
  lp.objective.assign(nvars, 0.0);
  lp.lower.assign(nvars, -kInf);
  lp.upper.assign(nvars, kInf);

  for (int i = 0; i < model.nb; ++i) {
    const Bus& bus = cd.buses[i];
    if (bus.kind == BusKind::Slack) {
      lp.lower[model.v_ofs + i] = lp.upper[model.v_ofs + i] = 1.0;
      lp.lower[model.d_ofs + i] = lp.upper[model.d_ofs + i] = 0.0;
    } else {
      lp.lower[model.v_ofs + i] = bus.vmin;
      lp.upper[model.v_ofs + i] = bus.vmax;
    }
  }
  for (int g = 0; g < model.ng; ++g) {
    lp.lower[model.pg_ofs + g] = cd.gens[g].pmin;
    lp.upper[model.pg_ofs + g] = cd.gens[g].pmax;
    lp.lower[model.qg_ofs + g] = cd.gens[g].qmin;
    lp.upper[model.qg_ofs + g] = cd.gens[g].qmax;
  }

  for (int g = 0; g < model.ng; ++g) {
    const CostFn& cost = cd.costs[g];
    if (t_index[g] >= 0) {
      lp.objective[model.t_ofs + t_index[g]] = 1.0;
    } else {
      lp.objective[model.pg_ofs + g] = cost.c1 * base;
      lp.objective_constant += cost.c0;
    }
  }

  // Nodal balance: sum of outgoing flows + load - generation = 0 per bus.
  std::vector<LpRow> pbal(model.nb), qbal(model.nb);
  for (int i = 0; i < model.nb; ++i) {
    pbal[i].coeffs.assign(nvars, 0.0);
    qbal[i].coeffs.assign(nvars, 0.0);
    pbal[i].rhs = -cd.buses[i].pd;
    qbal[i].rhs = -cd.buses[i].qd;
  }
  for (const BranchFlow& bf : model.flow.branches) {
    const int fi = bf.from_pos, ti = bf.to_pos;
    // p_ij seen from the from bus; the to bus sees the negation.
    pbal[fi].coeffs[model.v_ofs + fi] += bf.g;
    pbal[fi].coeffs[model.v_ofs + ti] -= bf.g;
    pbal[fi].coeffs[model.d_ofs + fi] -= bf.b;
    pbal[fi].coeffs[model.d_ofs + ti] += bf.b;
    pbal[ti].coeffs[model.v_ofs + fi] -= bf.g;
    pbal[ti].coeffs[model.v_ofs + ti] += bf.g;
    pbal[ti].coeffs[model.d_ofs + fi] += bf.b;
    pbal[ti].coeffs[model.d_ofs + ti] -= bf.b;

    qbal[fi].coeffs[model.v_ofs + fi] -= bf.b;
    qbal[fi].coeffs[model.v_ofs + ti] += bf.b;
    qbal[fi].coeffs[model.d_ofs + fi] -= bf.g;
    qbal[fi].coeffs[model.d_ofs + ti] += bf.g;
    qbal[ti].coeffs[model.v_ofs + fi] += bf.b;
    qbal[ti].coeffs[model.v_ofs + ti] -= bf.b;
    qbal[ti].coeffs[model.d_ofs + fi] += bf.g;
    qbal[ti].coeffs[model.d_ofs + ti] -= bf.g;
  }
  {
    const auto pos = bus_positions(cd);
    for (int g = 0; g < model.ng; ++g) {
      const int i = pos.at(cd.gens[g].bus);
      pbal[i].coeffs[model.pg_ofs + g] -= 1.0;
      qbal[i].coeffs[model.qg_ofs + g] -= 1.0;
    }
  }
  for (int i = 0; i < model.nb; ++i) {
    lp.eq.push_back(std::move(pbal[i]));
    model.eq_refs.push_back({RowFamily::BalanceP, i, -1, -1, 0});
  }
  for (int i = 0; i < model.nb; ++i) {
    lp.eq.push_back(std::move(qbal[i]));
    model.eq_refs.push_back({RowFamily::BalanceQ, i, -1, -1, 0});
  }

  // Cost secants: t_g >= slope * pg_MW + intercept on each segment.
  for (int g = 0; g < model.ng; ++g) {
    if (t_index[g] < 0) continue;
    const CostFn& cost = cd.costs[g];
    const double x0 = cd.gens[g].pmin * base;
    const double x1 = cd.gens[g].pmax * base;
    auto f = [&cost](double x) { return (cost.c2 * x + cost.c1) * x + cost.c0; };
    const int segs = x1 > x0 ? kCostSegments : 1;
    for (int sgm = 0; sgm < segs; ++sgm) {
      const double a0 = x0 + (x1 - x0) * sgm / segs;
      const double a1 = x0 + (x1 - x0) * (sgm + 1) / segs;
      const double slope = a1 > a0 ? (f(a1) - f(a0)) / (a1 - a0) : 0.0;
      LpRow row;
      row.coeffs.assign(nvars, 0.0);
      row.coeffs[model.t_ofs + t_index[g]] = 1.0;
      row.coeffs[model.pg_ofs + g] = -slope * base;
      row.rhs = f(a0) - slope * a0;
      lp.ge.push_back(std::move(row));
      model.ge_refs.push_back({RowFamily::CostSegment, -1, g, -1, sgm + 1});
    }
  }

  // Polygon rows: a P_ij + b Q_ij + c >= 0 with flows in MVA.
  model.limits = branch_limits(cd);
  model.sets = system_constraints(model.limits, e, kind, parallel);
  for (std::size_t li = 0; li < model.limits.size(); ++li) {
    const int bi = model.limits[li].index;
    const BranchFlow& bf = model.flow.branches[bi];
    const ConstraintSet& cs = model.sets[li];
    for (std::size_t side = 0; side < cs.halfplanes.size(); ++side) {
      const HalfPlane& hp = cs.halfplanes[side];
      const double cv = base * (hp.a * bf.g - hp.b * bf.b);
      const double cdelta = -base * (hp.a * bf.b + hp.b * bf.g);
      LpRow row;
      row.coeffs.assign(nvars, 0.0);
      row.coeffs[model.v_ofs + bf.from_pos] += cv;
      row.coeffs[model.v_ofs + bf.to_pos] -= cv;
      row.coeffs[model.d_ofs + bf.from_pos] += cdelta;
      row.coeffs[model.d_ofs + bf.to_pos] -= cdelta;
      row.rhs = -hp.c;
      lp.ge.push_back(std::move(row));
      model.ge_refs.push_back({RowFamily::PolygonSide, -1, -1, bi, static_cast<int>(side) + 1});
      ++model.polygon_rows;
    }
  }

  return model;
}

namespace {

std::string describe_rows(const CaseData& cd, const LopfModel& model,
                          const std::vector<int>& eq_rows, const std::vector<int>& ge_rows) {
  std::ostringstream out;
  auto describe = [&](const RowRef& ref) {
    switch (ref.family) {
      case RowFamily::BalanceP:
        out << "P balance at bus " << cd.buses[ref.bus].id;
        break;
      case RowFamily::BalanceQ:
        out << "Q balance at bus " << cd.buses[ref.bus].id;
        break;
      case RowFamily::CostSegment:
        out << "cost segment " << ref.side << " of generator at bus " << cd.gens[ref.gen].bus;
        break;
      case RowFamily::PolygonSide:
        out << "polygon side " << ref.side << " of branch " << cd.branches[ref.branch].from
            << "-" << cd.branches[ref.branch].to;
        break;
    }
  };
  bool first = true;
  for (int r : eq_rows) {
    if (!first) out << "; ";
    describe(model.eq_refs[r]);
    first = false;
  }
  for (int r : ge_rows) {
    if (!first) out << "; ";
    describe(model.ge_refs[r]);
    first = false;
  }
  return out.str();
}

}  // namespace

OpfSolution solve_opf(const CaseData& cd, double e, PolygonKind kind, const LpOptions& opts) {
  return solve_built_model(cd, build_model(cd, e, kind, opts.parallel), opts);
}

OpfSolution solve_built_model(const CaseData& cd, const LopfModel& model,
                              const LpOptions& opts) {
  const LpSolution lps = solve(model.lp, opts);

  OpfSolution sol;
  sol.status = lps.status;
  sol.iterations = lps.iterations;
  if (lps.status == LpStatus::Infeasible) {
    sol.diagnostics = "infeasible; violated rows: " +
                      describe_rows(cd, model, lps.infeasible_eq_rows, lps.infeasible_ge_rows);
    return sol;
  }
  if (lps.status == LpStatus::Unbounded) {
    sol.diagnostics = "unbounded objective; model error";
    return sol;
  }

  sol.objective = lps.objective;
  sol.v.assign(lps.x.begin() + model.v_ofs, lps.x.begin() + model.v_ofs + model.nb);
  sol.delta.assign(lps.x.begin() + model.d_ofs, lps.x.begin() + model.d_ofs + model.nb);
  sol.pg.assign(lps.x.begin() + model.pg_ofs, lps.x.begin() + model.pg_ofs + model.ng);
  sol.qg.assign(lps.x.begin() + model.qg_ofs, lps.x.begin() + model.qg_ofs + model.ng);

  sol.flows.reserve(model.flow.branches.size());
  for (const BranchFlow& bf : model.flow.branches) {
    sol.flows.push_back({cd.base_mva * branch_p(bf, sol.v, sol.delta),
                         cd.base_mva * branch_q(bf, sol.v, sol.delta)});
  }
  for (std::size_t r = 0; r < model.ge_refs.size(); ++r) {
    const RowRef& ref = model.ge_refs[r];
    if (ref.family != RowFamily::PolygonSide) continue;
    const double slack = lps.ge_activity[r] - model.lp.ge[r].rhs;
    if (slack <= 1e-7 * cd.branches[ref.branch].rate_mva) {
      sol.binding.push_back({ref.branch, ref.side});
    }
  }
  return sol;
}

std::vector<PqPoint> normalized_flows(const OpfSolution& sol,
                                      const std::vector<CircleLimit>& limits) {
  std::vector<PqPoint> out;
  out.reserve(limits.size());
  for (const CircleLimit& lim : limits) {
    const PqPoint& f = sol.flows[lim.index];
    out.push_back({f.p / lim.s, f.q / lim.s});
  }
  return out;
}

std::string solution_to_json(const CaseData& cd, const OpfSolution& sol) {
  nlohmann::json j;
  j["status"] = sol.status == LpStatus::Optimal     ? "optimal"
                : sol.status == LpStatus::Infeasible ? "infeasible"
                                                     : "unbounded";
  if (!sol.diagnostics.empty()) j["diagnostics"] = sol.diagnostics;
  if (sol.status != LpStatus::Optimal) return j.dump(2);

  j["objective_per_hour"] = sol.objective;
  j["buses"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cd.buses.size(); ++i) {
    j["buses"].push_back(
        {{"id", cd.buses[i].id}, {"v_pu", sol.v[i]}, {"delta_rad", sol.delta[i]}});
  }
  j["gens"] = nlohmann::json::array();
  for (std::size_t g = 0; g < cd.gens.size(); ++g) {
    j["gens"].push_back({{"bus", cd.gens[g].bus},
                         {"pg_mw", sol.pg[g] * cd.base_mva},
                         {"qg_mvar", sol.qg[g] * cd.base_mva}});
  }
  j["branches"] = nlohmann::json::array();
  for (std::size_t b = 0; b < cd.branches.size(); ++b) {
    nlohmann::json row = {{"from", cd.branches[b].from},
                          {"to", cd.branches[b].to},
                          {"p_mva", sol.flows[b].p},
                          {"q_mva", sol.flows[b].q}};
    if (cd.branches[b].rate_mva > 0.0) {
      row["p_norm"] = sol.flows[b].p / cd.branches[b].rate_mva;
      row["q_norm"] = sol.flows[b].q / cd.branches[b].rate_mva;
    }
    j["branches"].push_back(row);
  }
  j["binding_sides"] = nlohmann::json::array();
  for (const BindingSide& bs : sol.binding) {
    j["binding_sides"].push_back({{"branch", bs.branch}, {"side", bs.side}});
  }
  return j.dump(2);
}

std::string flows_to_csv(const CaseData& cd, const OpfSolution& sol) {
  std::string out = "branch,from,to,rate_mva,p_mva,q_mva,p_norm,q_norm\n";
  for (std::size_t b = 0; b < cd.branches.size(); ++b) {
    const double rate = cd.branches[b].rate_mva;
    out += std::to_string(b) + "," + std::to_string(cd.branches[b].from) + "," +
           std::to_string(cd.branches[b].to) + "," + num12(rate) + "," +
           num12(sol.flows[b].p) + "," + num12(sol.flows[b].q);
    if (rate > 0.0) {
      out += "," + num12(sol.flows[b].p / rate) + "," + num12(sol.flows[b].q / rate);
    } else {
      out += ",,";
    }
    out += "\n";
  }
  return out;
}

}  // namespace polylim
