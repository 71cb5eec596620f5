#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "polylim/caseio.hpp"
#include "polylim/lopf.hpp"

using namespace polylim;

namespace {

const std::string kDataDir = POLYLIM_DATA_DIR;

// Two-bus network with a 40 MVA branch and an expensive P-only generator at
// the load bus, so the polygon side near the P axis binds at the optimum.
const char* kTwoBusLimited = R"(mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.05	0.95;
	2	1	50	10	0	0	1	1	0	135	1	1.05	0.95;
];
mpc.gen = [
	1	0	0	100	-100	1	100	1	100	0;
	2	0	0	0	0	1	100	1	100	0;
];
mpc.branch = [
	1	2	0	0.1	0	40	40	40	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	2	10	0;
	2	0	0	2	1000	0;
];
)";

std::vector<double> balance_residuals(const CaseData& cd, const LinearFlowModel& model,
                                      const OpfSolution& sol, bool reactive) {
  std::vector<double> res(cd.buses.size(), 0.0);
  for (std::size_t i = 0; i < cd.buses.size(); ++i) {
    res[i] = reactive ? cd.buses[i].qd : cd.buses[i].pd;
  }
  for (const BranchFlow& bf : model.branches) {
    const double flow = reactive ? branch_q(bf, sol.v, sol.delta)
                                 : branch_p(bf, sol.v, sol.delta);
    res[bf.from_pos] += flow;
    res[bf.to_pos] -= flow;
  }
  for (std::size_t g = 0; g < cd.gens.size(); ++g) {
    int pos = bus_pos(cd, cd.gens[g].bus);
    res[pos] -= reactive ? sol.qg[g] : sol.pg[g];
  }
  return res;
}

}  // namespace

TEST_CASE("flow model coefficients and antisymmetry") {
  const CaseData cd = load_case(kDataDir + "/case30.m");
  const LinearFlowModel model = make_flow_model(cd);
  REQUIRE(model.branches.size() == cd.branches.size());
  std::vector<double> v(cd.buses.size()), delta(cd.buses.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    delta[i] = -0.02 + 0.005 * static_cast<double>(i % 5);
  }
  for (std::size_t b = 0; b < model.branches.size(); ++b) {
    const BranchFlow& bf = model.branches[b];
    if (cd.branches[b].r == 0.0) {
      CHECK(bf.g == 0.0);
      // p depends only on the angle difference.
      std::vector<double> v2 = v;
      v2[bf.from_pos] += 0.03;
      CHECK(branch_p(bf, v2, delta) == doctest::Approx(branch_p(bf, v, delta)).epsilon(1e-12));
    }
    BranchFlow reversed{bf.to_pos, bf.from_pos, bf.g, bf.b};
    CHECK(branch_p(reversed, v, delta) ==
          doctest::Approx(-branch_p(bf, v, delta)).epsilon(1e-12));
    CHECK(branch_q(reversed, v, delta) ==
          doctest::Approx(-branch_q(bf, v, delta)).epsilon(1e-12));
  }
}

TEST_CASE("two-bus hand oracle") {
  const CaseData cd = load_case(kDataDir + "/case2.m");
  const LopfModel model = build_model(cd, 0.1, PolygonKind::Irregular);
  CHECK(model.lp.num_vars == 6);  // 2 v, 2 delta, 1 pg, 1 qg, linear cost
  CHECK(model.lp.eq.size() == 4);
  CHECK(model.polygon_rows == 48);
  CHECK(model.lp.ge.size() == 48);

  const OpfSolution sol = solve_opf(cd, 0.1, PolygonKind::Irregular);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(500.0).epsilon(1e-6));
  CHECK(sol.delta[1] == doctest::Approx(-0.05).epsilon(1e-6));
  CHECK(sol.v[1] == doctest::Approx(0.99).epsilon(1e-6));
  CHECK(sol.pg[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sol.qg[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(sol.flows[0].p == doctest::Approx(50.0).epsilon(1e-6));
  CHECK(sol.flows[0].q == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(sol.binding.empty());

  const auto norm = normalized_flows(sol, branch_limits(cd));
  REQUIRE(norm.size() == 1);
  CHECK(norm[0].p == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(norm[0].q == doctest::Approx(0.1).epsilon(1e-6));

  for (bool reactive : {false, true}) {
    for (double r : balance_residuals(cd, model.flow, sol, reactive)) {
      CHECK(std::abs(r) <= 1e-6);
    }
  }
}

TEST_CASE("binding polygon side on a limited branch") {
  const CaseData cd = parse_case(kTwoBusLimited);
  const LopfModel model = build_model(cd, 0.1, PolygonKind::Irregular);
  REQUIRE(model.sets.size() == 1);
  const ConstraintSet& cs = model.sets[0];

  // Brute force over the polygon boundary: the reactive flow is pinned to
  // 10 MVA by the load, so the import limit is the largest P on the polygon
  // at Q = 10.
  double p_star = 1e300;
  int side_star = -1;
  for (std::size_t k = 0; k < cs.halfplanes.size(); ++k) {
    const HalfPlane& hp = cs.halfplanes[k];
    if (hp.a < -1e-12) {
      const double bound = (hp.b * 10.0 + hp.c) / (-hp.a);
      if (bound < p_star) {
        p_star = bound;
        side_star = static_cast<int>(k) + 1;
      }
    }
  }
  CHECK(p_star == doctest::Approx(38.72983346207417).epsilon(1e-9));

  const OpfSolution sol = solve_opf(cd, 0.1, PolygonKind::Irregular);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.flows[0].q == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(sol.flows[0].p == doctest::Approx(p_star).epsilon(1e-6));
  CHECK(sol.pg[0] * cd.base_mva == doctest::Approx(p_star).epsilon(1e-6));
  CHECK(sol.pg[1] * cd.base_mva == doctest::Approx(50.0 - p_star).epsilon(1e-4));
  bool found = false;
  for (const BindingSide& bs : sol.binding) found = found || bs.side == side_star;
  CHECK(found);
}

TEST_CASE("infeasible case reports the violated family") {
  const char* text = R"(mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.05	0.95;
	2	1	300	10	0	0	1	1	0	135	1	1.05	0.95;
];
mpc.gen = [
	1	0	0	100	-100	1	100	1	100	0;
	2	0	0	0	0	1	100	1	100	0;
];
mpc.branch = [
	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	2	10	0;
	2	0	0	2	1000	0;
];
)";
  const CaseData cd = parse_case(text);
  double pmax = 0.0;
  for (const Gen& g : cd.gens) pmax += g.pmax;
  REQUIRE(cd.buses[1].pd > pmax);
  const OpfSolution sol = solve_opf(cd, 0.1, PolygonKind::Irregular);
  CHECK(sol.status == LpStatus::Infeasible);
  CHECK(sol.diagnostics.find("P balance") != std::string::npos);
}

TEST_CASE("30-bus model and solution properties") {
  const CaseData cd = load_case(kDataDir + "/case30.m");
  const LopfModel model = build_model(cd, 0.1, PolygonKind::Irregular);
  CHECK(model.polygon_rows == 1288);
  CHECK(model.nt == 6);  // all six costs are quadratic

  const OpfSolution sol = solve_built_model(cd, model);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective > 0.0);

  for (bool reactive : {false, true}) {
    for (double r : balance_residuals(cd, model.flow, sol, reactive)) {
      CHECK(std::abs(r) <= 1e-6);
    }
  }

  // Conservatism: every flow stays inside its limit circle, and inside the
  // constraint set within tolerance.
  for (std::size_t li = 0; li < model.limits.size(); ++li) {
    const CircleLimit& lim = model.limits[li];
    const PqPoint& f = sol.flows[lim.index];
    CHECK(f.p * f.p + f.q * f.q <= lim.s * lim.s + 1e-6 * lim.s * lim.s);
    for (const HalfPlane& hp : model.sets[li].halfplanes) {
      CHECK(hp.a * f.p + hp.b * f.q + hp.c >= -1e-6 * lim.s);
    }
  }
  for (const PqPoint& nf : normalized_flows(sol, model.limits)) {
    CHECK(nf.p * nf.p + nf.q * nf.q <= 1.0 + 1e-9);
  }

  // Dropping every polygon row can only lower or keep the objective.
  CaseData relaxed = cd;
  for (Branch& br : relaxed.branches) br.rate_mva = 0.0;
  const OpfSolution free_sol = solve_opf(relaxed, 0.1, PolygonKind::Irregular);
  REQUIRE(free_sol.status == LpStatus::Optimal);
  CHECK(free_sol.objective <= sol.objective + 1e-6 * std::abs(sol.objective));
}

TEST_CASE("regular and irregular agree at the paper's error setting") {
  const CaseData cd = load_case(kDataDir + "/case30.m");
  const OpfSolution reg = solve_opf(cd, 0.01, PolygonKind::Regular);
  const OpfSolution irr = solve_opf(cd, 0.01, PolygonKind::Irregular);
  REQUIRE(reg.status == LpStatus::Optimal);
  REQUIRE(irr.status == LpStatus::Optimal);
  CHECK(std::abs(irr.objective - reg.objective) / std::abs(reg.objective) <= 0.01);

  const auto limits = branch_limits(cd);
  const auto nreg = normalized_flows(reg, limits);
  const auto nirr = normalized_flows(irr, limits);
  for (std::size_t i = 0; i < limits.size(); ++i) {
    CHECK(std::hypot(nreg[i].p - nirr[i].p, nreg[i].q - nirr[i].q) <= 0.05);
  }
}

TEST_CASE("tightening the error keeps the two-bus objective gap monotone") {
  const CaseData cd = load_case(kDataDir + "/case2.m");
  CaseData unlimited = cd;
  unlimited.branches[0].rate_mva = 0.0;
  const double ideal = solve_opf(unlimited, 0.1, PolygonKind::Irregular).objective;
  double prev_gap = 1e300;
  for (double e : {1.0, 0.5, 0.1, 0.01}) {
    const OpfSolution sol = solve_opf(cd, e, PolygonKind::Irregular);
    REQUIRE(sol.status == LpStatus::Optimal);
    const double gap = sol.objective - ideal;
    CHECK(gap >= -1e-9 * std::abs(ideal));
    CHECK(gap <= prev_gap + 1e-9 * std::abs(ideal));
    prev_gap = gap;
  }
}

TEST_CASE("piecewise-linear quadratic costs on the 9-bus case") {
  const CaseData cd = load_case(kDataDir + "/case9.m");
  const OpfSolution sol = solve_opf(cd, 0.1, PolygonKind::Irregular);
  REQUIRE(sol.status == LpStatus::Optimal);

  double true_cost = 0.0, secant_slack = 0.0;
  for (std::size_t g = 0; g < cd.gens.size(); ++g) {
    const double x = sol.pg[g] * cd.base_mva;
    const CostFn& c = cd.costs[g];
    true_cost += (c.c2 * x + c.c1) * x + c.c0;
    const double w = (cd.gens[g].pmax - cd.gens[g].pmin) * cd.base_mva / 10.0;
    secant_slack += c.c2 * w * w / 4.0;  // max secant overestimate per segment
  }
  CHECK(sol.objective >= true_cost - 1e-6 * true_cost);
  CHECK(sol.objective <= true_cost + secant_slack + 1e-6 * true_cost);

  // Dispatch respects generator bounds.
  for (std::size_t g = 0; g < cd.gens.size(); ++g) {
    CHECK(sol.pg[g] >= cd.gens[g].pmin - 1e-9);
    CHECK(sol.pg[g] <= cd.gens[g].pmax + 1e-9);
  }
}

TEST_CASE("concave quadratic costs are rejected") {
  const char* text = R"(mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.05	0.95;
	2	1	50	10	0	0	1	1	0	135	1	1.05	0.95;
];
mpc.gen = [
	1	0	0	100	-100	1	100	1	100	0;
];
mpc.branch = [
	1	2	0	0.1	0	100	100	100	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	3	-1	10	0;
];
)";
  const CaseData cd = parse_case(text);
  CHECK_THROWS_AS(build_model(cd, 0.1, PolygonKind::Irregular), std::invalid_argument);
}

TEST_CASE("solution exports") {
  const CaseData cd = load_case(kDataDir + "/case2.m");
  const OpfSolution sol = solve_opf(cd, 0.1, PolygonKind::Irregular);
  const std::string json = solution_to_json(cd, sol);
  for (const char* field : {"objective_per_hour", "\"buses\"", "\"v_pu\"", "\"delta_rad\"",
                            "\"pg_mw\"", "\"p_mva\"", "\"p_norm\"", "binding_sides"}) {
    CHECK(json.find(field) != std::string::npos);
  }
  const std::string csv = flows_to_csv(cd, sol);
  CHECK(csv.rfind("branch,from,to,rate_mva,p_mva,q_mva,p_norm,q_norm\n", 0) == 0);

  // Parallel and serial paths produce identical solutions.
  LpOptions par;
  par.parallel = true;
  const OpfSolution psol = solve_opf(cd, 0.1, PolygonKind::Irregular, par);
  CHECK(psol.objective == sol.objective);
  CHECK(psol.v == sol.v);
  CHECK(psol.delta == sol.delta);
}
