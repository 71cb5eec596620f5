#pragma once

#include <string>
#include <vector>

#include "polylim/caseio.hpp"
#include "polylim/halfplanes.hpp"
#include "polylim/lp.hpp"

namespace polylim {

/// First-order branch flow coefficients. With series admittance
/// y = 1/(r + jx) = g + jb, around the flat start:
///   p_ij =  g (v_i - v_j) - b (d_i - d_j)
///   q_ij = -b (v_i - v_j) - g (d_i - d_j)
/// so a lossless branch (r = 0) carries p on angles and q on magnitudes,
/// and p_ij = -p_ji, q_ij = -q_ji.
struct BranchFlow {
  int from_pos = 0, to_pos = 0;  // bus positions in CaseData
  double g = 0.0, b = 0.0;
};

struct LinearFlowModel {
  std::vector<BranchFlow> branches;  // aligned with CaseData.branches
};

LinearFlowModel make_flow_model(const CaseData& cd);

double branch_p(const BranchFlow& bf, const std::vector<double>& v,
                const std::vector<double>& delta);
double branch_q(const BranchFlow& bf, const std::vector<double>& v,
                const std::vector<double>& delta);

enum class RowFamily { BalanceP, BalanceQ, CostSegment, PolygonSide };

struct RowRef {
  RowFamily family = RowFamily::BalanceP;
  int bus = -1;     // BalanceP/BalanceQ: bus position
  int gen = -1;     // CostSegment: gen position
  int branch = -1;  // PolygonSide: branch position
  int side = 0;     // PolygonSide: 1-indexed polygon side
};

/// The linear OPF as an LpProblem plus the bookkeeping to read it back.
/// Variables: per-bus v and delta, per-gen pg and qg (per-unit), one cost
/// epigraph variable per quadratic-cost generator.
struct LopfModel {
  LpProblem lp;
  LinearFlowModel flow;
  std::vector<CircleLimit> limits;     // rated branches, in branch order
  std::vector<ConstraintSet> sets;     // aligned with limits
  std::vector<RowRef> eq_refs;         // per equality row
  std::vector<RowRef> ge_refs;         // per inequality row
  int nb = 0, ng = 0, nt = 0;
  int v_ofs = 0, d_ofs = 0, pg_ofs = 0, qg_ofs = 0, t_ofs = 0;
  long long polygon_rows = 0;
};

/// Assemble the LOPF. Polygon rows carry flows in MVA (per-unit flows
/// scaled by base_mva) so ratings and errors keep their natural units.
LopfModel build_model(const CaseData& cd, double e, PolygonKind kind, bool parallel = false);

struct BindingSide {
  int branch = 0;  // branch position in CaseData
  int side = 0;    // 1-indexed polygon side
};

struct OpfSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;        // $/h
  std::vector<double> v;         // per bus, per-unit
  std::vector<double> delta;     // per bus, radians
  std::vector<double> pg, qg;    // per gen, per-unit
  std::vector<PqPoint> flows;    // per branch, MVA, from side
  std::vector<BindingSide> binding;
  std::string diagnostics;       // violated row families when not optimal
  long long iterations = 0;
};

OpfSolution solve_opf(const CaseData& cd, double e, PolygonKind kind,
                      const LpOptions& opts = {});

/// Solve an already-built model (lets callers time build and solve apart).
OpfSolution solve_built_model(const CaseData& cd, const LopfModel& model,
                              const LpOptions& opts = {});

/// Per rated branch, the flow point divided by its MVA rating.
std::vector<PqPoint> normalized_flows(const OpfSolution& sol,
                                      const std::vector<CircleLimit>& limits);

std::string solution_to_json(const CaseData& cd, const OpfSolution& sol);
std::string flows_to_csv(const CaseData& cd, const OpfSolution& sol);

}  // namespace polylim
