#pragma once

#include <string>
#include <vector>

#include "polylim/geometry.hpp"

namespace polylim {

/// One linear inequality a*P + b*Q + c >= 0. (a, b) is the unit inward
/// normal of the generating chord and c its perpendicular distance from
/// the origin, so the origin always satisfies the constraint.
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;  // MVA
};

/// The set of half-planes replacing one branch's quadratic limit.
struct ConstraintSet {
  int branch = 0;
  CircleLimit limit;
  std::vector<HalfPlane> halfplanes;  // one per polygon side, same order
};

/// Half-plane through v1 and v2 oriented to contain the origin.
/// Throws std::invalid_argument when the vertices coincide.
HalfPlane side_to_halfplane(const PqPoint& v1, const PqPoint& v2, const CircleLimit& limit);

ConstraintSet polygon_to_constraints(const Polygon& poly);

/// True iff a_k p + b_k q + c_k >= -1e-9 s for every half-plane.
bool contains(const ConstraintSet& cs, double p, double q);

/// Batch membership test; the parallel path splits across points.
std::vector<char> classify_points(const ConstraintSet& cs, const std::vector<PqPoint>& points,
                                  bool parallel = false);

/// For each point, whether its angular distance from the nearest Q-axis
/// direction is below alpha, i.e. whether it falls in the region that
/// alpha-reduced linearizations cut away. alpha in [0, pi/2) radians.
std::vector<char> alpha_region_check(const std::vector<PqPoint>& points, const CircleLimit& limit,
                                     double alpha);

/// Sum over branches of the per-branch side count for the chosen kind.
/// Domain errors are rethrown naming the offending branch.
long long count_system_constraints(const std::vector<CircleLimit>& limits, double e,
                                   PolygonKind kind);

/// Build the full constraint set for every branch limit. The parallel
/// path splits across branches; results are identical to the serial path.
std::vector<ConstraintSet> system_constraints(const std::vector<CircleLimit>& limits, double e,
                                              PolygonKind kind, bool parallel = false);

/// CSV with header branch_id,side_index,a,b,c; numbers at 12 significant digits.
std::string constraints_to_csv(const std::vector<ConstraintSet>& sets);

/// JSON array of {branch_id, side_index, a, b, c} records.
std::string constraints_to_json(const std::vector<ConstraintSet>& sets);

}  // namespace polylim
