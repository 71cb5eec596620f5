#include "polylim/halfplanes.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace polylim {

namespace {

std::string num12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Polygon build_for(const CircleLimit& limit, double e, PolygonKind kind) {
  return kind == PolygonKind::Regular ? build_regular(limit, e) : build_irregular(limit, e);
}

}  // namespace

HalfPlane side_to_halfplane(const PqPoint& v1, const PqPoint& v2, const CircleLimit& limit) {
  const double dp = v2.p - v1.p;
  const double dq = v2.q - v1.q;
  const double len = std::hypot(dp, dq);
  if (!(len > 1e-12 * std::max(1.0, limit.s))) {
    throw std::invalid_argument("degenerate polygon side: coincident vertices");
  }
  // Inward unit normal of the directed chord v1 -> v2; for anticlockwise
  // polygons cross(v1, v2) >= 0 and c is the chord's distance from the origin.
  HalfPlane hp;
  hp.a = -dq / len;
  hp.b = dp / len;
  hp.c = (v1.p * v2.q - v1.q * v2.p) / len;
  if (hp.c < 0.0) {
    hp.a = -hp.a;
    hp.b = -hp.b;
    hp.c = -hp.c;
  }
  return hp;
}

ConstraintSet polygon_to_constraints(const Polygon& poly) {
  ConstraintSet cs;
  cs.branch = poly.limit.index;
  cs.limit = poly.limit;
  cs.halfplanes.reserve(poly.vertices.size());
  const int m = static_cast<int>(poly.vertices.size());
  for (int k = 0; k < m; ++k) {
    cs.halfplanes.push_back(
        side_to_halfplane(poly.vertices[k], poly.vertices[(k + 1) % m], poly.limit));
  }
  return cs;
}

bool contains(const ConstraintSet& cs, double p, double q) {
  const double tol = -1e-9 * cs.limit.s;
  for (const HalfPlane& hp : cs.halfplanes) {
    if (hp.a * p + hp.b * q + hp.c < tol) return false;
  }
  return true;
}

std::vector<char> classify_points(const ConstraintSet& cs, const std::vector<PqPoint>& points,
                                  bool parallel) {
  std::vector<char> out(points.size(), 0);
  const long long n = static_cast<long long>(points.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long long i = 0; i < n; ++i) {
    out[i] = contains(cs, points[i].p, points[i].q) ? 1 : 0;
  }
  return out;
}

std::vector<char> alpha_region_check(const std::vector<PqPoint>& points, const CircleLimit& limit,
                                     double alpha) {
  if (!(alpha >= 0.0) || !(alpha < std::atan2(1.0, 0.0))) {
    throw std::domain_error("alpha must lie in [0, pi/2), got " + std::to_string(alpha));
  }
  std::vector<char> out;
  out.reserve(points.size());
  for (const PqPoint& pt : points) {
    // Work on flows normalized by the rating; the angle test is scale-free.
    const double pn = std::abs(pt.p) / limit.s;
    const double qn = std::abs(pt.q) / limit.s;
    out.push_back(std::atan2(pn, qn) < alpha ? 1 : 0);
  }
  return out;
}

long long count_system_constraints(const std::vector<CircleLimit>& limits, double e,
                                   PolygonKind kind) {
  long long total = 0;
  for (const CircleLimit& lim : limits) {
    try {
      total += kind == PolygonKind::Regular ? regular_side_count(lim, e)
                                            : 4LL * irregular_quadrant_count(lim, e);
    } catch (const std::domain_error& ex) {
      throw std::domain_error("branch " + std::to_string(lim.index) + " (rate " +
                              std::to_string(lim.s) + " MVA): " + ex.what());
    }
  }
  return total;
}

std::vector<ConstraintSet> system_constraints(const std::vector<CircleLimit>& limits, double e,
                                              PolygonKind kind, bool parallel) {
  const long long n = static_cast<long long>(limits.size());
  std::vector<ConstraintSet> sets(limits.size());
  std::string error;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long i = 0; i < n; ++i) {
    try {
      sets[i] = polygon_to_constraints(build_for(limits[i], e, kind));
    } catch (const std::exception& ex) {
      const std::string msg = "branch " + std::to_string(limits[i].index) + " (rate " +
                              std::to_string(limits[i].s) + " MVA): " + ex.what();
#pragma omp critical
      if (error.empty() || msg < error) error = msg;
    }
  }
  if (!error.empty()) throw std::domain_error(error);
  return sets;
}

std::string constraints_to_csv(const std::vector<ConstraintSet>& sets) {
  std::string out = "branch_id,side_index,a,b,c\n";
  for (const ConstraintSet& cs : sets) {
    for (std::size_t k = 0; k < cs.halfplanes.size(); ++k) {
      const HalfPlane& hp = cs.halfplanes[k];
      out += std::to_string(cs.branch) + "," + std::to_string(k + 1) + "," + num12(hp.a) + "," +
             num12(hp.b) + "," + num12(hp.c) + "\n";
    }
  }
  return out;
}

std::string constraints_to_json(const std::vector<ConstraintSet>& sets) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ConstraintSet& cs : sets) {
    for (std::size_t k = 0; k < cs.halfplanes.size(); ++k) {
      const HalfPlane& hp = cs.halfplanes[k];
      arr.push_back({{"branch_id", cs.branch},
                     {"side_index", k + 1},
                     {"a", hp.a},
                     {"b", hp.b},
                     {"c", hp.c}});
    }
  }
  return arr.dump(2);
}

}  // namespace polylim
