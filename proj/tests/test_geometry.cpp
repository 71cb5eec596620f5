#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "polylim/geometry.hpp"

using namespace polylim;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent sagitta oracle: place the chord symmetrically about the +P
// axis and measure the distance from the circle to the chord midpoint.
double sagitta_by_midpoint(double s, double chord_length) {
  const double half = chord_length / 2.0;
  const PqPoint e1{std::sqrt(s * s - half * half), half};
  const PqPoint e2{std::sqrt(s * s - half * half), -half};
  const double mid_norm = std::hypot((e1.p + e2.p) / 2.0, (e1.q + e2.q) / 2.0);
  return s - mid_norm;
}

std::vector<int> argmin_sides_by_sagitta(const Polygon& poly) {
  double best = poly.sides[0].sagitta;
  for (const ChordSpec& cs : poly.sides) best = std::min(best, cs.sagitta);
  std::vector<int> out;
  for (std::size_t i = 0; i < poly.sides.size(); ++i) {
    if (poly.sides[i].sagitta <= best + 1e-9 * poly.limit.s) out.push_back(i + 1);
  }
  return out;
}

std::vector<int> argmax_sides_by_length(const Polygon& poly) {
  double best = poly.sides[0].length;
  for (const ChordSpec& cs : poly.sides) best = std::max(best, cs.length);
  std::vector<int> out;
  for (std::size_t i = 0; i < poly.sides.size(); ++i) {
    if (poly.sides[i].length >= best - 1e-9 * poly.limit.s) out.push_back(i + 1);
  }
  return out;
}

bool vertex_set_contains(const Polygon& poly, double p, double q, double tol) {
  for (const PqPoint& v : poly.vertices) {
    if (std::abs(v.p - p) <= tol && std::abs(v.q - q) <= tol) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("sagitta of a chord") {
  const CircleLimit s16{16.0, 0};
  CHECK(sagitta(s16, 32.0) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(sagitta(s16, 10.0) == doctest::Approx(0.8013158464293362).epsilon(1e-12));
  CHECK(sagitta(s16, 10.0) ==
        doctest::Approx(sagitta_by_midpoint(16.0, 10.0)).epsilon(1e-12));

  // Chord of the 29-gon that covers (16, 0.1) MVA: error stays below 0.1.
  const double l29 = 2.0 * 16.0 * std::sin(kPi / 29.0);
  CHECK(sagitta(s16, l29) == doctest::Approx(0.09379268553024644).epsilon(1e-10));
  CHECK(sagitta(s16, l29) < 0.1);

  CHECK_THROWS_AS(sagitta(s16, 0.0), std::domain_error);
  CHECK_THROWS_AS(sagitta(s16, -1.0), std::domain_error);
  CHECK_THROWS_AS(sagitta(s16, 32.0001), std::domain_error);
  CHECK_THROWS_AS(sagitta({-5.0, 0}, 1.0), std::domain_error);
}

TEST_CASE("chord length from arc angle") {
  const CircleLimit s16{16.0, 0};
  CHECK(chord_from_angle(s16, kPi) == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(chord_from_angle(s16, kPi / 2.0) ==
        doctest::Approx(22.62741699796952).epsilon(1e-12));
  // Same chord as the first irregular segment with mq=5 (length s sqrt(2/5)).
  const double dt1 = std::acos(1.0 - 1.0 / 5.0);
  CHECK(chord_from_angle(s16, dt1) ==
        doctest::Approx(16.0 * std::sqrt(0.4)).epsilon(1e-12));

  CHECK_THROWS_AS(chord_from_angle(s16, 0.0), std::domain_error);
  CHECK_THROWS_AS(chord_from_angle(s16, kPi + 1e-9), std::domain_error);
}

TEST_CASE("arc angle from error and back") {
  const CircleLimit s16{16.0, 0};
  const CircleLimit s220{220.0, 0};
  CHECK(angle_from_error(s16, 16.0) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(angle_from_error(s16, 0.1) == doctest::Approx(0.22372342370360654).epsilon(1e-12));
  CHECK(angle_from_error(s220, 0.1) == doctest::Approx(0.060304553326046596).epsilon(1e-12));
  CHECK(static_cast<int>(std::ceil(2.0 * kPi / angle_from_error(s220, 0.1))) == 105);

  CHECK(error_from_angle(s16, kPi) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(error_from_angle(s16, std::acos(0.8)) ==
        doctest::Approx(0.821067231191779).epsilon(1e-12));
  CHECK(error_from_angle(s16, angle_from_error(s16, 0.1)) ==
        doctest::Approx(0.1).epsilon(1e-9));

  CHECK_THROWS_AS(angle_from_error(s16, 0.0), std::domain_error);
  CHECK_THROWS_AS(angle_from_error(s16, 16.0001), std::domain_error);
  CHECK_THROWS_AS(error_from_angle(s16, -0.5), std::domain_error);
}

TEST_CASE("side counts") {
  CHECK(regular_side_count({16.0, 0}, 0.1) == 29);
  CHECK(regular_side_count({220.0, 0}, 0.2) == 74);
  CHECK(regular_side_count({1800.0, 0}, 0.3) == 173);
  CHECK_THROWS_AS(regular_side_count({16.0, 0}, 16.0), std::domain_error);

  CHECK(irregular_quadrant_count({16.0, 0}, 0.1) == 5);
  CHECK(irregular_quadrant_count({880.0, 0}, 0.2) == 24);
  CHECK(irregular_quadrant_count({1800.0, 0}, 0.1) == 48);
  CHECK_THROWS_AS(irregular_quadrant_count({16.0, 0}, -0.1), std::domain_error);
}

TEST_CASE("regular polygon construction") {
  const Polygon p29 = build_regular({16.0, 0}, 0.1);
  CHECK(p29.m == 29);
  CHECK(p29.vertices.size() == 29);
  CHECK(p29.sides.size() == 29);
  CHECK(p29.vertices[0].p == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p29.vertices[0].q == doctest::Approx(16.0).epsilon(1e-12));
  for (const ChordSpec& side : p29.sides) {
    CHECK(side.sagitta == doctest::Approx(0.09379268553024644).epsilon(1e-10));
    CHECK(side.sagitta <= 0.1);
  }

  // m = 4 square, vertices on the axes.
  const Polygon sq = build_regular({1.0, 0}, 0.293);
  CHECK(sq.m == 4);
  CHECK(vertex_set_contains(sq, 0.0, 1.0, 1e-12));
  CHECK(vertex_set_contains(sq, -1.0, 0.0, 1e-12));
  CHECK(vertex_set_contains(sq, 0.0, -1.0, 1e-12));
  CHECK(vertex_set_contains(sq, 1.0, 0.0, 1e-12));

  const Polygon p105 = build_regular({220.0, 0}, 0.1);
  CHECK(p105.m == 105);
  for (const PqPoint& v : p105.vertices) {
    CHECK(std::abs(v.p * v.p + v.q * v.q - 220.0 * 220.0) <= 1e-9 * 220.0 * 220.0);
  }
}

TEST_CASE("irregular polygon construction") {
  const Polygon poly = build_irregular({16.0, 0}, 0.1);
  CHECK(poly.mq == 5);
  CHECK(poly.m == 20);
  CHECK(poly.vertices.size() == 20);

  CHECK(vertex_set_contains(poly, 0.0, -16.0, 1e-12));
  CHECK(vertex_set_contains(poly, 9.6, -12.8, 1e-12));
  CHECK(vertex_set_contains(poly, 12.8, -9.6, 1e-12));
  CHECK(vertex_set_contains(poly, 16.0, 0.0, 1e-12));
  CHECK(poly.vertices[0].q == doctest::Approx(16.0).epsilon(1e-12));

  CHECK(poly.sides[0].length == doctest::Approx(16.0 * std::sqrt(0.4)).epsilon(1e-12));
  CHECK(poly.sides[0].sagitta == doctest::Approx(0.821067231191779).epsilon(1e-10));

  double min_sag = poly.sides[0].sagitta;
  for (const ChordSpec& cs : poly.sides) min_sag = std::min(min_sag, cs.sagitta);
  CHECK(min_sag == doctest::Approx(0.08102155191801508).epsilon(1e-9));
  CHECK(min_sag <= 0.1);

  // One side per quadrant degenerates to the inscribed square.
  const Polygon sq = build_irregular_mq({1.0, 0}, 1);
  CHECK(sq.m == 4);
  CHECK(vertex_set_contains(sq, 0.0, 1.0, 1e-15));
  CHECK(vertex_set_contains(sq, 0.0, -1.0, 1e-15));
  CHECK(vertex_set_contains(sq, 1.0, 0.0, 1e-15));
  CHECK(vertex_set_contains(sq, -1.0, 0.0, 1e-15));
  CHECK(irregular_quadrant_count({1.0, 0}, 1.0 - std::cos(kPi / 4.0)) == 1);

  const Polygon p40 = build_irregular_mq({16.0, 0}, 10);
  CHECK(p40.m == 40);
  CHECK(argmin_sides_by_sagitta(p40) == std::vector<int>{10, 11, 30, 31});
  CHECK(argmax_sides_by_length(p40) == std::vector<int>{1, 20, 21, 40});
}

TEST_CASE("first segment diagnostics") {
  const FirstSegment f5 = first_segment_stats({16.0, 0}, 5);
  CHECK(f5.delta_theta_1 == doctest::Approx(0.6435011087932843).epsilon(1e-12));
  CHECK(f5.l_fg == doctest::Approx(10.119288512538814).epsilon(1e-12));
  CHECK(f5.e_1 == doctest::Approx(0.821067231191779).epsilon(1e-12));

  const FirstSegment f1 = first_segment_stats({1.0, 0}, 1);
  CHECK(f1.delta_theta_1 == doctest::Approx(kPi / 2.0).epsilon(1e-12));
  CHECK(f1.l_fg == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(f1.e_1 == doctest::Approx(0.2928932188134525).epsilon(1e-12));

  const FirstSegment f10 = first_segment_stats({16.0, 0}, 10);
  CHECK(f10.delta_theta_1 == doctest::Approx(0.45102681179626236).epsilon(1e-12));
  CHECK(f10.l_fg == doctest::Approx(7.155417527999327).epsilon(1e-12));
  CHECK(f10.e_1 == doctest::Approx(0.40512904830565766).epsilon(1e-12));

  // Must agree with the built polygon's side 1.
  for (int mq : {1, 3, 5, 10, 48}) {
    const CircleLimit lim{16.0, 0};
    const FirstSegment fs = first_segment_stats(lim, mq);
    const Polygon poly = build_irregular_mq(lim, mq);
    CHECK(std::abs(poly.sides[0].length - fs.l_fg) <= 1e-9 * lim.s);
    CHECK(std::abs(poly.sides[0].sagitta - fs.e_1) <= 1e-9 * lim.s);
    CHECK(std::abs(poly.sides[0].delta_theta - fs.delta_theta_1) <= 1e-9);
  }

  CHECK_THROWS_AS(first_segment_stats({16.0, 0}, 0), std::domain_error);
}

TEST_CASE("hot-start chord at an arbitrary angle") {
  const HotStartChord hc = linearize_at_angle({16.0, 0}, 0.0, 0.1);
  CHECK(hc.end_plus.p == doctest::Approx(15.9).epsilon(1e-9));
  CHECK(hc.end_plus.q == doctest::Approx(1.7860571099491744).epsilon(1e-9));
  CHECK(hc.end_minus.q == doctest::Approx(-1.7860571099491744).epsilon(1e-9));
  CHECK(hc.chord.length == doctest::Approx(3.5721142198983493).epsilon(1e-9));
  CHECK(hc.chord.sagitta == doctest::Approx(0.1).epsilon(1e-9));

  const HotStartChord diam = linearize_at_angle({16.0, 0}, kPi / 2.0, 16.0);
  CHECK(diam.chord.length == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(std::abs(diam.end_minus.q) <= 1e-9);
  CHECK(std::abs(diam.end_plus.q) <= 1e-9);
  CHECK(std::abs(std::abs(diam.end_minus.p) - 16.0) <= 1e-9);

  const HotStartChord h220 = linearize_at_angle({220.0, 0}, kPi / 4.0, 0.1);
  CHECK(h220.chord.length == doctest::Approx(13.264991519032433).epsilon(1e-9));
  // Midpoint sits in direction theta at distance s - e.
  const double mp = (h220.end_minus.p + h220.end_plus.p) / 2.0;
  const double mq_ = (h220.end_minus.q + h220.end_plus.q) / 2.0;
  CHECK(std::hypot(mp, mq_) == doctest::Approx(220.0 - 0.1).epsilon(1e-9));
  CHECK(std::atan2(mq_, mp) == doctest::Approx(kPi / 4.0).epsilon(1e-12));

  CHECK_THROWS_AS(linearize_at_angle({16.0, 0}, 0.0, 17.0), std::domain_error);
}

TEST_CASE("chord identity and round-trip properties") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ratio(1e-4, 0.9);
  std::uniform_real_distribution<double> radius(0.5, 2000.0);
  for (int i = 0; i < 1000; ++i) {
    const double s = radius(rng);
    const double e = ratio(rng) * s;
    const CircleLimit lim{s, 0};
    const double dt = angle_from_error(lim, e);
    CHECK(std::abs(error_from_angle(lim, dt) - e) <= 1e-9 * s);
    // Both chord forms of the same arc agree.
    const double via_cos = chord_from_angle(lim, dt);
    const double via_sin = 2.0 * s * std::sin(dt / 2.0);
    CHECK(std::abs(via_cos - via_sin) <= 1e-12 * s);
  }
}

TEST_CASE("quadrant-count identities on a ratio grid") {
  // 4 / sqrt(1 - phi^2) with phi = 2 (1 - r)^2 - 1 equals
  // 2 / ((1 - r) sqrt(1 - (1 - r)^2)).
  for (double r = 0.01; r < 1.0; r += 0.01) {
    const double t = 1.0 - r;
    const double phi = 2.0 * t * t - 1.0;
    const double lhs = 4.0 / std::sqrt(1.0 - phi * phi);
    const double rhs = 2.0 / (t * std::sqrt(1.0 - t * t));
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
  }
}

TEST_CASE("polygon invariants over the table grid") {
  const std::vector<double> limits = {16.0, 220.0, 880.0, 1800.0};
  const std::vector<double> errors = {0.1, 0.2, 0.3};
  for (double s : limits) {
    for (double e : errors) {
      const CircleLimit lim{s, 0};
      for (const Polygon& poly : {build_regular(lim, e), build_irregular(lim, e)}) {
        const int m = poly.m;
        REQUIRE(static_cast<int>(poly.vertices.size()) == m);
        REQUIRE(static_cast<int>(poly.sides.size()) == m);

        for (const PqPoint& v : poly.vertices) {
          CHECK(std::abs(v.p * v.p + v.q * v.q - s * s) <= 1e-9 * s * s);
        }
        // Convexity: consecutive edge cross products all positive.
        for (int k = 0; k < m; ++k) {
          const PqPoint& a = poly.vertices[k];
          const PqPoint& b = poly.vertices[(k + 1) % m];
          const PqPoint& c = poly.vertices[(k + 2) % m];
          const double cross =
              (b.p - a.p) * (c.q - b.q) - (b.q - a.q) * (c.p - b.p);
          CHECK(cross > 0.0);
        }
        if (poly.kind == PolygonKind::Irregular) {
          for (const PqPoint& v : poly.vertices) {
            CHECK(vertex_set_contains(poly, -v.p, v.q, 1e-9 * s));
            CHECK(vertex_set_contains(poly, v.p, -v.q, 1e-9 * s));
          }
          // Right-half q coordinates form the arithmetic progression
          // -s, -s + s/mq, ..., +s.
          std::vector<double> right_q;
          for (const PqPoint& v : poly.vertices) {
            if (v.p >= -1e-12 * s) right_q.push_back(v.q);
          }
          std::sort(right_q.begin(), right_q.end());
          REQUIRE(static_cast<int>(right_q.size()) == 2 * poly.mq + 1);
          for (std::size_t k = 0; k < right_q.size(); ++k) {
            CHECK(std::abs(right_q[k] - (-s + k * s / poly.mq)) <= 1e-9 * s);
          }
          double min_sag = poly.sides[0].sagitta;
          for (const ChordSpec& cs : poly.sides) min_sag = std::min(min_sag, cs.sagitta);
          CHECK(min_sag <= e);
          // Fig. 3 shape: smallest errors flank the P axis, longest sides
          // flank the Q axis.
          const std::set<int> min_expect{poly.mq, poly.mq + 1, 3 * poly.mq, 3 * poly.mq + 1};
          for (int idx : argmin_sides_by_sagitta(poly)) CHECK(min_expect.count(idx) == 1);
          const std::set<int> max_expect{1, 2 * poly.mq, 2 * poly.mq + 1, 4 * poly.mq};
          for (int idx : argmax_sides_by_length(poly)) CHECK(max_expect.count(idx) == 1);
        } else {
          for (const ChordSpec& cs : poly.sides) CHECK(cs.sagitta <= e + 1e-12 * s);
        }
        // ChordSpec relations (Eqs. for length and sagitta from the angle).
        for (const ChordSpec& cs : poly.sides) {
          CHECK(std::abs(cs.length - 2.0 * s * std::sin(cs.delta_theta / 2.0)) <= 1e-9 * s);
          const double sn = std::sin(cs.delta_theta / 4.0);
          CHECK(std::abs(cs.sagitta - 2.0 * s * sn * sn) <= 1e-9 * s);
        }
      }
    }
  }
}

TEST_CASE("side counts are monotone over the table grid") {
  const std::vector<double> limits = {16.0, 220.0, 880.0, 1800.0};
  const std::vector<double> errors = {0.1, 0.2, 0.3};
  for (double s : limits) {
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
      CHECK(regular_side_count({s, 0}, errors[i]) >= regular_side_count({s, 0}, errors[i + 1]));
      CHECK(irregular_quadrant_count({s, 0}, errors[i]) >=
            irregular_quadrant_count({s, 0}, errors[i + 1]));
    }
  }
  for (double e : errors) {
    for (std::size_t i = 0; i + 1 < limits.size(); ++i) {
      CHECK(regular_side_count({limits[i], 0}, e) <= regular_side_count({limits[i + 1], 0}, e));
      CHECK(irregular_quadrant_count({limits[i], 0}, e) <=
            irregular_quadrant_count({limits[i + 1], 0}, e));
    }
  }
  for (double s : limits) {
    for (double e : errors) {
      CHECK(4 * irregular_quadrant_count({s, 0}, e) < regular_side_count({s, 0}, e));
    }
  }
}
