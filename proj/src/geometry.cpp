#include "polylim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace polylim {

namespace {

constexpr double kPi = std::numbers::pi;

void require_radius(const CircleLimit& limit) {
  if (!(limit.s > 0.0) || !std::isfinite(limit.s)) {
    throw std::domain_error("branch MVA rating must be positive, got " +
                            std::to_string(limit.s));
  }
}

void require_error_in_radius(const CircleLimit& limit, double e, bool allow_radius) {
  require_radius(limit);
  const bool high_ok = allow_radius ? (e <= limit.s) : (e < limit.s);
  if (!(e > 0.0) || !high_ok || !std::isfinite(e)) {
    throw std::domain_error("error must lie in (0, " +
                            std::string(allow_radius ? "s]" : "s)") +
                            " for s = " + std::to_string(limit.s) + ", got " +
                            std::to_string(e));
  }
}

void require_angle(double delta_theta) {
  if (!(delta_theta > 0.0) || !(delta_theta <= kPi)) {
    throw std::domain_error("arc angle must lie in (0, pi], got " +
                            std::to_string(delta_theta));
  }
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Sagitta from the half-chord h, written to avoid cancellation for h << s.
double sagitta_from_half_chord(double s, double h) {
  const double root = std::sqrt(std::max(0.0, s * s - h * h));
  return (h * h) / (s + root);
}

ChordSpec side_spec(const CircleLimit& limit, const PqPoint& v1, const PqPoint& v2) {
  const double len = std::hypot(v2.p - v1.p, v2.q - v1.q);
  ChordSpec cs;
  cs.length = len;
  cs.delta_theta = 2.0 * std::asin(clamp_unit(len / (2.0 * limit.s)));
  cs.sagitta = sagitta_from_half_chord(limit.s, len / 2.0);
  return cs;
}

}  // namespace

double sagitta(const CircleLimit& limit, double chord_length) {
  require_radius(limit);
  if (!(chord_length > 0.0) || !(chord_length <= 2.0 * limit.s)) {
    throw std::domain_error("chord length must lie in (0, 2s], got " +
                            std::to_string(chord_length));
  }
  return sagitta_from_half_chord(limit.s, chord_length / 2.0);
}

double chord_from_angle(const CircleLimit& limit, double delta_theta) {
  require_radius(limit);
  require_angle(delta_theta);
  return std::sqrt(2.0) * limit.s * std::sqrt(1.0 - std::cos(delta_theta));
}

double angle_from_error(const CircleLimit& limit, double e) {
  require_error_in_radius(limit, e, /*allow_radius=*/true);
  const double t = 1.0 - e / limit.s;
  return std::acos(clamp_unit(2.0 * t * t - 1.0));
}

double error_from_angle(const CircleLimit& limit, double delta_theta) {
  require_radius(limit);
  require_angle(delta_theta);
  const double sn = std::sin(delta_theta / 4.0);
  return 2.0 * limit.s * sn * sn;
}

int regular_side_count(const CircleLimit& limit, double e_max) {
  require_error_in_radius(limit, e_max, /*allow_radius=*/false);
  return static_cast<int>(std::ceil(2.0 * kPi / angle_from_error(limit, e_max)));
}

int irregular_quadrant_count(const CircleLimit& limit, double e_min) {
  require_error_in_radius(limit, e_min, /*allow_radius=*/false);
  const double dq = limit.s * std::sin(angle_from_error(limit, e_min));
  return static_cast<int>(std::ceil(limit.s / dq));
}

Polygon build_regular(const CircleLimit& limit, double e_max) {
  const int m = regular_side_count(limit, e_max);
  Polygon poly;
  poly.limit = limit;
  poly.kind = PolygonKind::Regular;
  poly.m = m;
  poly.vertices.reserve(m);
  for (int k = 0; k < m; ++k) {
    const double phi = kPi / 2.0 + 2.0 * kPi * k / m;
    poly.vertices.push_back({limit.s * std::cos(phi), limit.s * std::sin(phi)});
  }
  const double dt = 2.0 * kPi / m;
  const double sn = std::sin(dt / 4.0);
  const ChordSpec side{dt, 2.0 * limit.s * std::sin(dt / 2.0), 2.0 * limit.s * sn * sn};
  poly.sides.assign(m, side);
  return poly;
}

Polygon build_irregular_mq(const CircleLimit& limit, int mq) {
  require_radius(limit);
  if (mq < 1) {
    throw std::domain_error("quadrant side count must be >= 1, got " + std::to_string(mq));
  }
  const double s = limit.s;
  const double dq = s / mq;  // realized spacing; vertices tile [-s, s] exactly

  // Right-half vertices bottom-to-top: q_k = -s + k dq, p_k = +sqrt(s^2 - q^2).
  std::vector<PqPoint> right(2 * mq + 1);
  for (int k = 0; k <= 2 * mq; ++k) {
    const double q = (k == 2 * mq) ? s : -s + k * dq;
    right[k] = {std::sqrt(std::max(0.0, s * s - q * q)), q};
  }
  right.front().p = 0.0;
  right.back().p = 0.0;

  Polygon poly;
  poly.limit = limit;
  poly.kind = PolygonKind::Irregular;
  poly.mq = mq;
  poly.m = 4 * mq;
  poly.vertices.reserve(poly.m);
  // Anticlockwise from (0, +s): mirror of the right half going down, the
  // bottom vertex, then the right half going up. (0, +/-s) are shared.
  poly.vertices.push_back(right.back());
  for (int k = 2 * mq - 1; k >= 1; --k) {
    poly.vertices.push_back({-right[k].p, right[k].q});
  }
  poly.vertices.push_back(right.front());
  for (int k = 1; k <= 2 * mq - 1; ++k) {
    poly.vertices.push_back(right[k]);
  }

  poly.sides.reserve(poly.m);
  for (int k = 0; k < poly.m; ++k) {
    poly.sides.push_back(side_spec(limit, poly.vertices[k], poly.vertices[(k + 1) % poly.m]));
  }
  return poly;
}

Polygon build_irregular(const CircleLimit& limit, double e_min) {
  return build_irregular_mq(limit, irregular_quadrant_count(limit, e_min));
}

FirstSegment first_segment_stats(const CircleLimit& limit, int mq) {
  require_radius(limit);
  if (mq < 1) {
    throw std::domain_error("quadrant side count must be >= 1, got " + std::to_string(mq));
  }
  FirstSegment fs;
  fs.delta_theta_1 = std::acos(clamp_unit(1.0 - 1.0 / mq));
  fs.l_fg = limit.s * std::sqrt(2.0 / mq);
  fs.e_1 = error_from_angle(limit, fs.delta_theta_1);
  return fs;
}

HotStartChord linearize_at_angle(const CircleLimit& limit, double theta, double e) {
  require_error_in_radius(limit, e, /*allow_radius=*/true);
  const double dt = angle_from_error(limit, e);
  HotStartChord hc;
  hc.chord.delta_theta = dt;
  hc.chord.length = chord_from_angle(limit, dt);
  hc.chord.sagitta = error_from_angle(limit, dt);
  const double lo = theta - dt / 2.0;
  const double hi = theta + dt / 2.0;
  hc.end_minus = {limit.s * std::cos(lo), limit.s * std::sin(lo)};
  hc.end_plus = {limit.s * std::cos(hi), limit.s * std::sin(hi)};
  return hc;
}

}  // namespace polylim
