#pragma once

#include <vector>

namespace polylim {

/// A point in one branch's P-Q plane, in MVA.
struct PqPoint {
  double p = 0.0;
  double q = 0.0;
};

/// Quadratic apparent-power limit of one branch: p^2 + q^2 <= s^2.
struct CircleLimit {
  double s = 0.0;  ///< MVA rating, radius of the limit circle; must be > 0
  int index = 0;   ///< branch identifier, opaque to the geometry
};

/// One polygon side: the arc angle it subtends at the centre, the chord
/// length, and the sagitta (maximum chord-to-arc distance, the per-side
/// linearization error).
struct ChordSpec {
  double delta_theta = 0.0;  // radians, in (0, pi]
  double length = 0.0;       // MVA, in (0, 2s]
  double sagitta = 0.0;      // MVA, in (0, s]
};

enum class PolygonKind { Regular, Irregular };

/// Convex polygon inscribed in the limit circle. Vertices run anticlockwise
/// starting at (0, +s); side k (1-indexed) joins vertex k to vertex k+1 and
/// the last side wraps back to the first vertex.
struct Polygon {
  CircleLimit limit;
  PolygonKind kind = PolygonKind::Regular;
  std::vector<PqPoint> vertices;
  std::vector<ChordSpec> sides;  // sides[k] describes side k+1
  int mq = 0;                    // sides per quadrant; 0 for regular polygons
  int m = 0;                     // total side count == vertex count
};

/// Diagnostics of the side adjacent to the +Q axis of an irregular polygon.
struct FirstSegment {
  double delta_theta_1 = 0.0;  // radians
  double l_fg = 0.0;           // MVA
  double e_1 = 0.0;            // MVA
};

/// A single chord centred on direction theta, for hot-start linearization.
struct HotStartChord {
  ChordSpec chord;
  PqPoint end_minus;  // endpoint at theta - delta_theta/2
  PqPoint end_plus;   // endpoint at theta + delta_theta/2
};

/// Sagitta of a chord of the given length: s - sqrt(s^2 - (L/2)^2).
/// Throws std::domain_error unless 0 < chord_length <= 2s.
double sagitta(const CircleLimit& limit, double chord_length);

/// Chord length subtending delta_theta: sqrt(2) * s * sqrt(1 - cos dt).
/// Throws std::domain_error unless 0 < delta_theta <= pi.
double chord_from_angle(const CircleLimit& limit, double delta_theta);

/// Arc angle whose chord has sagitta e: acos(2 (1 - e/s)^2 - 1).
/// Throws std::domain_error unless 0 < e <= s.
double angle_from_error(const CircleLimit& limit, double e);

/// Sagitta of the chord subtending delta_theta: 2 s sin^2(dt/4).
double error_from_angle(const CircleLimit& limit, double delta_theta);

/// Number of sides of the regular inscribed polygon whose per-side sagitta
/// does not exceed e_max: ceil(2 pi / angle_from_error(e_max)).
int regular_side_count(const CircleLimit& limit, double e_max);

/// Sides per quadrant of the irregular polygon whose smallest per-side
/// sagitta does not exceed e_min: ceil(s / (s sin(angle_from_error(e_min)))).
/// The total side count is 4 * mq.
int irregular_quadrant_count(const CircleLimit& limit, double e_min);

Polygon build_regular(const CircleLimit& limit, double e_max);
Polygon build_irregular(const CircleLimit& limit, double e_min);

/// Irregular polygon with an explicit per-quadrant side count.
Polygon build_irregular_mq(const CircleLimit& limit, int mq);

/// Closed-form stats of side 1 for a given mq:
///   delta_theta_1 = acos(1 - 1/mq), l_fg = s sqrt(2/mq), e_1 from the angle.
FirstSegment first_segment_stats(const CircleLimit& limit, int mq);

/// Chord of sagitta e whose midpoint lies in direction theta (radians,
/// anticlockwise from the +P axis; any real, taken modulo 2 pi).
HotStartChord linearize_at_angle(const CircleLimit& limit, double theta, double e);

}  // namespace polylim
