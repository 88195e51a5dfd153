#pragma once
// Fixed symmetric quadrature rules on the reference triangle. Weights sum to
// one; integrals are weight * area * f(point). All points are strictly
// interior, which matters here because integrands can carry a 1/r factor on
// triangles touching the symmetry axis.

#include <array>

#include "eclsm/mesh.hpp"

namespace eclsm {

struct TriQuadPoint {
  double l1, l2, l3;  // barycentric coordinates
  double w;           // weight, normalized so the rule sums to 1
};

// Degree 2, 3 points (interior variant).
inline const std::array<TriQuadPoint, 3>& tri_rule_deg2() {
  static const std::array<TriQuadPoint, 3> rule = {{
      {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0},
      {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0},
      {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0},
  }};
  return rule;
}

// Degree 4, 6 points (Dunavant).
inline const std::array<TriQuadPoint, 6>& tri_rule_deg4() {
  constexpr double w1 = 0.223381589678011, a1 = 0.445948490915965, b1 = 0.108103018168070;
  constexpr double w2 = 0.109951743655322, a2 = 0.091576213509771, b2 = 0.816847572980459;
  static const std::array<TriQuadPoint, 6> rule = {{
      {b1, a1, a1, w1},
      {a1, b1, a1, w1},
      {a1, a1, b1, w1},
      {b2, a2, a2, w2},
      {a2, b2, a2, w2},
      {a2, a2, b2, w2},
  }};
  return rule;
}

// Degree 5, 7 points (Dunavant, includes the centroid).
inline const std::array<TriQuadPoint, 7>& tri_rule_deg5() {
  constexpr double w1 = 0.125939180544827, a1 = 0.101286507323456, b1 = 0.797426985353087;
  constexpr double w2 = 0.132394152788506, a2 = 0.470142064105115, b2 = 0.059715871789770;
  static const std::array<TriQuadPoint, 7> rule = {{
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
      {b1, a1, a1, w1},
      {a1, b1, a1, w1},
      {a1, a1, b1, w1},
      {b2, a2, a2, w2},
      {a2, b2, a2, w2},
      {a2, a2, b2, w2},
  }};
  return rule;
}

inline Point2 map_barycentric(Point2 a, Point2 b, Point2 c, const TriQuadPoint& q) {
  return {q.l1 * a.r + q.l2 * b.r + q.l3 * c.r, q.l1 * a.z + q.l2 * b.z + q.l3 * c.z};
}

}  // namespace eclsm
