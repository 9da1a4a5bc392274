#pragma once

#include <vector>

#include "hyploop/vec2.hpp"

namespace hyploop {

class Loop;

/// Point of the upper half-plane model; construction enforces z2 > 0.
class HyperPoint {
 public:
  HyperPoint(double z1, double z2);

  constexpr double z1() const noexcept { return z1_; }
  constexpr double z2() const noexcept { return z2_; }
  constexpr Vec2 vec() const noexcept { return {z1_, z2_}; }

  friend bool operator==(const HyperPoint&, const HyperPoint&) = default;

 private:
  double z1_;
  double z2_;
};

struct HypDisk {
  HyperPoint center;
  double rho;  // hyperbolic radius, >= 0
};

struct EuclidDisk {
  Vec2 center;
  double radius;
};

/// Axis-aligned sampling box, z1min < z1max, 0 < z2min < z2max.
struct RegionBox {
  double z1min, z1max, z2min, z2max;

  /// Throws DomainError unless the ordering invariants hold. Pass
  /// require_upper = false for Euclidean use where z2 may be <= 0.
  void validate(bool require_upper = true) const;
  /// Grid node (i, j) of an n x n grid spanning the closed box.
  Vec2 node(int i, int j, int n) const;
  bool contains(Vec2 p) const;
};

/// Hyperbolic distance, from cosh d = 1 + |p - q|^2 / (2 p2 q2).
double hyp_distance(const HyperPoint& p, const HyperPoint& q);

/// Euclidean image of a hyperbolic disk: center (p1, p2 cosh rho), radius p2 sinh rho.
EuclidDisk disk_to_euclid(const HypDisk& d);

/// Inverse of disk_to_euclid for a Euclidean disk strictly inside the half-plane.
HypDisk euclid_to_disk(const EuclidDisk& d);

/// Connection correction Gamma(v) = -i v^2 = (2 v1 v2, v2^2 - v1^2). Defined on all of R^2.
constexpr Vec2 gamma(Vec2 v) { return {2.0 * v.x * v.y, v.y * v.y - v.x * v.x}; }

/// Differential of gamma at v applied to w: 2 (w2 v - w1 i v).
constexpr Vec2 gamma_jac(Vec2 v, Vec2 w) { return 2.0 * (w.y * v - w.x * rot(v)); }

/// Hyperbolic translation u -> z1 e1 + z2 u.
constexpr Vec2 translate(const HyperPoint& z, Vec2 u) { return {z.z1() + z.z2() * u.x, z.z2() * u.y}; }
Loop translate(const HyperPoint& z, const Loop& u);

/// Pointwise geodesic curvature u2 (u'' - u2^-1 Gamma(u')) . (i u') / |u'|^3.
/// Throws DegenerateLoop when min |u'| < 1e-8 max |u'|.
std::vector<double> geodesic_curvature(const Loop& u);

/// Hyperbolic radius of a circle of geodesic curvature k > 1 (artanh 1/k) and R_k = sinh of it.
double circle_radius(double k);
double reference_radius(double k);

}  // namespace hyploop
