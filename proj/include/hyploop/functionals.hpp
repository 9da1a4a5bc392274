#pragma once

#include <array>
#include <cstddef>

#include "hyploop/field.hpp"
#include "hyploop/geometry.hpp"
#include "hyploop/loop.hpp"

namespace hyploop {

/// Circle of geodesic curvature k through the unit-speed parametrization
/// theta -> (cos theta, 1/R) / (k - sin theta), R = reference_radius(k).
Vec2 reference_point(double k, double theta);
Vec2 reference_velocity(double k, double theta);
Loop reference_loop(double k, std::size_t n);
/// The reference circle moved by the isometry u -> z1 e1 + z2 u.
Loop reference_loop(double k, const HyperPoint& z, std::size_t n);

/// Potential choice for the perturbed area term. Split is the symmetric
/// choice with half of K in each component; the other two put all of it in
/// one component. All have the same divergence and give the same area.
enum class Gauge { split, horizontal, vertical };

/// (mean u2^-2 |u'|^2)^(1/2). Throws DegenerateLoop for a numerically constant loop.
double length_L(const Loop& u);
/// Area functional of the constant field 1 with potential (0, -1/z2): -mean(u1' / u2).
double area_A1(const Loop& u);
/// mean Q_K(u) . i u' with the potential integrals done by adaptive quadrature.
double area_AK(const Loop& u, const FieldExpr& k, Gauge gauge = Gauge::split);

struct EnergyBreakdown {
  double length_part = 0.0;      // L(u)
  double const_area_part = 0.0;  // k A_1(u)
  double pert_area_part = 0.0;   // A_K(u)
  double total = 0.0;            // L + k A_1 + eps A_K
};

/// With eps == 0 the perturbed area is skipped and reported as 0.
EnergyBreakdown energy(const Loop& u, double k, double eps, const FieldExpr& field);

/// u2^-2 (-u'' + u2^-1 Gamma(u') + L(u) (k + eps K(u)) i u').
VecField residual_J(const Loop& u, double k, double eps, const FieldExpr& field);

/// Prescribed curvature k + eps K at each sample.
std::vector<double> prescribed_curvature(const Loop& u, double k, double eps, const FieldExpr& field);

/// Winding number of u about its sample centroid, measured on a 4x refined polyline.
int winding_number(const Loop& u);
/// No two non-adjacent segments of the 4x refined polyline intersect.
bool is_embedded(const Loop& u);

struct VerifyReport {
  double residual_sup = 0.0;
  double length = 0.0;
  double speed_defect = 0.0;      // max |metric speed - L|
  double curvature_defect = 0.0;  // max |kappa - (k + eps K)|
  /// Boundary integrals mean w(u) (k + eps K)(u) X(u) . i u' for the three
  /// Killing fields X of the geometry (weight w = u2^-2 in the half-plane).
  std::array<double, 3> killing{};
  int winding = 0;
  bool embedded = false;
  bool regular = true;
};

/// Never throws for a hyperbolic-valid loop; a degenerate loop yields
/// regular = false and infinite defects.
VerifyReport verify_solution(const Loop& u, double k, double eps, const FieldExpr& field);

}  // namespace hyploop
