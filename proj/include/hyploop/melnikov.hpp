#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyploop/field.hpp"
#include "hyploop/geometry.hpp"

namespace hyploop {

struct DiskQuadrature {
  int radial = 64;
  int angular = 128;
};

/// Integral of K over the hyperbolic disk of radius artanh(1/k) about z, in
/// the form of an integral over the Euclidean disk of radius R centered at 0:
///   int (q2 + kR)^-2 K(z2 q + (z1, kR z2)) dq.
/// Throws QuadratureFailure if the half-order rule disagrees by more than 1e-9
/// relative.
double melnikov_F(const HyperPoint& z, double k, const FieldExpr& field, DiskQuadrature q = {});
Vec2 melnikov_grad(const HyperPoint& z, double k, const FieldGrad& grad, DiskQuadrature q = {});
/// Throws NonDifferentiable when the field uses abs.
Vec2 melnikov_grad(const HyperPoint& z, double k, const FieldExpr& field, DiskQuadrature q = {});

enum class CriticalKind { min, max, saddle, degenerate, none };
std::string_view to_string(CriticalKind c);

struct MelnikovSample {
  Vec2 z;
  double value = 0.0;
  Vec2 grad;
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
  CriticalKind kind = CriticalKind::none;
  int iterations = 0;
};

/// A scalar function of the center with its gradient.
struct Objective {
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> gradient;
  bool constant = false;  // known to be constant (e.g. constant field)
};

struct GridNode {
  Vec2 z;
  double value = 0.0;
  Vec2 grad;
};

struct CriticalSearch {
  std::vector<GridNode> grid;          // row-major: z1 index outer, z2 index inner
  std::vector<MelnikovSample> points;  // ordered by (z1, z2)
  bool constant = false;
  std::string note;
  /// Sampled version of the boundary test: interior minimum of F below the
  /// boundary minimum (resp. interior maximum above the boundary maximum).
  bool interior_min = false;
  bool interior_max = false;
};

/// Grid scan of |grad| over a grid x grid lattice of the box, Newton
/// refinement from each local minimum, Hessian classification. The grid scan
/// is split over `threads` workers; results do not depend on the count.
CriticalSearch find_critical(const Objective& obj, const RegionBox& box, int grid, int threads = 1);
CriticalSearch find_critical(double k, const FieldExpr& field, const RegionBox& box, int grid,
                             DiskQuadrature q = {}, int threads = 1);

Objective melnikov_objective(double k, const FieldExpr& field, DiskQuadrature q = {});

struct AsymptoticCheck {
  double lhs = 0.0;     // F / (pi R^2 z2^2)
  double rhs = 0.0;     // K(z) / z2^2
  double abs_err = 0.0;
  double rel_err = 0.0; // NaN when rhs == 0
};

AsymptoticCheck asymptotic_check(const HyperPoint& z, double k, const FieldExpr& field);

}  // namespace hyploop
