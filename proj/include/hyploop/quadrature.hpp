#pragma once

#include <functional>
#include <vector>

#include "hyploop/vec2.hpp"

namespace hyploop::quad {

struct Rule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (cached, thread-safe).
const Rule& gauss_legendre(int n);

/// Adaptive Gauss-Legendre on [a, b]: a panel is accepted when the 15-point and
/// 2 x 15-point estimates agree to abs_tol scaled by the panel's share of the
/// interval. Throws QuadratureFailure past max_depth bisections.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-12,
                 int max_depth = 40);

/// Tensor rule on the Euclidean disk of given radius centered at 0:
/// Gauss-Legendre in r (weight r) times uniform in angle.
struct DiskRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};
DiskRule disk_rule(double radius, int radial = 64, int angular = 128);

}  // namespace hyploop::quad
