#include "hyploop/model.hpp"

#include <algorithm>
#include <cmath>

#include "hyploop/errors.hpp"
#include "hyploop/linearized.hpp"

namespace hyploop {

double reference_moment(double k, std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 w = reference_point(k, sample_angle(j, n));
    s[j] = dot(w, w);
  }
  return mean(s);
}

HyperbolicModel::HyperbolicModel(double k, FieldExpr field) : LoopModel(k, std::move(field)) {
  reference_radius(k);
}

void HyperbolicModel::check_center(Vec2 z) const { HyperPoint(z.x, z.y); }

Loop HyperbolicModel::reference(Vec2 z, std::size_t n) const {
  return reference_loop(k(), HyperPoint(z.x, z.y), n);
}

std::array<VecField, 3> HyperbolicModel::tangent(std::size_t n) const { return tangent_space(k(), n); }

Vec2 HyperbolicModel::reduced_scale(std::size_t n) const { return {1.0, reference_moment(k(), n)}; }

double HyperbolicModel::reference_energy() const { return k() - std::sqrt((k() - 1.0) * (k() + 1.0)); }

bool HyperbolicModel::admissible(const Loop& u) const {
  const auto y = u.y();
  return std::all_of(y.begin(), y.end(), [](double v) { return v >= 1e-6; });
}

double HyperbolicModel::length(const Loop& u) const { return length_L(u); }

VecField HyperbolicModel::residual(const Loop& u, double eps) const { return residual_J(u, k(), eps, field()); }

EnergyBreakdown HyperbolicModel::energy(const Loop& u, double eps) const { return hyploop::energy(u, k(), eps, field()); }

VerifyReport HyperbolicModel::verify(const Loop& u, double eps) const {
  return verify_solution(u, k(), eps, field());
}

VecField HyperbolicModel::apply_linearized(Vec2 z, const VecField& f) const {
  return apply_J0prime(HyperPoint(z.x, z.y), f, k());
}

VecField HyperbolicModel::solve_linearized(Vec2 z, const VecField& rhs) const {
  return solve_J0prime(HyperPoint(z.x, z.y), rhs, k());
}

Objective HyperbolicModel::melnikov(DiskQuadrature q) const { return melnikov_objective(k(), field(), q); }

}  // namespace hyploop
