#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hyploop/field.hpp"
#include "hyploop/functionals.hpp"
#include "hyploop/loop.hpp"
#include "hyploop/melnikov.hpp"
#include "hyploop/model.hpp"

namespace hyploop {

// Flat-plane counterpart: curvature k circles are z + (cos, sin) / k.

Loop euclid_reference_loop(double k, Vec2 z, std::size_t n);

/// (mean |u'|^2)^(1/2).
double euclid_length(const Loop& u);
/// Area functional of the constant field 1: mean(u2 u1').
double euclid_area_A1(const Loop& u);
/// mean Q(u) . i u' with Q = (1/2 int_0^z1 K(t, z2) dt, 1/2 int_0^z2 K(z1, t) dt).
double euclid_area_AK(const Loop& u, const FieldExpr& field);
EnergyBreakdown euclid_energy(const Loop& u, double k, double eps, const FieldExpr& field);

/// -u'' + L(u) (k + eps K(u)) i u'.
VecField residual_J_euclid(const Loop& u, double k, double eps, const FieldExpr& field);
/// u'' . i u' / |u'|^3.
std::vector<double> euclid_curvature(const Loop& u);
/// Killing fields e1, e2 and the rotation i z.
VerifyReport verify_solution_euclid(const Loop& u, double k, double eps, const FieldExpr& field);

/// Integral of K over the disk of radius 1/k about z.
double melnikov_F_euclid(Vec2 z, double k, const FieldExpr& field, DiskQuadrature q = {});
Vec2 melnikov_grad_euclid(Vec2 z, double k, const FieldGrad& grad, DiskQuadrature q = {});

/// -f'' + i f' - k^2 (mean f . w) w at any translated circle.
VecField apply_J0prime_euclid(const VecField& f, double k);
/// Inverse on the complement of span{w', e1, e2}; rhs must be orthogonal to it.
VecField solve_J0prime_euclid(const VecField& rhs, double k, double tol = 1e-9);
/// w', e1, e2 sampled on the circle.
std::array<VecField, 3> euclid_tangent_space(double k, std::size_t n);

struct EuclidKernelReport {
  int dimension = 0;
  std::vector<int> zero_modes;
  double sigma_max = 0.0;
  double sigma_min_nonzero = 0.0;
  std::array<double, 3> basis_residual{};  // sup |J0' b| for b in {w', e1, e2}
  double max_principal_angle = 0.0;
};

EuclidKernelReport kernel_euclid(double k, std::size_t n = 256);

class EuclideanModel final : public LoopModel {
 public:
  EuclideanModel(double k, FieldExpr field);

  std::string_view name() const override { return "euclidean"; }
  void check_center(Vec2 z) const override;
  Loop reference(Vec2 z, std::size_t n) const override;
  std::array<VecField, 3> tangent(std::size_t n) const override;
  Vec2 reduced_scale(std::size_t) const override { return {1.0, 1.0}; }
  double reference_energy() const override;
  bool admissible(const Loop& u) const override;
  double length(const Loop& u) const override;
  VecField residual(const Loop& u, double eps) const override;
  EnergyBreakdown energy(const Loop& u, double eps) const override;
  VerifyReport verify(const Loop& u, double eps) const override;
  VecField apply_linearized(Vec2 z, const VecField& f) const override;
  VecField solve_linearized(Vec2 z, const VecField& rhs) const override;
  Objective melnikov(DiskQuadrature q = {}) const override;
};

}  // namespace hyploop
