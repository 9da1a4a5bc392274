#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "hyploop/field.hpp"
#include "hyploop/functionals.hpp"
#include "hyploop/loop.hpp"
#include "hyploop/melnikov.hpp"

namespace hyploop {

/// Everything the reduction solver needs to know about the ambient metric.
/// The hyperbolic and the flat case differ only in the weight of the energy,
/// the connection term of the residual and the linearized inverse.
class LoopModel {
 public:
  LoopModel(double k, FieldExpr field) : k_(k), field_(std::move(field)) {}
  virtual ~LoopModel() = default;

  double k() const noexcept { return k_; }
  const FieldExpr& field() const noexcept { return field_; }

  virtual std::string_view name() const = 0;
  /// Throws DomainError if z is not an admissible center.
  virtual void check_center(Vec2 z) const = 0;
  /// Constant-curvature circle with center parameter z.
  virtual Loop reference(Vec2 z, std::size_t n) const = 0;
  /// Tangent directions (rotation, first translation, second translation) of
  /// the circle family; the same at every center.
  virtual std::array<VecField, 3> tangent(std::size_t n) const = 0;
  /// Multiplier-to-gradient factors: dE/dz_j = theta_j scale_j / L(u).
  virtual Vec2 reduced_scale(std::size_t n) const = 0;
  /// Energy of the unperturbed circle.
  virtual double reference_energy() const = 0;

  /// Guard used while iterating: the candidate loop can be evaluated.
  virtual bool admissible(const Loop& u) const = 0;
  virtual double length(const Loop& u) const = 0;
  virtual VecField residual(const Loop& u, double eps) const = 0;
  virtual EnergyBreakdown energy(const Loop& u, double eps) const = 0;
  virtual VerifyReport verify(const Loop& u, double eps) const = 0;

  /// Linearized residual at the circle with center z and its inverse on the
  /// L2-complement of the tangent space.
  virtual VecField apply_linearized(Vec2 z, const VecField& f) const = 0;
  virtual VecField solve_linearized(Vec2 z, const VecField& rhs) const = 0;

  virtual Objective melnikov(DiskQuadrature q = {}) const = 0;

 private:
  double k_;
  FieldExpr field_;
};

/// Half-plane model. Requires k > 1.
class HyperbolicModel final : public LoopModel {
 public:
  HyperbolicModel(double k, FieldExpr field);

  std::string_view name() const override { return "hyperbolic"; }
  void check_center(Vec2 z) const override;
  Loop reference(Vec2 z, std::size_t n) const override;
  std::array<VecField, 3> tangent(std::size_t n) const override;
  Vec2 reduced_scale(std::size_t n) const override;
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

/// Sample mean of |w|^2 over the reference circle.
double reference_moment(double k, std::size_t n);

}  // namespace hyploop
