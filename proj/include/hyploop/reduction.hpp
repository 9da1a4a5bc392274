#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hyploop/functionals.hpp"
#include "hyploop/loop.hpp"
#include "hyploop/melnikov.hpp"
#include "hyploop/model.hpp"

namespace hyploop {

struct ReduceOptions {
  /// Target for the sup norm of the full system. The effective target is
  /// max(tol, 2 x the computed J_0 at the circle), which is pure rounding.
  double tol = 1e-11;
  int max_iter = 30;
  int gmres_restart = 40;
  int gmres_max = 120;
  double gmres_rtol = 1e-9;
};

/// Unknowns of the reduced problem at fixed (eps, z): correction eta
/// orthogonal to the tangent space and multipliers t (rotation) and theta
/// (translations), with the residual of the last evaluation.
struct ReductionState {
  double eps = 0.0;
  Vec2 z;
  VecField eta;
  double t = 0.0;
  Vec2 theta;
  double residual_sup = 0.0;                 // sup |J_eps(w_z + eta) - t tau0 - theta1 tau1 - theta2 tau2|
  std::array<double, 3> constraint_res{};    // mean eta . tau_i
  double noise_floor = 0.0;                  // sup |J_0(w_z)|, zero up to rounding
  int iterations = 0;
  bool converged = false;
  bool at_floor = false;                     // stopped by stagnation at the rounding floor
};

/// Newton iteration on (eta, t, theta); linear steps by GMRES with the exact
/// inverse of the frozen linearization at (eta, t, theta) = 0 as right
/// preconditioner and central finite-difference Jacobian-vector products.
/// warm supplies an initial guess for (eta, t, theta). Throws NewtonDiverged
/// or StepTooLarge.
ReductionState reduce_at(const LoopModel& model, double eps, Vec2 z, std::size_t n,
                         const ReductionState* warm = nullptr, const ReduceOptions& opt = {});
/// Half-plane convenience form.
ReductionState reduce_at(double eps, const HyperPoint& z, double k, const FieldExpr& field, std::size_t n = 256);

/// w_z + eta.
Loop reduced_loop(const LoopModel& model, const ReductionState& s);

/// (2 pi / eps) (E(u) - E_k(w)). eps must be nonzero.
double reduced_energy_G(const LoopModel& model, const ReductionState& s);
/// Gradient in z of the energy of the reduced loop, from the multipliers.
Vec2 reduced_grad(const LoopModel& model, const ReductionState& s);

struct SolveOptions {
  std::size_t n = 256;
  int grid = 32;
  int threads = 1;  // Melnikov grid scan only
  ReduceOptions reduce;
  double theta_tol = 1e-12;
  int max_center_iter = 30;
};

struct SolveReport {
  Loop loop;
  VerifyReport verify;
  ReductionState state;
  Vec2 seed;        // critical point of the Melnikov function used as start
  Vec2 z_critical;  // critical point of the reduced energy
  double eps = 0.0;
  int center_iterations = 0;
  LoopDistance to_seed_circle;    // against w_seed
  LoopDistance to_center_circle;  // against w_z_critical
  /// mean w(u) K(u) X(u) . i u' for X = e1 and X = u (necessary conditions).
  std::array<double, 2> necessary{};
};

/// Critical point of the reduced energy by Newton on reduced_grad, started at
/// seed. Throws NewtonDiverged, StepTooLarge or NotEmbedded.
SolveReport solve_from(const LoopModel& model, double eps, Vec2 seed, const SolveOptions& opt = {},
                       const ReductionState* warm = nullptr);

/// Seed from the first nondegenerate Melnikov critical point in the box
/// (NoCritical if there is none), then solve_from.
SolveReport solve_full(const LoopModel& model, double eps, const RegionBox& box, const SolveOptions& opt = {});

struct ContinuationResult {
  std::vector<SolveReport> reports;
  double eps_bar = 0.0;  // largest |eps| reached
  bool truncated = false;
  double failed_eps = 0.0;
  std::string failure;
};

/// Warm-started chain over eps sorted by |eps|; stops at the first failure.
ContinuationResult continue_eps(const LoopModel& model, const RegionBox& box, std::vector<double> eps_targets,
                                const SolveOptions& opt = {});

}  // namespace hyploop
