#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hyploop/geometry.hpp"
#include "hyploop/loop.hpp"

namespace hyploop {

// Linearization of the constant-curvature residual at the reference circle.
// Fields along the circle are written in the moving frame (w', i w'), w the
// reference loop; a frame field g holds the two coordinates (g.x, g.y).

/// B g = -g'' - kR i g' + R^2 (g2 - k^2 mean g2) e2, R = reference_radius(k).
VecField apply_B(const VecField& g, double k);

/// g -> g1 w' + g2 i w'.
VecField phi(const VecField& g, double k);
/// Inverse of phi: R^-2 w2^-2 (f . w', f . i w').
VecField phi_inv(const VecField& f, double k);

/// Derivative of the constant-curvature residual at the translated circle w_z,
/// computed as z2^-2 w2^-2 phi(B phi^-1 f).
VecField apply_J0prime(const HyperPoint& z, const VecField& f, double k);

/// Kernel of B: e1, gamma = (k cos, -sin / R) and gamma'.
std::array<VecField, 3> kernel_B(double k, std::size_t n);
/// Tangent directions of the circle family at w_z: w', e1 and w (all sampled
/// on the circle w itself; they do not depend on z).
std::array<VecField, 3> tangent_space(double k, std::size_t n);

/// Fourier block of B at frequency m for sample count n, acting on
/// (Re c1, Im c1, Re c2, Im c2) of the coefficients of exp(i m theta). At
/// m = 0 and m = n/2 only the real parts survive and the block is 2 x 2.
struct BModeBlock {
  int mode = 0;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd pseudo_inverse;   // built with the global zero threshold
  int zero_count = 0;
};

/// All blocks for n samples. The zero threshold is 1e-9 times the largest
/// singular value over all blocks.
std::vector<BModeBlock> mode_blocks(double k, std::size_t n);

/// Minimum-norm solution of B g = f. Throws NotOrthogonal when a normalized
/// projection of f onto the kernel exceeds tol.
VecField solve_B(const VecField& f, double k, double tol = 1e-9);

/// Solution of J0'(w_z) f = rhs that is L2-orthogonal to the tangent space.
/// rhs must itself be orthogonal to the tangent space (NotOrthogonal otherwise).
VecField solve_J0prime(const HyperPoint& z, const VecField& rhs, double k, double tol = 1e-9);

struct KernelReport {
  double k = 0.0;
  std::size_t samples = 0;
  int dimension = 0;
  double sigma_max = 0.0;
  double sigma_min_nonzero = 0.0;
  std::vector<int> zero_modes;           // mode index of each zero singular value
  std::array<VecField, 3> basis;         // numerical kernel, orthonormal in L2
  double max_principal_angle = 0.0;      // against span{e1, gamma, gamma'}
  std::vector<BModeBlock> blocks;
};

KernelReport kernel_report(double k, std::size_t n = 256);

/// L2-orthogonal projection onto the complement of span(dirs).
VecField project_out(const VecField& f, const std::array<VecField, 3>& dirs);

}  // namespace hyploop
