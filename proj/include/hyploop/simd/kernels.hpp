#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// where the build supports it, an AVX2 version. The two are required to agree
// bit for bit: elementwise kernels only use correctly rounded IEEE operations
// (no FMA contraction) and reductions follow the same four-lane pairwise order.

namespace hyploop::simd {

enum class Backend { scalar, avx2 };

/// Inputs of the pointwise residual kernels. All arrays have length n.
struct ResidualArgs {
  const double* x;    // u1
  const double* y;    // u2
  const double* dx;   // u1'
  const double* dy;   // u2'
  const double* ddx;  // u1''
  const double* ddy;  // u2''
  const double* curv; // prescribed curvature k + eps K(u) at each sample
  double length;      // L(u)
};

struct KernelTable {
  Backend backend;

  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*div)(const double* a, const double* b, double* out, std::size_t n);
  /// out = a * x + b * y
  void (*axpby)(double a, const double* x, double b, const double* y, double* out, std::size_t n);

  /// Four-lane pairwise sum.
  double (*sum)(const double* a, std::size_t n);
  /// Four-lane pairwise sum of a[i] * b[i].
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// Multiply interleaved complex coefficients c_m (m = 0..modes-1) by (i m)^order.
  /// Odd orders zero the coefficient with index `nyquist` (pass modes to disable).
  void (*spectral_derivative)(const double* in, double* out, std::size_t modes, int order,
                              std::size_t nyquist);

  /// Hyperbolic residual u2^-2 (-u'' + u2^-1 Gamma(u') + L c i u').
  void (*hyp_residual)(const ResidualArgs& a, double* jx, double* jy, std::size_t n);
  /// Euclidean residual -u'' + L c i u' (x, y, curv unused beyond curv).
  void (*euclid_residual)(const ResidualArgs& a, double* jx, double* jy, std::size_t n);
  /// Geodesic curvature u2 (u'' - u2^-1 Gamma(u')) . i u' / |u'|^3.
  void (*hyp_curvature)(const ResidualArgs& a, double* out, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the CPU or the build lacks AVX2.
const KernelTable* avx2_table();

/// Table used by the library. Chosen once: AVX2 when available, unless the
/// environment variable HYPLOOP_SIMD=scalar is set.
const KernelTable& active();
void set_backend(Backend b);
std::string_view backend_name(Backend b);

}  // namespace hyploop::simd
