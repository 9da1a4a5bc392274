#include <array>
#include <cmath>

#include "hyploop/simd/kernels.hpp"
#include "reduce_order.hpp"

namespace hyploop::simd {
namespace {

using detail::kLanes;
using detail::kLeafVectors;
using Lanes = std::array<double, kLanes>;

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void div(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}
void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

template <class Load>
Lanes pairwise(Load load, std::size_t lo, std::size_t hi) {
  const std::size_t count = hi - lo;
  if (count <= kLeafVectors) {
    Lanes acc = load(lo);
    for (std::size_t v = lo + 1; v < hi; ++v) {
      const Lanes x = load(v);
      for (std::size_t l = 0; l < kLanes; ++l) acc[l] += x[l];
    }
    return acc;
  }
  const std::size_t mid = lo + count / 2;
  Lanes a = pairwise(load, lo, mid);
  const Lanes b = pairwise(load, mid, hi);
  for (std::size_t l = 0; l < kLanes; ++l) a[l] += b[l];
  return a;
}

template <class Load, class Elem>
double lane_sum(Load load, Elem elem, std::size_t n) {
  const std::size_t nv = n / kLanes;
  double total = 0.0;
  if (nv > 0) {
    const Lanes l = pairwise(load, 0, nv);
    total = (l[0] + l[1]) + (l[2] + l[3]);
  }
  for (std::size_t i = nv * kLanes; i < n; ++i) total += elem(i);
  return total;
}

double sum(const double* a, std::size_t n) {
  auto load = [a](std::size_t v) {
    const double* p = a + v * kLanes;
    return Lanes{p[0], p[1], p[2], p[3]};
  };
  return lane_sum(load, [a](std::size_t i) { return a[i]; }, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  auto load = [a, b](std::size_t v) {
    const double* p = a + v * kLanes;
    const double* q = b + v * kLanes;
    return Lanes{p[0] * q[0], p[1] * q[1], p[2] * q[2], p[3] * q[3]};
  };
  return lane_sum(load, [a, b](std::size_t i) { return a[i] * b[i]; }, n);
}

void spectral_derivative(const double* in, double* out, std::size_t modes, int order,
                         std::size_t nyquist) {
  const int quarter = ((order % 4) + 4) % 4;
  for (std::size_t m = 0; m < modes; ++m) {
    const double re = in[2 * m];
    const double im = in[2 * m + 1];
    if ((order & 1) && m == nyquist) {
      out[2 * m] = 0.0;
      out[2 * m + 1] = 0.0;
      continue;
    }
    double f = 1.0;
    for (int p = 0; p < order; ++p) f *= static_cast<double>(m);
    switch (quarter) {
      case 0: out[2 * m] = f * re; out[2 * m + 1] = f * im; break;
      case 1: out[2 * m] = -f * im; out[2 * m + 1] = f * re; break;
      case 2: out[2 * m] = -f * re; out[2 * m + 1] = -f * im; break;
      default: out[2 * m] = f * im; out[2 * m + 1] = -f * re; break;
    }
  }
}

void hyp_residual(const ResidualArgs& a, double* jx, double* jy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / a.y[i];
    const double gx = 2.0 * a.dx[i] * a.dy[i];
    const double gy = a.dy[i] * a.dy[i] - a.dx[i] * a.dx[i];
    const double lc = a.length * a.curv[i];
    const double ax = inv * gx - a.ddx[i] - lc * a.dy[i];
    const double ay = inv * gy - a.ddy[i] + lc * a.dx[i];
    const double inv2 = inv * inv;
    jx[i] = inv2 * ax;
    jy[i] = inv2 * ay;
  }
}

void euclid_residual(const ResidualArgs& a, double* jx, double* jy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double lc = a.length * a.curv[i];
    jx[i] = -a.ddx[i] - lc * a.dy[i];
    jy[i] = -a.ddy[i] + lc * a.dx[i];
  }
}

void hyp_curvature(const ResidualArgs& a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / a.y[i];
    const double gx = 2.0 * a.dx[i] * a.dy[i];
    const double gy = a.dy[i] * a.dy[i] - a.dx[i] * a.dx[i];
    const double ax = a.ddx[i] - inv * gx;
    const double ay = a.ddy[i] - inv * gy;
    const double num = ay * a.dx[i] - ax * a.dy[i];
    const double s = a.dx[i] * a.dx[i] + a.dy[i] * a.dy[i];
    const double den = s * std::sqrt(s);
    out[i] = a.y[i] * num / den;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::scalar, add, sub, mul, div, axpby, sum, dot,
                                 spectral_derivative, hyp_residual, euclid_residual, hyp_curvature};
  return table;
}

}  // namespace hyploop::simd
