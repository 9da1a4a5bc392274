#include <immintrin.h>

#include <cmath>

#include "hyploop/simd/kernels.hpp"
#include "reduce_order.hpp"

namespace hyploop::simd {
namespace {

using detail::kLanes;
using detail::kLeafVectors;

void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}
void div(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] / b[i];
}
void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d l = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d r = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(l, r));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

template <class Load>
__m256d pairwise(Load load, std::size_t lo, std::size_t hi) {
  const std::size_t count = hi - lo;
  if (count <= kLeafVectors) {
    __m256d acc = load(lo);
    for (std::size_t v = lo + 1; v < hi; ++v) acc = _mm256_add_pd(acc, load(v));
    return acc;
  }
  const std::size_t mid = lo + count / 2;
  return _mm256_add_pd(pairwise(load, lo, mid), pairwise(load, mid, hi));
}

template <class Load, class Elem>
double lane_sum(Load load, Elem elem, std::size_t n) {
  const std::size_t nv = n / kLanes;
  double total = 0.0;
  if (nv > 0) {
    alignas(32) double l[4];
    _mm256_store_pd(l, pairwise(load, 0, nv));
    total = (l[0] + l[1]) + (l[2] + l[3]);
  }
  for (std::size_t i = nv * kLanes; i < n; ++i) total += elem(i);
  return total;
}

double sum(const double* a, std::size_t n) {
  auto load = [a](std::size_t v) { return _mm256_loadu_pd(a + v * kLanes); };
  return lane_sum(load, [a](std::size_t i) { return a[i]; }, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  auto load = [a, b](std::size_t v) {
    return _mm256_mul_pd(_mm256_loadu_pd(a + v * kLanes), _mm256_loadu_pd(b + v * kLanes));
  };
  return lane_sum(load, [a, b](std::size_t i) { return a[i] * b[i]; }, n);
}

double power(std::size_t m, int order) {
  double f = 1.0;
  for (int p = 0; p < order; ++p) f *= static_cast<double>(m);
  return f;
}

void spectral_derivative(const double* in, double* out, std::size_t modes, int order,
                         std::size_t nyquist) {
  const int quarter = ((order % 4) + 4) % 4;
  // Two complex coefficients per register: [re0, im0, re1, im1].
  std::size_t m = 0;
  for (; m + 2 <= modes; m += 2) {
    const double f0 = power(m, order);
    const double f1 = power(m + 1, order);
    __m256d v = _mm256_loadu_pd(in + 2 * m);
    __m256d scale;
    switch (quarter) {
      case 0: scale = _mm256_setr_pd(f0, f0, f1, f1); break;
      case 1:
        v = _mm256_permute_pd(v, 0b0101);
        scale = _mm256_setr_pd(-f0, f0, -f1, f1);
        break;
      case 2: scale = _mm256_setr_pd(-f0, -f0, -f1, -f1); break;
      default:
        v = _mm256_permute_pd(v, 0b0101);
        scale = _mm256_setr_pd(f0, -f0, f1, -f1);
        break;
    }
    _mm256_storeu_pd(out + 2 * m, _mm256_mul_pd(scale, v));
    // Literal zeros: the product would carry a sign.
    if ((order & 1) && (m == nyquist || m + 1 == nyquist)) {
      out[2 * nyquist] = 0.0;
      out[2 * nyquist + 1] = 0.0;
    }
  }
  if (m < modes) {
    if ((order & 1) && m == nyquist) {
      out[2 * m] = 0.0;
      out[2 * m + 1] = 0.0;
      return;
    }
    const double f = power(m, order);
    const double re = in[2 * m];
    const double im = in[2 * m + 1];
    switch (quarter) {
      case 0: out[2 * m] = f * re; out[2 * m + 1] = f * im; break;
      case 1: out[2 * m] = -f * im; out[2 * m + 1] = f * re; break;
      case 2: out[2 * m] = -f * re; out[2 * m + 1] = -f * im; break;
      default: out[2 * m] = f * im; out[2 * m + 1] = -f * re; break;
    }
  }
}

struct Loaded {
  __m256d y, dx, dy, ddx, ddy, c;
};

inline Loaded load(const ResidualArgs& a, std::size_t i) {
  return {_mm256_loadu_pd(a.y + i),   _mm256_loadu_pd(a.dx + i),  _mm256_loadu_pd(a.dy + i),
          _mm256_loadu_pd(a.ddx + i), _mm256_loadu_pd(a.ddy + i), _mm256_loadu_pd(a.curv + i)};
}

void hyp_residual(const ResidualArgs& a, double* jx, double* jy, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d len = _mm256_set1_pd(a.length);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const Loaded v = load(a, i);
    const __m256d inv = _mm256_div_pd(one, v.y);
    const __m256d gx = _mm256_mul_pd(_mm256_mul_pd(two, v.dx), v.dy);
    const __m256d gy = _mm256_sub_pd(_mm256_mul_pd(v.dy, v.dy), _mm256_mul_pd(v.dx, v.dx));
    const __m256d lc = _mm256_mul_pd(len, v.c);
    const __m256d ax =
        _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(inv, gx), v.ddx), _mm256_mul_pd(lc, v.dy));
    const __m256d ay =
        _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(inv, gy), v.ddy), _mm256_mul_pd(lc, v.dx));
    const __m256d inv2 = _mm256_mul_pd(inv, inv);
    _mm256_storeu_pd(jx + i, _mm256_mul_pd(inv2, ax));
    _mm256_storeu_pd(jy + i, _mm256_mul_pd(inv2, ay));
  }
  if (i < n) {
    ResidualArgs tail = a;
    tail.y += i; tail.dx += i; tail.dy += i; tail.ddx += i; tail.ddy += i; tail.curv += i;
    if (tail.x) tail.x += i;
    scalar_table().hyp_residual(tail, jx + i, jy + i, n - i);
  }
}

void euclid_residual(const ResidualArgs& a, double* jx, double* jy, std::size_t n) {
  const __m256d len = _mm256_set1_pd(a.length);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_loadu_pd(a.dx + i);
    const __m256d dy = _mm256_loadu_pd(a.dy + i);
    const __m256d lc = _mm256_mul_pd(len, _mm256_loadu_pd(a.curv + i));
    const __m256d nddx = _mm256_xor_pd(sign, _mm256_loadu_pd(a.ddx + i));
    const __m256d nddy = _mm256_xor_pd(sign, _mm256_loadu_pd(a.ddy + i));
    _mm256_storeu_pd(jx + i, _mm256_sub_pd(nddx, _mm256_mul_pd(lc, dy)));
    _mm256_storeu_pd(jy + i, _mm256_add_pd(nddy, _mm256_mul_pd(lc, dx)));
  }
  if (i < n) {
    ResidualArgs tail = a;
    tail.dx += i; tail.dy += i; tail.ddx += i; tail.ddy += i; tail.curv += i;
    if (tail.x) tail.x += i;
    if (tail.y) tail.y += i;
    scalar_table().euclid_residual(tail, jx + i, jy + i, n - i);
  }
}

void hyp_curvature(const ResidualArgs& a, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d y = _mm256_loadu_pd(a.y + i);
    const __m256d dx = _mm256_loadu_pd(a.dx + i);
    const __m256d dy = _mm256_loadu_pd(a.dy + i);
    const __m256d inv = _mm256_div_pd(one, y);
    const __m256d gx = _mm256_mul_pd(_mm256_mul_pd(two, dx), dy);
    const __m256d gy = _mm256_sub_pd(_mm256_mul_pd(dy, dy), _mm256_mul_pd(dx, dx));
    const __m256d ax = _mm256_sub_pd(_mm256_loadu_pd(a.ddx + i), _mm256_mul_pd(inv, gx));
    const __m256d ay = _mm256_sub_pd(_mm256_loadu_pd(a.ddy + i), _mm256_mul_pd(inv, gy));
    const __m256d num = _mm256_sub_pd(_mm256_mul_pd(ay, dx), _mm256_mul_pd(ax, dy));
    const __m256d s = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d den = _mm256_mul_pd(s, _mm256_sqrt_pd(s));
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_mul_pd(y, num), den));
  }
  if (i < n) {
    ResidualArgs tail = a;
    tail.y += i; tail.dx += i; tail.dy += i; tail.ddx += i; tail.ddy += i;
    if (tail.x) tail.x += i;
    if (tail.curv) tail.curv += i;
    scalar_table().hyp_curvature(tail, out + i, n - i);
  }
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Backend::avx2, add, sub, mul, div, axpby, sum, dot,
                                 spectral_derivative, hyp_residual, euclid_residual, hyp_curvature};
  return table;
}

}  // namespace hyploop::simd
