#include "hyploop/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "hyploop/errors.hpp"
#include "hyploop/simd/kernels.hpp"

namespace hyploop::spectral {
namespace {

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// Planning is not thread-safe in FFTW; execution through the new-array
// interface is, so plans are created once per size under a lock.
const Plans& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, Plans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> real(n);
  std::vector<fftw_complex> cplx(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p;
  p.r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cplx.data(), flags);
  p.c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx.data(), real.data(), flags);
  return cache.emplace(n, p).first->second;
}

void check_size(std::size_t n) {
  if (!is_power_of_two(n)) throw DomainError("sample count must be a power of two >= 2");
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

Coeffs forward_unnormalized(std::span<const double> f) {
  Coeffs c(f.size() / 2 + 1);
  // r2c never writes its input, but the interface is not const.
  fftw_execute_dft_r2c(plans_for(f.size()).r2c, const_cast<double*>(f.data()), as_fftw(c.data()));
  return c;
}

std::vector<double> inverse_raw(Coeffs c, std::size_t n) {
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plans_for(n).c2r, as_fftw(c.data()), out.data());
  return out;
}

void chop(Coeffs& c) {
  double peak = 0.0;
  for (const auto& v : c) peak = std::max(peak, std::abs(v));
  const double floor = 8.0 * DBL_EPSILON * peak;
  for (auto& v : c)
    if (std::abs(v) < floor) v = 0.0;
}

std::vector<double> differentiate(const Coeffs& c, std::size_t n, int order) {
  Coeffs d(c.size());
  simd::active().spectral_derivative(reinterpret_cast<const double*>(c.data()),
                                     reinterpret_cast<double*>(d.data()), c.size(), order, n / 2);
  return inverse_raw(std::move(d), n);
}

}  // namespace

Coeffs forward(std::span<const double> f) {
  check_size(f.size());
  Coeffs c = forward_unnormalized(f);
  const double scale = 1.0 / static_cast<double>(f.size());
  for (auto& v : c) v *= scale;
  return c;
}

std::vector<double> inverse(const Coeffs& c, std::size_t n) {
  check_size(n);
  if (c.size() != n / 2 + 1) throw DomainError("coefficient count does not match sample count");
  return inverse_raw(c, n);
}

std::vector<double> derivative(std::span<const double> f, int order) {
  Coeffs c = forward(f);
  chop(c);
  return differentiate(c, f.size(), order);
}

void derivatives(std::span<const double> f, std::vector<double>& d1, std::vector<double>& d2) {
  Coeffs c = forward(f);
  chop(c);
  d1 = differentiate(c, f.size(), 1);
  d2 = differentiate(c, f.size(), 2);
}

std::vector<double> resample(std::span<const double> f, std::size_t m) {
  check_size(m);
  const std::size_t n = f.size();
  Coeffs c = forward(f);
  Coeffs out(m / 2 + 1, 0.0);
  if (m >= n) {
    for (std::size_t k = 0; k < n / 2; ++k) out[k] = c[k];
    // The Nyquist term cos(n theta / 2) splits evenly between +-n/2 on the finer grid.
    out[n / 2] = m > n ? 0.5 * c[n / 2] : c[n / 2];
  } else {
    for (std::size_t k = 0; k < m / 2; ++k) out[k] = c[k];
    out[m / 2] = 2.0 * c[m / 2].real();
  }
  return inverse_raw(std::move(out), m);
}

std::vector<double> shift(std::span<const double> f, double alpha) {
  const std::size_t n = f.size();
  Coeffs c = forward(f);
  for (std::size_t k = 0; k < n / 2; ++k)
    c[k] *= std::polar(1.0, static_cast<double>(k) * alpha);
  c[n / 2] *= std::cos(static_cast<double>(n / 2) * alpha);
  return inverse_raw(std::move(c), n);
}

double evaluate(const Coeffs& c, std::size_t n, double theta) {
  double v = c[0].real();
  for (std::size_t k = 1; k < n / 2; ++k)
    v += 2.0 * (c[k] * std::polar(1.0, static_cast<double>(k) * theta)).real();
  v += c[n / 2].real() * std::cos(static_cast<double>(n / 2) * theta);
  return v;
}

}  // namespace hyploop::spectral
