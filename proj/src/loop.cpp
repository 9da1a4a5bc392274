#include "hyploop/loop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hyploop/errors.hpp"
#include "hyploop/simd/kernels.hpp"
#include "hyploop/spectral.hpp"

namespace hyploop {

VecField::VecField(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
  if (x.size() != y.size()) throw DomainError("vector field components differ in length");
}

VecField VecField::constant(std::size_t n, Vec2 v) {
  return {std::vector<double>(n, v.x), std::vector<double>(n, v.y)};
}

VecField& VecField::operator+=(const VecField& o) {
  const auto& k = simd::active();
  k.add(x.data(), o.x.data(), x.data(), size());
  k.add(y.data(), o.y.data(), y.data(), size());
  return *this;
}

VecField& VecField::operator-=(const VecField& o) {
  const auto& k = simd::active();
  k.sub(x.data(), o.x.data(), x.data(), size());
  k.sub(y.data(), o.y.data(), y.data(), size());
  return *this;
}

VecField& VecField::operator*=(double s) {
  const auto& k = simd::active();
  k.axpby(s, x.data(), 0.0, x.data(), x.data(), size());
  k.axpby(s, y.data(), 0.0, y.data(), y.data(), size());
  return *this;
}

VecField& VecField::add_scaled(double s, const VecField& o) {
  const auto& k = simd::active();
  k.axpby(1.0, x.data(), s, o.x.data(), x.data(), size());
  k.axpby(1.0, y.data(), s, o.y.data(), y.data(), size());
  return *this;
}

VecField operator+(VecField a, const VecField& b) { return a += b; }
VecField operator-(VecField a, const VecField& b) { return a -= b; }
VecField operator*(double s, VecField a) { return a *= s; }

double mean(std::span<const double> f) {
  return simd::active().sum(f.data(), f.size()) / static_cast<double>(f.size());
}

double mean_dot(const VecField& a, const VecField& b) {
  const auto& k = simd::active();
  const double s = k.dot(a.x.data(), b.x.data(), a.size()) + k.dot(a.y.data(), b.y.data(), a.size());
  return s / static_cast<double>(a.size());
}

double sup_norm(const VecField& a) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max({m, std::abs(a.x[j]), std::abs(a.y[j])});
  return m;
}

double l2_norm(const VecField& a) { return std::sqrt(mean_dot(a, a)); }

double sample_angle(std::size_t j, std::size_t n) {
  return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
}

Loop::Loop(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) throw DomainError("loop components differ in length");
  if (!spectral::is_power_of_two(x_.size()) || x_.size() < 8)
    throw DomainError("loop sample count must be a power of two >= 8");
  for (std::size_t j = 0; j < x_.size(); ++j)
    if (!std::isfinite(x_[j]) || !std::isfinite(y_[j])) throw DomainError("loop sample is not finite");
  compute_derivatives();
}

Loop::Loop(const VecField& samples) : Loop(samples.x, samples.y) {}

Loop Loop::sample(std::size_t n, const std::function<Vec2(double)>& f) {
  std::vector<double> x(n), y(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 p = f(sample_angle(j, n));
    x[j] = p.x;
    y[j] = p.y;
  }
  return Loop(std::move(x), std::move(y));
}

void Loop::compute_derivatives() {
  spectral::derivatives(x_, dx_, ddx_);
  spectral::derivatives(y_, dy_, ddy_);
}

bool Loop::hyperbolic_valid() const {
  return std::all_of(y_.begin(), y_.end(), [](double v) { return v > 0.0; });
}

Loop Loop::rotated(double alpha) const { return Loop(spectral::shift(x_, alpha), spectral::shift(y_, alpha)); }

Loop Loop::resampled(std::size_t m) const {
  return Loop(spectral::resample(x_, m), spectral::resample(y_, m));
}

Loop Loop::shifted(Vec2 offset) const {
  std::vector<double> x = x_, y = y_;
  for (auto& v : x) v += offset.x;
  for (auto& v : y) v += offset.y;
  return Loop(std::move(x), std::move(y));
}

Loop Loop::perturbed(const VecField& eta) const {
  if (eta.size() != size()) throw DomainError("perturbation size does not match loop");
  std::vector<double> x(size()), y(size());
  const auto& k = simd::active();
  k.add(x_.data(), eta.x.data(), x.data(), size());
  k.add(y_.data(), eta.y.data(), y.data(), size());
  return Loop(std::move(x), std::move(y));
}

LoopDistance loop_distance(const Loop& u, const Loop& v) {
  if (u.size() != v.size()) throw DomainError("loops have different sample counts");
  LoopDistance d;
  for (std::size_t j = 0; j < u.size(); ++j) {
    d.c0 = std::max(d.c0, norm(u.point(j) - v.point(j)));
    d.c1 = std::max(d.c1, norm(u.velocity(j) - v.velocity(j)));
    d.c2 = std::max(d.c2, norm(u.acceleration(j) - v.acceleration(j)));
  }
  return d;
}

}  // namespace hyploop
