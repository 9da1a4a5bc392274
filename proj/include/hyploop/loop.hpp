#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hyploop/vec2.hpp"

namespace hyploop {

/// Sampled vector field on the circle, x/y components stored separately.
struct VecField {
  std::vector<double> x;
  std::vector<double> y;

  VecField() = default;
  explicit VecField(std::size_t n) : x(n, 0.0), y(n, 0.0) {}
  VecField(std::vector<double> xs, std::vector<double> ys);

  std::size_t size() const noexcept { return x.size(); }
  Vec2 operator[](std::size_t j) const { return {x[j], y[j]}; }
  void set(std::size_t j, Vec2 v) { x[j] = v.x; y[j] = v.y; }

  static VecField constant(std::size_t n, Vec2 v);

  VecField& operator+=(const VecField& o);
  VecField& operator-=(const VecField& o);
  VecField& operator*=(double s);
  /// this += s * o
  VecField& add_scaled(double s, const VecField& o);
};

VecField operator+(VecField a, const VecField& b);
VecField operator-(VecField a, const VecField& b);
VecField operator*(double s, VecField a);

/// Mean over the circle of a sampled scalar (uniform average).
double mean(std::span<const double> f);
/// L2 mean inner product of two sampled fields.
double mean_dot(const VecField& a, const VecField& b);
double sup_norm(const VecField& a);
double l2_norm(const VecField& a);

/// Parameter value theta_j = 2 pi j / n.
double sample_angle(std::size_t j, std::size_t n);

/// Closed curve stored as N uniform samples on the circle with cached spectral
/// first and second derivatives. N must be a power of two. Immutable.
class Loop {
 public:
  Loop(std::vector<double> x, std::vector<double> y);
  explicit Loop(const VecField& samples);

  /// Samples theta -> f(theta) at theta_j.
  static Loop sample(std::size_t n, const std::function<Vec2(double)>& f);

  std::size_t size() const noexcept { return x_.size(); }

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::span<const double> dx() const noexcept { return dx_; }
  std::span<const double> dy() const noexcept { return dy_; }
  std::span<const double> ddx() const noexcept { return ddx_; }
  std::span<const double> ddy() const noexcept { return ddy_; }

  Vec2 point(std::size_t j) const { return {x_[j], y_[j]}; }
  Vec2 velocity(std::size_t j) const { return {dx_[j], dy_[j]}; }
  Vec2 acceleration(std::size_t j) const { return {ddx_[j], ddy_[j]}; }

  VecField points() const { return {x_, y_}; }
  VecField velocities() const { return {dx_, dy_}; }
  VecField accelerations() const { return {ddx_, ddy_}; }

  /// All samples have second coordinate > 0.
  bool hyperbolic_valid() const;

  /// Parameter rotation u o xi: theta -> u(theta + alpha).
  Loop rotated(double alpha) const;
  /// Spectrally interpolated copy on m >= N samples (or truncated for m < N).
  Loop resampled(std::size_t m) const;
  /// Euclidean translation by a constant vector.
  Loop shifted(Vec2 offset) const;
  /// Pointwise sum with a perturbation field.
  Loop perturbed(const VecField& eta) const;

 private:
  void compute_derivatives();

  std::vector<double> x_, y_;
  std::vector<double> dx_, dy_, ddx_, ddy_;
};

/// Max over samples of |u - v|, |u' - v'| and |u'' - v''|.
struct LoopDistance {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};
LoopDistance loop_distance(const Loop& u, const Loop& v);

}  // namespace hyploop
