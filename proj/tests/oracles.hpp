#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>

#include "hyploop/loop.hpp"

// Independent helpers for the tests. Nothing here calls into the library's
// spectral or quadrature code, so values computed with them can serve as
// references.
namespace oracle {

using hyploop::Loop;
using hyploop::Vec2;
using hyploop::VecField;

constexpr double pi = std::numbers::pi;

/// Closed form of the reference circle of curvature k, evaluated directly.
inline Vec2 circle(double k, double t) {
  const double r = 1.0 / std::sqrt(k * k - 1.0);
  return {std::cos(t) / (k - std::sin(t)), (1.0 / r) / (k - std::sin(t))};
}

/// Trigonometric polynomial with a few random modes around a base ellipse,
/// kept in the upper half-plane. Derivatives are available in closed form.
struct BandLimited {
  Vec2 center{0.0, 2.0};
  double ax = 0.7, ay = 0.5;
  int modes = 4;
  std::vector<double> cx, sx, cy, sy;  // mode m = 2..modes

  static BandLimited random(std::mt19937_64& rng, int modes = 4, double amp = 0.03) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BandLimited b;
    b.center = {u(rng), 2.0 + 0.5 * u(rng)};
    b.ax = 0.6 + 0.2 * u(rng);
    b.ay = 0.5 + 0.2 * u(rng);
    b.modes = modes;
    for (int m = 2; m <= modes; ++m) {
      b.cx.push_back(amp * u(rng));
      b.sx.push_back(amp * u(rng));
      b.cy.push_back(amp * u(rng));
      b.sy.push_back(amp * u(rng));
    }
    return b;
  }

  // d-th derivative at t.
  Vec2 eval(double t, int d = 0) const {
    auto dcos = [&](double m) {
      switch (d % 4) {
        case 0: return std::pow(m, d) * std::cos(m * t);
        case 1: return -std::pow(m, d) * std::sin(m * t);
        case 2: return -std::pow(m, d) * std::cos(m * t);
        default: return std::pow(m, d) * std::sin(m * t);
      }
    };
    auto dsin = [&](double m) {
      switch (d % 4) {
        case 0: return std::pow(m, d) * std::sin(m * t);
        case 1: return std::pow(m, d) * std::cos(m * t);
        case 2: return -std::pow(m, d) * std::sin(m * t);
        default: return -std::pow(m, d) * std::cos(m * t);
      }
    };
    Vec2 v = d == 0 ? center : Vec2{0.0, 0.0};
    v.x += ax * dcos(1.0);
    v.y += ay * dsin(1.0);
    for (int m = 2; m <= modes; ++m) {
      const std::size_t i = static_cast<std::size_t>(m - 2);
      v.x += cx[i] * dcos(m) + sx[i] * dsin(m);
      v.y += cy[i] * dcos(m) + sy[i] * dsin(m);
    }
    return v;
  }

  Loop loop(std::size_t n) const {
    return Loop::sample(n, [this](double t) { return eval(t); });
  }
};

/// Random band-limited vector field with modes 0..modes.
inline VecField random_field(std::mt19937_64& rng, std::size_t n, int modes = 6) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(4 * static_cast<std::size_t>(modes + 1));
  for (auto& v : a) v = u(rng);
  VecField f(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = 2.0 * pi * static_cast<double>(j) / static_cast<double>(n);
    double x = 0.0, y = 0.0;
    for (int m = 0; m <= modes; ++m) {
      const std::size_t i = 4 * static_cast<std::size_t>(m);
      x += a[i] * std::cos(m * t) + a[i + 1] * std::sin(m * t);
      y += a[i + 2] * std::cos(m * t) + a[i + 3] * std::sin(m * t);
    }
    f.set(j, {x, y});
  }
  return f;
}

/// Plain sample average.
inline double avg(const std::vector<double>& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s / static_cast<double>(f.size());
}

inline double inner(const VecField& a, const VecField& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a.x[j] * b.x[j] + a.y[j] * b.y[j];
  return s / static_cast<double>(a.size());
}

inline double sup(const VecField& a) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s = std::max(s, std::hypot(a.x[j], a.y[j]));
  return s;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Central difference of a scalar function.
inline double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
