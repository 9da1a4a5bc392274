#include "hyploop/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "hyploop/errors.hpp"

namespace hyploop::quad {
namespace {

Rule build_rule(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

double apply(const Rule& r, const std::function<double(double)>& f, double a, double b) {
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
  return h * s;
}

double adapt(const Rule& r, const std::function<double(double)>& f, double a, double b, double whole,
             double tol, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double left = apply(r, f, a, m);
  const double right = apply(r, f, m, b);
  if (std::abs(left + right - whole) <= tol) return left + right;
  if (depth >= max_depth) throw QuadratureFailure("adaptive quadrature exceeded its depth limit");
  return adapt(r, f, a, m, left, 0.5 * tol, depth + 1, max_depth) +
         adapt(r, f, m, b, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

const Rule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("quadrature order must be positive");
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  const Rule& r = gauss_legendre(15);
  return adapt(r, f, a, b, apply(r, f, a, b), abs_tol, 0, max_depth);
}

DiskRule disk_rule(double radius, int radial, int angular) {
  if (!(radius > 0.0) || radial < 1 || angular < 1) throw DomainError("invalid disk rule parameters");
  const Rule& r = gauss_legendre(radial);
  DiskRule d;
  d.points.reserve(static_cast<std::size_t>(radial) * angular);
  d.weights.reserve(d.points.capacity());
  const double dt = 2.0 * std::numbers::pi / angular;
  for (int i = 0; i < radial; ++i) {
    const double rho = 0.5 * radius * (r.nodes[i] + 1.0);
    const double w = 0.5 * radius * r.weights[i] * rho * dt;
    for (int j = 0; j < angular; ++j) {
      const double t = dt * j;
      d.points.push_back({rho * std::cos(t), rho * std::sin(t)});
      d.weights.push_back(w);
    }
  }
  return d;
}

}  // namespace hyploop::quad
