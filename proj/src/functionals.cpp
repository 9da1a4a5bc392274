#include "hyploop/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hyploop/errors.hpp"
#include "hyploop/quadrature.hpp"
#include "hyploop/simd/kernels.hpp"

namespace hyploop {
namespace {

void require_upper(const Loop& u) {
  if (!u.hyperbolic_valid()) throw DomainError("loop leaves the half-plane");
}

void require_moving(const Loop& u) {
  double speed = 0.0, size = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    speed = std::max(speed, norm(u.velocity(j)));
    size = std::max(size, norm(u.point(j)));
  }
  if (!(speed > 1e-12 * std::max(size, 1.0))) throw DegenerateLoop("loop is numerically constant");
}

// Potential components for the perturbed area term.
double horizontal_part(const FieldExpr& k, Vec2 z) {
  return quad::integrate([&](double t) { return k.eval(t, z.y); }, 0.0, z.x) / (z.y * z.y);
}

double vertical_part(const FieldExpr& k, Vec2 z) {
  return quad::integrate([&](double t) { return k.eval(z.x, t) / (t * t); }, 1.0, z.y);
}

Vec2 potential(const FieldExpr& k, Gauge g, Vec2 z) {
  switch (g) {
    case Gauge::horizontal: return {horizontal_part(k, z), 0.0};
    case Gauge::vertical: return {0.0, vertical_part(k, z)};
    case Gauge::split: break;
  }
  return {0.5 * horizontal_part(k, z), 0.5 * vertical_part(k, z)};
}

// Segment intersection with shared endpoints excluded by the caller.
bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on = [](Vec2 p, Vec2 q, Vec2 r, double s) {
    return s == 0.0 && std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  return on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4);
}

std::vector<Vec2> refined_polyline(const Loop& u) {
  const Loop fine = u.resampled(4 * u.size());
  std::vector<Vec2> p(fine.size());
  for (std::size_t j = 0; j < fine.size(); ++j) p[j] = fine.point(j);
  return p;
}

}  // namespace

Vec2 reference_point(double k, double theta) {
  const double r = reference_radius(k);
  const double s = 1.0 / (k - std::sin(theta));
  return {std::cos(theta) * s, s / r};
}

Vec2 reference_velocity(double k, double theta) {
  const double r = reference_radius(k);
  const double c = std::cos(theta), sn = std::sin(theta);
  const double s = 1.0 / (k - sn);
  return {(1.0 - k * sn) * s * s, c * s * s / r};
}

Loop reference_loop(double k, std::size_t n) {
  reference_radius(k);
  return Loop::sample(n, [k](double t) { return reference_point(k, t); });
}

Loop reference_loop(double k, const HyperPoint& z, std::size_t n) {
  reference_radius(k);
  return Loop::sample(n, [k, &z](double t) { return translate(z, reference_point(k, t)); });
}

double length_L(const Loop& u) {
  require_upper(u);
  require_moving(u);
  const std::size_t n = u.size();
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double inv = 1.0 / u.y()[j];
    w[j] = (u.dx()[j] * u.dx()[j] + u.dy()[j] * u.dy()[j]) * (inv * inv);
  }
  return std::sqrt(mean(w));
}

double area_A1(const Loop& u) {
  require_upper(u);
  std::vector<double> w(u.size());
  simd::active().div(u.dx().data(), u.y().data(), w.data(), u.size());
  return -mean(w);
}

double area_AK(const Loop& u, const FieldExpr& k, Gauge gauge) {
  require_upper(u);
  std::vector<double> w(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) w[j] = dot(potential(k, gauge, u.point(j)), rot(u.velocity(j)));
  return mean(w);
}

EnergyBreakdown energy(const Loop& u, double k, double eps, const FieldExpr& field) {
  EnergyBreakdown e;
  e.length_part = length_L(u);
  e.const_area_part = k * area_A1(u);
  e.pert_area_part = eps != 0.0 ? area_AK(u, field) : 0.0;
  e.total = e.length_part + e.const_area_part + eps * e.pert_area_part;
  return e;
}

std::vector<double> prescribed_curvature(const Loop& u, double k, double eps, const FieldExpr& field) {
  std::vector<double> c(u.size(), k);
  if (eps != 0.0) {
    std::vector<double> kv(u.size());
    field.eval_batch(u.x(), u.y(), kv);
    simd::active().axpby(1.0, c.data(), eps, kv.data(), c.data(), u.size());
  }
  return c;
}

VecField residual_J(const Loop& u, double k, double eps, const FieldExpr& field) {
  const double len = length_L(u);
  const auto curv = prescribed_curvature(u, k, eps, field);
  VecField j(u.size());
  const simd::ResidualArgs args{u.x().data(),   u.y().data(),   u.dx().data(), u.dy().data(),
                                u.ddx().data(), u.ddy().data(), curv.data(),   len};
  simd::active().hyp_residual(args, j.x.data(), j.y.data(), u.size());
  return j;
}

int winding_number(const Loop& u) {
  const auto p = refined_polyline(u);
  Vec2 c{};
  for (Vec2 q : p) c += q;
  c *= 1.0 / static_cast<double>(p.size());
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const Vec2 a = p[j] - c;
    const Vec2 b = p[(j + 1) % p.size()] - c;
    total += std::atan2(cross(a, b), dot(a, b));
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

bool is_embedded(const Loop& u) {
  const auto p = refined_polyline(u);
  const std::size_t m = p.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = p[i], b = p[(i + 1) % m];
    // Skip the segment itself and its two neighbours.
    for (std::size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;
      if (segments_cross(a, b, p[j], p[(j + 1) % m])) return false;
    }
  }
  return true;
}

VerifyReport verify_solution(const Loop& u, double k, double eps, const FieldExpr& field) {
  VerifyReport r;
  r.winding = winding_number(u);
  r.embedded = is_embedded(u);
  std::vector<double> kappa;
  try {
    r.length = length_L(u);
    kappa = geodesic_curvature(u);
  } catch (const DegenerateLoop&) {
    r.regular = false;
    const double inf = std::numeric_limits<double>::infinity();
    r.residual_sup = r.speed_defect = r.curvature_defect = inf;
    r.killing = {inf, inf, inf};
    return r;
  }
  r.residual_sup = sup_norm(residual_J(u, k, eps, field));
  const auto curv = prescribed_curvature(u, k, eps, field);
  std::vector<double> ke1(u.size()), kz(u.size()), kz2(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec2 p = u.point(j), v = u.velocity(j);
    r.speed_defect = std::max(r.speed_defect, std::abs(norm(v) / p.y - r.length));
    r.curvature_defect = std::max(r.curvature_defect, std::abs(kappa[j] - curv[j]));
    const double w = curv[j] / (p.y * p.y);
    const Vec2 iv = rot(v);
    ke1[j] = w * iv.x;
    kz[j] = w * dot(p, iv);
    kz2[j] = w * dot(csq(p), iv);
  }
  r.killing = {mean(ke1), mean(kz), mean(kz2)};
  return r;
}

}  // namespace hyploop
