#include "hyploop/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hyploop/errors.hpp"
#include "hyploop/loop.hpp"
#include "hyploop/simd/kernels.hpp"

namespace hyploop {

HyperPoint::HyperPoint(double z1, double z2) : z1_(z1), z2_(z2) {
  if (!std::isfinite(z1) || !std::isfinite(z2) || !(z2 > 0.0))
    throw DomainError("half-plane point needs finite z1 and z2 > 0");
}

double hyp_distance(const HyperPoint& p, const HyperPoint& q) {
  const Vec2 d = p.vec() - q.vec();
  // acosh(1 + x) written through log1p to keep accuracy for nearby points.
  const double x = dot(d, d) / (2.0 * p.z2() * q.z2());
  return std::log1p(x + std::sqrt(x * (x + 2.0)));
}

EuclidDisk disk_to_euclid(const HypDisk& d) {
  if (!(d.rho >= 0.0)) throw DomainError("disk radius must be >= 0");
  return {{d.center.z1(), d.center.z2() * std::cosh(d.rho)}, d.center.z2() * std::sinh(d.rho)};
}

HypDisk euclid_to_disk(const EuclidDisk& d) {
  if (!(d.radius >= 0.0) || !(d.center.y > d.radius))
    throw DomainError("Euclidean disk must lie strictly inside the half-plane");
  const double c = d.center.y, r = d.radius;
  const double z2 = std::sqrt((c - r) * (c + r));
  return {HyperPoint(d.center.x, z2), std::atanh(r / c)};
}

Loop translate(const HyperPoint& z, const Loop& u) {
  std::vector<double> x(u.size()), y(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec2 p = translate(z, u.point(j));
    x[j] = p.x;
    y[j] = p.y;
  }
  return Loop(std::move(x), std::move(y));
}

std::vector<double> geodesic_curvature(const Loop& u) {
  const std::size_t n = u.size();
  double lo = INFINITY, hi = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = norm(u.velocity(j));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (!(lo >= 1e-8 * hi) || hi == 0.0) throw DegenerateLoop("loop speed vanishes");
  std::vector<double> out(n);
  const simd::ResidualArgs args{u.x().data(),  u.y().data(),   u.dx().data(), u.dy().data(),
                                u.ddx().data(), u.ddy().data(), nullptr,       0.0};
  simd::active().hyp_curvature(args, out.data(), n);
  return out;
}

double circle_radius(double k) {
  if (!(k > 1.0)) throw DomainError("curvature of a closed geodesic circle must exceed 1");
  return std::atanh(1.0 / k);
}

double reference_radius(double k) {
  if (!(k > 1.0)) throw DomainError("curvature of a closed geodesic circle must exceed 1");
  return 1.0 / std::sqrt((k - 1.0) * (k + 1.0));
}

}  // namespace hyploop

namespace hyploop {

void RegionBox::validate(bool require_upper) const {
  const bool finite = std::isfinite(z1min) && std::isfinite(z1max) && std::isfinite(z2min) &&
                      std::isfinite(z2max);
  if (!finite || !(z1min < z1max) || !(z2min < z2max))
    throw DomainError("box needs z1min < z1max and z2min < z2max");
  if (require_upper && !(z2min > 0.0)) throw DomainError("box must lie in the half-plane (z2min > 0)");
}

Vec2 RegionBox::node(int i, int j, int n) const {
  const double s = n > 1 ? 1.0 / static_cast<double>(n - 1) : 0.0;
  return {z1min + (z1max - z1min) * (i * s), z2min + (z2max - z2min) * (j * s)};
}

bool RegionBox::contains(Vec2 p) const {
  return p.x >= z1min && p.x <= z1max && p.y >= z2min && p.y <= z2max;
}

}  // namespace hyploop
