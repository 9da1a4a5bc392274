#include "hyploop/euclid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hyploop/errors.hpp"
#include "hyploop/linearized.hpp"
#include "hyploop/quadrature.hpp"
#include "hyploop/simd/kernels.hpp"
#include "hyploop/spectral.hpp"

namespace hyploop {
namespace {

constexpr double kZeroRel = 1e-9;

void require_curvature(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("curvature must be positive");
}

void require_moving(const Loop& u) {
  double speed = 0.0, size = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    speed = std::max(speed, norm(u.velocity(j)));
    size = std::max(size, norm(u.point(j)));
  }
  if (!(speed > 1e-12 * std::max(size, 1.0))) throw DegenerateLoop("loop is numerically constant");
}

std::vector<double> total_curvature(const Loop& u, double k, double eps, const FieldExpr& field) {
  std::vector<double> c(u.size(), k);
  if (eps != 0.0) {
    std::vector<double> kv(u.size());
    field.eval_batch(u.x(), u.y(), kv);
    simd::active().axpby(1.0, c.data(), eps, kv.data(), c.data(), u.size());
  }
  return c;
}

// Real form of the Fourier block at frequency m on (Re a, Im a, Re b, Im b).
// The operator does not depend on k: the mean term is k^2 (f . w) w with |w| = 1/k.
Eigen::MatrixXd block(std::size_t m, std::size_t n) {
  const double mm = static_cast<double>(m);
  if (m == 0) return Eigen::MatrixXd::Zero(2, 2);
  if (m == n / 2) return Eigen::Vector2d(mm * mm, mm * mm).asDiagonal();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) a(i, i) = mm * mm;
  // entry (a, b) = -i m, entry (b, a) = i m
  a(0, 3) = mm;
  a(1, 2) = -mm;
  a(2, 1) = -mm;
  a(3, 0) = mm;
  if (m == 1) {
    const Eigen::Vector4d v(1.0, 0.0, 0.0, -1.0);
    a -= 0.5 * v * v.transpose();
  }
  return a;
}

struct Blocks {
  std::vector<Eigen::MatrixXd> matrix, pinv;
  std::vector<Eigen::VectorXd> sigma;
  std::vector<Eigen::MatrixXd> right;
  double smax = 0.0;
};

Blocks build_blocks(std::size_t n) {
  if (!spectral::is_power_of_two(n) || n < 8) throw DomainError("sample count must be a power of two >= 8");
  Blocks b;
  const std::size_t half = n / 2;
  for (std::size_t m = 0; m <= half; ++m) {
    b.matrix.push_back(block(m, n));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.matrix.back(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    b.sigma.push_back(svd.singularValues());
    b.right.push_back(svd.matrixV());
    b.smax = std::max(b.smax, svd.singularValues()(0));
  }
  const double cut = kZeroRel * b.smax;
  for (std::size_t m = 0; m <= half; ++m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.matrix[m], Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) >= cut) inv(i) = 1.0 / s(i);
    b.pinv.push_back(svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose());
  }
  return b;
}

double euclid_potential_dot(const FieldExpr& f, Vec2 z, Vec2 iv) {
  const double h = 0.5 * quad::integrate([&](double t) { return f.eval(t, z.y); }, 0.0, z.x);
  const double v = 0.5 * quad::integrate([&](double t) { return f.eval(z.x, t); }, 0.0, z.y);
  return h * iv.x + v * iv.y;
}

}  // namespace

Loop euclid_reference_loop(double k, Vec2 z, std::size_t n) {
  require_curvature(k);
  return Loop::sample(n, [k, z](double t) { return Vec2{z.x + std::cos(t) / k, z.y + std::sin(t) / k}; });
}

double euclid_length(const Loop& u) {
  require_moving(u);
  const auto& kt = simd::active();
  const double s = kt.dot(u.dx().data(), u.dx().data(), u.size()) + kt.dot(u.dy().data(), u.dy().data(), u.size());
  return std::sqrt(s / static_cast<double>(u.size()));
}

double euclid_area_A1(const Loop& u) {
  return simd::active().dot(u.y().data(), u.dx().data(), u.size()) / static_cast<double>(u.size());
}

double euclid_area_AK(const Loop& u, const FieldExpr& field) {
  std::vector<double> w(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) w[j] = euclid_potential_dot(field, u.point(j), rot(u.velocity(j)));
  return mean(w);
}

EnergyBreakdown euclid_energy(const Loop& u, double k, double eps, const FieldExpr& field) {
  EnergyBreakdown e;
  e.length_part = euclid_length(u);
  e.const_area_part = k * euclid_area_A1(u);
  e.pert_area_part = eps != 0.0 ? euclid_area_AK(u, field) : 0.0;
  e.total = e.length_part + e.const_area_part + eps * e.pert_area_part;
  return e;
}

VecField residual_J_euclid(const Loop& u, double k, double eps, const FieldExpr& field) {
  const double len = euclid_length(u);
  const auto curv = total_curvature(u, k, eps, field);
  VecField j(u.size());
  const simd::ResidualArgs args{u.x().data(),   u.y().data(),   u.dx().data(), u.dy().data(),
                                u.ddx().data(), u.ddy().data(), curv.data(),   len};
  simd::active().euclid_residual(args, j.x.data(), j.y.data(), u.size());
  return j;
}

std::vector<double> euclid_curvature(const Loop& u) {
  double lo = INFINITY, hi = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double s = norm(u.velocity(j));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (!(lo >= 1e-8 * hi) || hi == 0.0) throw DegenerateLoop("loop speed vanishes");
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec2 v = u.velocity(j);
    const double s = dot(v, v);
    out[j] = dot(u.acceleration(j), rot(v)) / (s * std::sqrt(s));
  }
  return out;
}

VerifyReport verify_solution_euclid(const Loop& u, double k, double eps, const FieldExpr& field) {
  VerifyReport r;
  r.winding = winding_number(u);
  r.embedded = is_embedded(u);
  std::vector<double> kappa;
  try {
    r.length = euclid_length(u);
    kappa = euclid_curvature(u);
  } catch (const DegenerateLoop&) {
    r.regular = false;
    const double inf = std::numeric_limits<double>::infinity();
    r.residual_sup = r.speed_defect = r.curvature_defect = inf;
    r.killing = {inf, inf, inf};
    return r;
  }
  r.residual_sup = sup_norm(residual_J_euclid(u, k, eps, field));
  const auto curv = total_curvature(u, k, eps, field);
  std::vector<double> a(u.size()), b(u.size()), c(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec2 p = u.point(j), v = u.velocity(j);
    r.speed_defect = std::max(r.speed_defect, std::abs(norm(v) - r.length));
    r.curvature_defect = std::max(r.curvature_defect, std::abs(kappa[j] - curv[j]));
    const Vec2 iv = rot(v);
    a[j] = curv[j] * iv.x;
    b[j] = curv[j] * iv.y;
    c[j] = curv[j] * dot(rot(p), iv);
  }
  r.killing = {mean(a), mean(b), mean(c)};
  return r;
}

double melnikov_F_euclid(Vec2 z, double k, const FieldExpr& field, DiskQuadrature q) {
  require_curvature(k);
  auto run = [&](int radial, int angular) {
    const quad::DiskRule d = quad::disk_rule(1.0 / k, radial, angular);
    std::vector<double> x(d.points.size()), y(d.points.size()), v(d.points.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = z.x + d.points[i].x;
      y[i] = z.y + d.points[i].y;
    }
    field.eval_batch(x, y, v);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += d.weights[i] * v[i];
    return s;
  };
  const double full = run(q.radial, q.angular);
  const double half = run(std::max(1, q.radial / 2), std::max(1, q.angular / 2));
  if (!std::isfinite(full) || std::abs(full - half) > 1e-9 * std::max(1.0, std::abs(full)))
    throw QuadratureFailure("disk quadrature did not settle; field too rough for the rule");
  return full;
}

Vec2 melnikov_grad_euclid(Vec2 z, double k, const FieldGrad& grad, DiskQuadrature q) {
  require_curvature(k);
  const quad::DiskRule d = quad::disk_rule(1.0 / k, q.radial, q.angular);
  const std::size_t n = d.points.size();
  std::vector<double> x(n), y(n), g1(n), g2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = z.x + d.points[i].x;
    y[i] = z.y + d.points[i].y;
  }
  grad.d1.eval_batch(x, y, g1);
  grad.d2.eval_batch(x, y, g2);
  Vec2 s{};
  for (std::size_t i = 0; i < n; ++i) s += d.weights[i] * Vec2{g1[i], g2[i]};
  return s;
}

std::array<VecField, 3> euclid_tangent_space(double k, std::size_t n) {
  require_curvature(k);
  std::array<VecField, 3> t{VecField(n), VecField::constant(n, {1.0, 0.0}), VecField::constant(n, {0.0, 1.0})};
  for (std::size_t j = 0; j < n; ++j) {
    const double th = sample_angle(j, n);
    t[0].set(j, {-std::sin(th) / k, std::cos(th) / k});
  }
  return t;
}

VecField apply_J0prime_euclid(const VecField& f, double k) {
  require_curvature(k);
  const std::size_t n = f.size();
  std::vector<double> d1x, d2x, d1y, d2y;
  spectral::derivatives(f.x, d1x, d2x);
  spectral::derivatives(f.y, d1y, d2y);
  std::vector<double> proj(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = sample_angle(j, n);
    proj[j] = (f.x[j] * std::cos(t) + f.y[j] * std::sin(t)) / k;
  }
  const double m = k * k * mean(proj);
  VecField out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = sample_angle(j, n);
    out.x[j] = -d2x[j] - d1y[j] - m * std::cos(t) / k;
    out.y[j] = -d2y[j] + d1x[j] - m * std::sin(t) / k;
  }
  return out;
}

VecField solve_J0prime_euclid(const VecField& rhs, double k, double tol) {
  const std::size_t n = rhs.size();
  const auto tangent = euclid_tangent_space(k, n);
  const double nr = l2_norm(rhs);
  if (nr > 0.0) {
    std::array<double, 3> p{};
    for (int i = 0; i < 3; ++i) p[i] = mean_dot(rhs, tangent[i]) / (l2_norm(tangent[i]) * nr);
    if (std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])}) > tol) throw NotOrthogonal(p, tol);
  }
  static thread_local std::size_t cached_n = 0;
  static thread_local Blocks cached;
  if (cached_n != n) {
    cached = build_blocks(n);
    cached_n = n;
  }
  const spectral::Coeffs c1 = spectral::forward(rhs.x);
  const spectral::Coeffs c2 = spectral::forward(rhs.y);
  spectral::Coeffs o1(c1.size()), o2(c2.size());
  for (std::size_t m = 0; m <= n / 2; ++m) {
    const Eigen::MatrixXd& p = cached.pinv[m];
    if (p.rows() == 2) {
      const Eigen::Vector2d x = p * Eigen::Vector2d(c1[m].real(), c2[m].real());
      o1[m] = x(0);
      o2[m] = x(1);
    } else {
      const Eigen::Vector4d x = p * Eigen::Vector4d(c1[m].real(), c1[m].imag(), c2[m].real(), c2[m].imag());
      o1[m] = {x(0), x(1)};
      o2[m] = {x(2), x(3)};
    }
  }
  return project_out(VecField(spectral::inverse(o1, n), spectral::inverse(o2, n)), tangent);
}

EuclidKernelReport kernel_euclid(double k, std::size_t n) {
  require_curvature(k);
  EuclidKernelReport rep;
  const Blocks b = build_blocks(n);
  rep.sigma_max = b.smax;
  rep.sigma_min_nonzero = b.smax;
  const double cut = kZeroRel * b.smax;
  std::vector<VecField> found;
  for (std::size_t m = 0; m < b.sigma.size(); ++m) {
    const Eigen::VectorXd& s = b.sigma[m];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) >= cut) {
        rep.sigma_min_nonzero = std::min(rep.sigma_min_nonzero, s(i));
        continue;
      }
      rep.zero_modes.push_back(static_cast<int>(m));
      const Eigen::VectorXd v = b.right[m].col(i);
      spectral::Coeffs c1(n / 2 + 1), c2(n / 2 + 1);
      if (v.size() == 2) {
        c1[m] = v(0);
        c2[m] = v(1);
      } else {
        c1[m] = {v(0), v(1)};
        c2[m] = {v(2), v(3)};
      }
      found.emplace_back(spectral::inverse(c1, n), spectral::inverse(c2, n));
    }
  }
  rep.dimension = static_cast<int>(found.size());
  const auto tangent = euclid_tangent_space(k, n);
  for (int i = 0; i < 3; ++i) rep.basis_residual[i] = sup_norm(apply_J0prime_euclid(tangent[i], k));
  if (rep.dimension == 3) {
    double worst = 0.0;
    for (const auto& f : found) {
      const VecField r = project_out(f, tangent);
      worst = std::max(worst, l2_norm(r) / l2_norm(f));
    }
    rep.max_principal_angle = std::asin(std::min(1.0, worst));
  }
  return rep;
}

EuclideanModel::EuclideanModel(double k, FieldExpr field) : LoopModel(k, std::move(field)) { require_curvature(k); }

void EuclideanModel::check_center(Vec2 z) const {
  if (!std::isfinite(z.x) || !std::isfinite(z.y)) throw DomainError("center must be finite");
}

Loop EuclideanModel::reference(Vec2 z, std::size_t n) const { return euclid_reference_loop(k(), z, n); }

std::array<VecField, 3> EuclideanModel::tangent(std::size_t n) const { return euclid_tangent_space(k(), n); }

double EuclideanModel::reference_energy() const { return 0.5 / k(); }

bool EuclideanModel::admissible(const Loop&) const { return true; }

double EuclideanModel::length(const Loop& u) const { return euclid_length(u); }

VecField EuclideanModel::residual(const Loop& u, double eps) const { return residual_J_euclid(u, k(), eps, field()); }

EnergyBreakdown EuclideanModel::energy(const Loop& u, double eps) const { return euclid_energy(u, k(), eps, field()); }

VerifyReport EuclideanModel::verify(const Loop& u, double eps) const {
  return verify_solution_euclid(u, k(), eps, field());
}

VecField EuclideanModel::apply_linearized(Vec2, const VecField& f) const { return apply_J0prime_euclid(f, k()); }

VecField EuclideanModel::solve_linearized(Vec2, const VecField& rhs) const { return solve_J0prime_euclid(rhs, k()); }

Objective EuclideanModel::melnikov(DiskQuadrature q) const {
  const double kk = k();
  const FieldExpr f = field();
  auto grad = std::make_shared<FieldGrad>(grad_field(f));
  Objective o;
  o.value = [kk, f, q](Vec2 z) { return melnikov_F_euclid(z, kk, f, q); };
  o.gradient = [kk, grad, q](Vec2 z) { return melnikov_grad_euclid(z, kk, *grad, q); };
  o.constant = f.is_constant();
  return o;
}

}  // namespace hyploop
