#include "hyploop/linearized.hpp"

#include <algorithm>
#include <cmath>

#include "hyploop/errors.hpp"
#include "hyploop/functionals.hpp"
#include "hyploop/spectral.hpp"

namespace hyploop {
namespace {

constexpr double kZeroRel = 1e-9;

struct Circle {
  std::vector<Vec2> w, dw;
};

Circle sample_circle(double k, std::size_t n) {
  Circle c;
  c.w.resize(n);
  c.dw.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = sample_angle(j, n);
    c.w[j] = reference_point(k, t);
    c.dw[j] = reference_velocity(k, t);
  }
  return c;
}

Eigen::MatrixXd complex_block(double m, double kr, double r2) {
  // Complex 2 x 2 block [[m^2, i m kR], [-i m kR, m^2 + R^2]] in real form.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  const double d1 = m * m, d2 = m * m + r2, off = m * kr;
  a(0, 0) = d1;
  a(1, 1) = d1;
  a(2, 2) = d2;
  a(3, 3) = d2;
  // entry (0,1) = i off  -> [[0, -off], [off, 0]]
  a(0, 3) = -off;
  a(1, 2) = off;
  // entry (1,0) = -i off -> [[0, off], [-off, 0]]
  a(2, 1) = off;
  a(3, 0) = -off;
  return a;
}

double mean_norm(const VecField& f) { return l2_norm(f); }

// Largest normalized projection of f on each of three mutually orthogonal directions.
std::array<double, 3> projections(const VecField& f, const std::array<VecField, 3>& dirs) {
  std::array<double, 3> p{};
  const double nf = mean_norm(f);
  if (nf == 0.0) return p;
  for (int i = 0; i < 3; ++i) p[i] = mean_dot(f, dirs[i]) / (mean_norm(dirs[i]) * nf);
  return p;
}

void check_orthogonal(const VecField& f, const std::array<VecField, 3>& dirs, double tol) {
  const auto p = projections(f, dirs);
  if (std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])}) > tol) throw NotOrthogonal(p, tol);
}

VecField pinv_apply(const VecField& f, double k) {
  const std::size_t n = f.size();
  const auto blocks = mode_blocks(k, n);
  const spectral::Coeffs c1 = spectral::forward(f.x);
  const spectral::Coeffs c2 = spectral::forward(f.y);
  spectral::Coeffs o1(c1.size()), o2(c2.size());
  for (const auto& b : blocks) {
    const std::size_t m = static_cast<std::size_t>(b.mode);
    if (b.matrix.rows() == 2) {
      const Eigen::Vector2d x = b.pseudo_inverse * Eigen::Vector2d(c1[m].real(), c2[m].real());
      o1[m] = x(0);
      o2[m] = x(1);
    } else {
      const Eigen::Vector4d rhs(c1[m].real(), c1[m].imag(), c2[m].real(), c2[m].imag());
      const Eigen::Vector4d x = b.pseudo_inverse * rhs;
      o1[m] = {x(0), x(1)};
      o2[m] = {x(2), x(3)};
    }
  }
  return {spectral::inverse(o1, n), spectral::inverse(o2, n)};
}

std::array<VecField, 3> orthonormalize(std::array<VecField, 3> v) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) v[i].add_scaled(-mean_dot(v[i], v[j]), v[j]);
    v[i] *= 1.0 / l2_norm(v[i]);
  }
  return v;
}

}  // namespace

VecField apply_B(const VecField& g, double k) {
  const double r = reference_radius(k);
  const double kr = k * r;
  std::vector<double> d1x, d2x, d1y, d2y;
  spectral::derivatives(g.x, d1x, d2x);
  spectral::derivatives(g.y, d1y, d2y);
  const double m2 = k * k * mean(g.y);
  VecField out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    out.x[j] = -d2x[j] + kr * d1y[j];
    out.y[j] = -d2y[j] - kr * d1x[j] + r * r * (g.y[j] - m2);
  }
  return out;
}

VecField phi(const VecField& g, double k) {
  const Circle c = sample_circle(k, g.size());
  VecField out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out.set(j, g.x[j] * c.dw[j] + g.y[j] * rot(c.dw[j]));
  return out;
}

VecField phi_inv(const VecField& f, double k) {
  const double r = reference_radius(k);
  const Circle c = sample_circle(k, f.size());
  VecField out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double s = 1.0 / (r * r * c.w[j].y * c.w[j].y);
    out.set(j, {s * dot(f[j], c.dw[j]), s * dot(f[j], rot(c.dw[j]))});
  }
  return out;
}

VecField apply_J0prime(const HyperPoint& z, const VecField& f, double k) {
  const Circle c = sample_circle(k, f.size());
  VecField out = phi(apply_B(phi_inv(f, k), k), k);
  const double zz = 1.0 / (z.z2() * z.z2());
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double s = zz / (c.w[j].y * c.w[j].y);
    out.x[j] *= s;
    out.y[j] *= s;
  }
  return out;
}

std::array<VecField, 3> kernel_B(double k, std::size_t n) {
  const double r = reference_radius(k);
  std::array<VecField, 3> b{VecField::constant(n, {1.0, 0.0}), VecField(n), VecField(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double t = sample_angle(j, n);
    b[1].set(j, {k * std::cos(t), -std::sin(t) / r});
    b[2].set(j, {-k * std::sin(t), -std::cos(t) / r});
  }
  return b;
}

std::array<VecField, 3> tangent_space(double k, std::size_t n) {
  const Circle c = sample_circle(k, n);
  std::array<VecField, 3> t{VecField(n), VecField::constant(n, {1.0, 0.0}), VecField(n)};
  for (std::size_t j = 0; j < n; ++j) {
    t[0].set(j, c.dw[j]);
    t[2].set(j, c.w[j]);
  }
  return t;
}

std::vector<BModeBlock> mode_blocks(double k, std::size_t n) {
  if (!spectral::is_power_of_two(n) || n < 8) throw DomainError("sample count must be a power of two >= 8");
  const double r = reference_radius(k);
  const double kr = k * r, r2 = r * r;
  const std::size_t half = n / 2;
  std::vector<BModeBlock> blocks(half + 1);
  double smax = 0.0;
  for (std::size_t m = 0; m <= half; ++m) {
    BModeBlock& b = blocks[m];
    b.mode = static_cast<int>(m);
    const double mm = static_cast<double>(m);
    if (m == 0) {
      b.matrix = Eigen::Vector2d(0.0, -1.0).asDiagonal();
    } else if (m == half) {
      b.matrix = Eigen::Vector2d(mm * mm, mm * mm + r2).asDiagonal();
    } else {
      b.matrix = complex_block(mm, kr, r2);
    }
    b.singular_values = Eigen::JacobiSVD<Eigen::MatrixXd>(b.matrix).singularValues();
    smax = std::max(smax, b.singular_values(0));
  }
  const double cut = kZeroRel * smax;
  for (auto& b : blocks) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    b.zero_count = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) < cut) ++b.zero_count;
      else inv(i) = 1.0 / s(i);
    }
    b.pseudo_inverse = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  }
  return blocks;
}

VecField solve_B(const VecField& f, double k, double tol) {
  check_orthogonal(f, kernel_B(k, f.size()), tol);
  return pinv_apply(f, k);
}

VecField project_out(const VecField& f, const std::array<VecField, 3>& dirs) {
  // Gram solve so that non-orthogonal directions are handled too.
  Eigen::Matrix3d g;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    b(i) = mean_dot(f, dirs[i]);
    for (int j = 0; j < 3; ++j) g(i, j) = mean_dot(dirs[i], dirs[j]);
  }
  const Eigen::Vector3d c = g.ldlt().solve(b);
  VecField out = f;
  for (int i = 0; i < 3; ++i) out.add_scaled(-c(i), dirs[i]);
  return out;
}

VecField solve_J0prime(const HyperPoint& z, const VecField& rhs, double k, double tol) {
  const std::size_t n = rhs.size();
  const auto tangent = tangent_space(k, n);
  check_orthogonal(rhs, tangent, tol);
  const Circle c = sample_circle(k, n);
  VecField scaled(n);
  const double zz = z.z2() * z.z2();
  for (std::size_t j = 0; j < n; ++j) scaled.set(j, (zz * c.w[j].y * c.w[j].y) * rhs[j]);
  const VecField g = pinv_apply(phi_inv(scaled, k), k);
  return project_out(phi(g, k), tangent);
}

KernelReport kernel_report(double k, std::size_t n) {
  KernelReport rep;
  rep.k = k;
  rep.samples = n;
  rep.blocks = mode_blocks(k, n);
  for (const auto& b : rep.blocks) rep.sigma_max = std::max(rep.sigma_max, b.singular_values(0));
  const double cut = kZeroRel * rep.sigma_max;
  rep.sigma_min_nonzero = rep.sigma_max;
  std::vector<VecField> found;
  for (const auto& b : rep.blocks) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.matrix, Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) >= cut) {
        rep.sigma_min_nonzero = std::min(rep.sigma_min_nonzero, s(i));
        continue;
      }
      rep.zero_modes.push_back(b.mode);
      const Eigen::VectorXd v = svd.matrixV().col(i);
      spectral::Coeffs c1(n / 2 + 1), c2(n / 2 + 1);
      const std::size_t m = static_cast<std::size_t>(b.mode);
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
  if (rep.dimension != 3) return rep;

  rep.basis = orthonormalize({found[0], found[1], found[2]});
  const auto ref = orthonormalize(kernel_B(k, n));
  // sin of the largest principal angle = spectral norm of (I - P_ref) Q.
  Eigen::Matrix3d gram;
  std::array<VecField, 3> resid;
  for (int i = 0; i < 3; ++i) {
    resid[i] = rep.basis[i];
    for (int j = 0; j < 3; ++j) resid[i].add_scaled(-mean_dot(rep.basis[i], ref[j]), ref[j]);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) gram(i, j) = mean_dot(resid[i], resid[j]);
  const double top = std::max(0.0, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(gram).eigenvalues().maxCoeff());
  rep.max_principal_angle = std::asin(std::min(1.0, std::sqrt(top)));
  return rep;
}

}  // namespace hyploop
