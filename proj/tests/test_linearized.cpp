#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "hyploop/errors.hpp"
#include "hyploop/functionals.hpp"
#include "hyploop/linearized.hpp"
#include "oracles.hpp"

using namespace hyploop;

namespace {

// Value and first three derivatives in the loop parameter.
struct Jet {
  double d[4] = {0, 0, 0, 0};
};

Jet operator+(Jet a, const Jet& b) {
  for (int i = 0; i < 4; ++i) a.d[i] += b.d[i];
  return a;
}
Jet operator*(double s, Jet a) {
  for (double& v : a.d) v *= s;
  return a;
}
Jet operator*(const Jet& f, const Jet& g) {
  Jet h;
  h.d[0] = f.d[0] * g.d[0];
  h.d[1] = f.d[1] * g.d[0] + f.d[0] * g.d[1];
  h.d[2] = f.d[2] * g.d[0] + 2 * f.d[1] * g.d[1] + f.d[0] * g.d[2];
  h.d[3] = f.d[3] * g.d[0] + 3 * f.d[2] * g.d[1] + 3 * f.d[1] * g.d[2] + f.d[0] * g.d[3];
  return h;
}
Jet reciprocal(const Jet& g) {
  Jet r;
  r.d[0] = 1 / g.d[0];
  r.d[1] = -g.d[1] * r.d[0] / g.d[0];
  r.d[2] = -(g.d[2] * r.d[0] + 2 * g.d[1] * r.d[1]) / g.d[0];
  r.d[3] = -(g.d[3] * r.d[0] + 3 * g.d[2] * r.d[1] + 3 * g.d[1] * r.d[2]) / g.d[0];
  return r;
}
Jet cos_jet(double m, double t) {
  return {{std::cos(m * t), -m * std::sin(m * t), -m * m * std::cos(m * t), m * m * m * std::sin(m * t)}};
}
Jet sin_jet(double m, double t) {
  return {{std::sin(m * t), m * std::cos(m * t), -m * m * std::sin(m * t), -m * m * m * std::cos(m * t)}};
}

// Reference circle and its derivatives from the closed form.
std::array<Jet, 2> circle_jet(double k, double t) {
  const double R = 1 / std::sqrt(k * k - 1);
  Jet denom = Jet{{k, 0, 0, 0}} + (-1.0) * sin_jet(1, t);
  const Jet inv = reciprocal(denom);
  return {cos_jet(1, t) * inv, (1 / R) * inv};
}

Vec2 at(const std::array<Jet, 2>& v, int order) { return {v[0].d[order], v[1].d[order]}; }

VecField random_frame(std::mt19937_64& rng, std::size_t n) { return oracle::random_field(rng, n, 5); }

}  // namespace

TEST_CASE("B annihilates its kernel basis") {
  for (double k : {1.1, 2.0, 5.0, 50.0}) {
    const auto ker = kernel_B(k, 256);
    for (const auto& g : ker) CHECK(oracle::sup(apply_B(g, k)) < 1e-12);
    // gamma from the closed form.
    const double R = 1 / std::sqrt(k * k - 1);
    for (std::size_t j = 0; j < 256; ++j) {
      const double t = sample_angle(j, 256);
      CHECK(std::abs(ker[1].x[j] - k * std::cos(t)) < 1e-13);
      CHECK(std::abs(ker[1].y[j] + std::sin(t) / R) < 1e-13 * k);
    }
    CHECK(oracle::sup(apply_B(VecField::constant(64, {1, 0}), k)) == 0.0);
  }
}

TEST_CASE("frame change identities") {
  for (double k : {1.5, 2.0, 5.0}) {
    const std::size_t n = 256;
    const Loop w = reference_loop(k, n);
    const auto ker = kernel_B(k, n);
    const VecField e1 = VecField::constant(n, {1, 0});
    const VecField pe1 = phi(e1, k);
    for (std::size_t j = 0; j < n; ++j) CHECK(pe1[j] == reference_velocity(k, sample_angle(j, n)));
    CHECK(oracle::sup(pe1 - w.velocities()) < 1e-12);
    CHECK(oracle::sup(phi(ker[1], k) - w.points()) < 1e-12);
    CHECK(oracle::sup(phi(ker[2], k) - (e1 - w.velocities())) < 1e-12);
    std::mt19937_64 rng(1);
    const VecField g = random_frame(rng, n);
    CHECK(oracle::sup(phi_inv(phi(g, k), k) - g) < 1e-13);
  }
}

TEST_CASE("B is symmetric") {
  std::mt19937_64 rng(2);
  for (double k : {1.1, 2.0, 5.0}) {
    for (int i = 0; i < 5; ++i) {
      const VecField g = random_frame(rng, 256), h = random_frame(rng, 256);
      const double a = oracle::inner(apply_B(g, k), h), b = oracle::inner(g, apply_B(h, k));
      CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("mode blocks match the wavenumber algebra") {
  const double k = 2.0, R = 1 / std::sqrt(3.0);
  const auto blocks = mode_blocks(k, 64);
  REQUIRE(blocks.size() == 33);
  int zeros = 0;
  for (const auto& b : blocks) {
    zeros += b.zero_count;
    if (b.mode == 0) CHECK(b.zero_count == 1);
    else if (b.mode == 1) CHECK(b.zero_count == 2);
    else CHECK(b.zero_count == 0);
  }
  CHECK(zeros == 3);
  // Mode 0 acts on the means as diag(0, R^2 (1 - k^2)) = diag(0, -1).
  CHECK(std::abs(blocks[0].matrix(1, 1) + 1.0) < 1e-14);
  // A mode m > 0 block has singular values m^2 + R^2/2 +- sqrt(R^4/4 + m^2 k^2 R^2), each twice.
  for (int m : {1, 2, 7}) {
    const double mm = m * m;
    const double c = std::sqrt(R * R * R * R / 4 + mm * k * k * R * R);
    const double hi = mm + R * R / 2 + c, lo = std::abs(mm + R * R / 2 - c);
    const auto& s = blocks[static_cast<std::size_t>(m)].singular_values;
    CHECK(std::abs(s[0] - hi) < 1e-12 * hi);
    CHECK(std::abs(s[3] - lo) < 1e-12 * hi);
  }
}

TEST_CASE("kernel report for several curvatures") {
  for (double k : {1.1, 2.0, 5.0, 50.0}) {
    const KernelReport r = kernel_report(k, 256);
    CHECK(r.dimension == 3);
    REQUIRE(r.zero_modes.size() == 3);
    CHECK(r.zero_modes[0] == 0);
    CHECK(r.zero_modes[1] == 1);
    CHECK(r.zero_modes[2] == 1);
    CHECK(r.max_principal_angle < 1e-8);
    CHECK(r.sigma_min_nonzero > 1e-9 * r.sigma_max);
  }
}

TEST_CASE("solving with B") {
  std::mt19937_64 rng(5);
  for (double k : {1.1, 2.0, 5.0}) {
    const auto ker = kernel_B(k, 256);
    for (int i = 0; i < 3; ++i) {
      const VecField g0 = project_out(random_frame(rng, 256), ker);
      const VecField f = apply_B(g0, k);
      const VecField g = solve_B(f, k);
      CHECK(oracle::sup(g - g0) < 1e-10);
      CHECK(oracle::sup(apply_B(g, k) - f) < 1e-10);
    }
    CHECK_THROWS_AS(solve_B(ker[1], k), NotOrthogonal);
    CHECK_THROWS_AS(solve_B(VecField::constant(256, {1, 0}), k), NotOrthogonal);
  }
  try {
    solve_B(kernel_B(2.0, 64)[1], 2.0);
  } catch (const NotOrthogonal& e) {
    CHECK(std::abs(e.projection()[1]) > 0.5);
  }
}

TEST_CASE("tangent directions are in the kernel of the linearized residual") {
  for (double k : {1.5, 2.0, 5.0}) {
    const auto tang = tangent_space(k, 256);
    for (Vec2 z : {Vec2{0, 1}, Vec2{3, 0.5}, Vec2{-2, 4}})
      for (const auto& t : tang) CHECK(oracle::sup(apply_J0prime({z.x, z.y}, t, k)) < 1e-11);
  }
}

TEST_CASE("linearized residual against central differences") {
  std::mt19937_64 rng(9);
  const FieldExpr zero = parse_field("0");
  const double k = 2.0, h = 1e-5;
  for (Vec2 z : {Vec2{0, 1}, Vec2{3, 0.5}, Vec2{-2, 4}}) {
    const HyperPoint zp(z.x, z.y);
    const Loop wz = reference_loop(k, zp, 256);
    const VecField f = 0.2 * z.y * oracle::random_field(rng, 256, 4);
    const VecField exact = apply_J0prime(zp, f, k);
    const VecField fd = (1 / (2 * h)) * (residual_J(wz.perturbed(h * f), k, 0, zero) -
                                         residual_J(wz.perturbed(-h * f), k, 0, zero));
    CHECK(oracle::sup(fd - exact) / oracle::sup(exact) < 1e-5);
  }
}

TEST_CASE("linearized residual is self-adjoint") {
  std::mt19937_64 rng(10);
  for (Vec2 z : {Vec2{0, 1}, Vec2{3, 0.5}, Vec2{-2, 4}}) {
    const HyperPoint zp(z.x, z.y);
    const VecField f = oracle::random_field(rng, 256, 5), g = oracle::random_field(rng, 256, 5);
    const double a = oracle::inner(apply_J0prime(zp, f, 2.0), g), b = oracle::inner(f, apply_J0prime(zp, g, 2.0));
    CHECK(std::abs(a - b) < 1e-11 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("linearized residual along the rotation direction") {
  // Product-rule evaluation of w2^2 J0'(w) (psi w') with w from its closed form,
  // compared with -psi'' w' - kR psi' i w'.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double k : {1.5, 2.0, 5.0}) {
    const double R = 1 / std::sqrt(k * k - 1);
    const std::size_t n = 256;
    const double a2 = u(rng), b2 = u(rng), a3 = u(rng), c0 = u(rng);
    VecField f(n), lhs(n), rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = sample_angle(j, n);
      const Jet psi = Jet{{c0, 0, 0, 0}} + a2 * cos_jet(2, t) + b2 * sin_jet(2, t) + a3 * cos_jet(3, t);
      const auto w = circle_jet(k, t);
      const Vec2 w0 = at(w, 0), w1 = at(w, 1), w2 = at(w, 2), w3 = at(w, 3);
      const Vec2 p0 = psi.d[0] * w1;
      const Vec2 p1 = psi.d[1] * w1 + psi.d[0] * w2;
      const Vec2 p2 = psi.d[2] * w1 + 2 * psi.d[1] * w2 + psi.d[0] * w3;
      // Length variation vanishes since p is parallel to w'.
      const Vec2 j_phi = -p2 + k * R * rot(p1) + (1 / w0.y) * gamma_jac(w1, p1) - (p0.y / (w0.y * w0.y)) * gamma(w1);
      lhs.set(j, j_phi);
      rhs.set(j, -psi.d[2] * w1 - k * R * psi.d[1] * rot(w1));
      f.set(j, p0);
    }
    CHECK(oracle::sup(lhs - rhs) < 1e-10);
    const VecField lib = apply_J0prime({0, 1}, f, k);
    const Loop w = reference_loop(k, n);
    VecField scaled(n);
    for (std::size_t j = 0; j < n; ++j) scaled.set(j, (w.y()[j] * w.y()[j]) * lib[j]);
    CHECK(oracle::sup(scaled - rhs) < 1e-10);
  }
}

TEST_CASE("inverse of the linearized residual") {
  std::mt19937_64 rng(14);
  const double k = 2.0;
  const auto tang = tangent_space(k, 256);
  for (Vec2 z : {Vec2{0, 1}, Vec2{3, 0.5}}) {
    const HyperPoint zp(z.x, z.y);
    const VecField f0 = project_out(oracle::random_field(rng, 256, 5), tang);
    const VecField rhs = project_out(apply_J0prime(zp, f0, k), tang);
    const VecField f = solve_J0prime(zp, rhs, k);
    CHECK(oracle::sup(project_out(apply_J0prime(zp, f, k), tang) - rhs) < 1e-9 * oracle::sup(rhs));
    for (const auto& t : tang) CHECK(std::abs(oracle::inner(f, t)) < 1e-12);
  }
  CHECK_THROWS_AS(solve_J0prime({0, 1}, tang[2], k), NotOrthogonal);
}
