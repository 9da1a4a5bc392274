#include <doctest.h>

#include <cmath>
#include <random>

#include "hyploop/errors.hpp"
#include "hyploop/functionals.hpp"
#include "hyploop/melnikov.hpp"
#include "oracles.hpp"

using namespace hyploop;

namespace {

// Hyperbolic integral of K over the Euclidean disk with center (cx, c) and
// radius r by nested Simpson rules on a Cartesian parametrization.
double hyperbolic_disk_integral(const FieldExpr& K, double cx, double c, double r, int panels = 600) {
  auto column = [&](double phi) {
    const double x = cx + r * std::sin(phi), s = r * std::cos(phi);
    if (s <= 0) return 0.0;
    return r * std::cos(phi) *
           oracle::simpson([&](double y) { return K.eval(x, y) / (y * y); }, c - s, c + s, panels);
  };
  return oracle::simpson(column, -oracle::pi / 2, oracle::pi / 2, panels);
}

}  // namespace

TEST_CASE("constant field gives the disk area") {
  const FieldExpr one = parse_field("1");
  const double k = 2.0, R = 1 / std::sqrt(3.0);
  const double area = 2 * oracle::pi * (k * R - 1);
  CHECK(std::abs(area - 0.97201215) < 1e-8);
  CHECK(std::abs(melnikov_F({0, 1}, k, one) - area) < 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(-5, 5), b(0.1, 5);
  for (int i = 0; i < 10; ++i) {
    const HyperPoint z(a(rng), b(rng));
    CHECK(std::abs(melnikov_F(z, k, one) - area) < 1e-9);
    CHECK(norm(melnikov_grad(z, k, one)) == 0.0);
  }
}

TEST_CASE("linear field against brute-force quadrature") {
  const double k = 2.0, R = 1 / std::sqrt(3.0);
  const FieldExpr K = parse_field("z2");
  const double ref = hyperbolic_disk_integral(K, 0.0, k * R, R);
  // Closed form for K = z2: 2 pi (c - sqrt(c^2 - r^2)) with c = kR, r = R.
  const double exact = 2 * oracle::pi * (k * R - 1);
  CHECK(std::abs(ref - exact) / exact < 1e-9);
  CHECK(std::abs(melnikov_F({0, 1}, k, K) - ref) / ref < 1e-7);

  const FieldExpr Q = parse_field("z1^2+(z2-2)^2");
  const HyperPoint z(0.3, 1.6);
  const double refq = hyperbolic_disk_integral(Q, z.z1(), z.z2() * k * R, z.z2() * R);
  CHECK(std::abs(melnikov_F(z, k, Q) - refq) / refq < 1e-7);
}

TEST_CASE("Melnikov value is minus 2 pi times the area of the moved circle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> a(-2, 2), b(0.5, 3);
  const char* fields[] = {"z1^2+(z2-2)^2", "sin(z1)+z2", "exp(-z1^2)*z2", "atan(z1)+z2^2", "1/(1+z2^2)"};
  for (const char* f : fields) {
    const FieldExpr K = parse_field(f);
    const HyperPoint z(a(rng), b(rng));
    const double k = 1.5 + std::uniform_real_distribution<double>(0, 3)(rng);
    const double F = melnikov_F(z, k, K);
    const double A = area_AK(reference_loop(k, z, 256), K);
    CHECK(std::abs(F + 2 * oracle::pi * A) < 1e-8);
  }
}

TEST_CASE("gradient against central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-2, 2), b(0.5, 3);
  const char* fields[] = {"z1^2+(z2-2)^2", "sin(z1)+z2", "exp(-z1^2)*z2", "atan(z1)+z2^2"};
  for (const char* f : fields) {
    const FieldExpr K = parse_field(f);
    for (int i = 0; i < 3; ++i) {
      const HyperPoint z(a(rng), b(rng));
      const double h = 1e-5 * std::max(1.0, norm(z.vec()));
      const Vec2 fd{(melnikov_F({z.z1() + h, z.z2()}, 2.0, K) - melnikov_F({z.z1() - h, z.z2()}, 2.0, K)) / (2 * h),
                    (melnikov_F({z.z1(), z.z2() + h}, 2.0, K) - melnikov_F({z.z1(), z.z2() - h}, 2.0, K)) / (2 * h)};
      const Vec2 g = melnikov_grad(z, 2.0, K);
      CHECK(norm(fd - g) / std::max(1e-3, norm(g)) < 1e-6);
    }
  }
  const FieldExpr sq = parse_field("z1^2");
  for (double z2 : {0.5, 1.0, 2.5}) CHECK(std::abs(melnikov_grad({0, z2}, 2.0, sq).x) < 1e-13);
  CHECK_THROWS_AS(melnikov_grad({0, 1}, 2.0, parse_field("abs(z1)")), NonDifferentiable);
}

TEST_CASE("quadrature order doubling") {
  const char* fields[] = {"z1^2+(z2-2)^2", "z2", "sin(z1)*z2"};
  for (const char* f : fields) {
    const FieldExpr K = parse_field(f);
    for (Vec2 z : {Vec2{0, 1}, Vec2{0, 2}, Vec2{1, 1.5}}) {
      const double a = melnikov_F({z.x, z.y}, 2.0, K);
      const double b = melnikov_F({z.x, z.y}, 2.0, K, {128, 256});
      CHECK(std::abs(a - b) < 1e-10);
    }
  }
  CHECK_THROWS_AS(melnikov_F({0, 1}, 2.0, parse_field("tanh(400*(z1-0.1))")), QuadratureFailure);
}

TEST_CASE("critical points of the quadratic test field") {
  const RegionBox box{-1, 1, 1, 3};
  const FieldExpr K = parse_field("z1^2+(z2-2)^2");
  const CriticalSearch s = find_critical(2.0, K, box, 12);
  REQUIRE(s.points.size() == 1);
  const MelnikovSample& p = s.points[0];
  CHECK(std::abs(p.z.x) < 1e-8);
  CHECK(p.kind == CriticalKind::min);
  CHECK(norm(p.grad) < 1e-10);
  CHECK(s.interior_min);

  // One-dimensional scan of F(0, .) brackets the same z2.
  double best = 1e300, arg = 0;
  for (int i = 0; i <= 2000; ++i) {
    const double z2 = 1.5 + 0.5 * i / 2000.0;
    const double v = melnikov_F({0, z2}, 2.0, K, {32, 64});
    if (v < best) best = v, arg = z2;
  }
  CHECK(std::abs(arg - p.z.y) < 5e-4);

  const CriticalSearch neg = find_critical(2.0, parse_field("-(z1^2)-(z2-2)^2"), box, 12);
  REQUIRE(neg.points.size() == 1);
  CHECK(neg.points[0].kind == CriticalKind::max);
  CHECK(std::abs(neg.points[0].z.y - p.z.y) < 1e-8);
  CHECK(neg.interior_max);
}

TEST_CASE("constant field has no critical point") {
  const CriticalSearch s = find_critical(2.0, parse_field("1"), {-1, 1, 1, 3}, 8);
  CHECK(s.points.empty());
  CHECK(s.constant);
  CHECK(s.note == "F constant");
  CHECK(s.grid.size() == 64);
}

TEST_CASE("grid scan does not depend on the thread count") {
  const FieldExpr K = parse_field("z1^2+(z2-2)^2+0.3*z1");
  const RegionBox box{-1, 1, 1, 3};
  const CriticalSearch a = find_critical(2.0, K, box, 10, {32, 64}, 1);
  const CriticalSearch b = find_critical(2.0, K, box, 10, {32, 64}, 4);
  REQUIRE(a.grid.size() == b.grid.size());
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    CHECK(a.grid[i].value == b.grid[i].value);
    CHECK(a.grid[i].grad == b.grid[i].grad);
  }
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].z == b.points[i].z);
}

TEST_CASE("saddle classification") {
  // F for K = z1^2 - (z2-2)^2 behaves like K near its critical point.
  const CriticalSearch s = find_critical(3.0, parse_field("z1^2-(z2-2)^2"), {-1, 1, 1, 3}, 10, {32, 64});
  REQUIRE(!s.points.empty());
  CHECK(s.points[0].kind == CriticalKind::saddle);
}

TEST_CASE("large curvature asymptotics") {
  const FieldExpr z2 = parse_field("z2");
  double prev = 1e9;
  for (double k : {10.0, 50.0, 250.0}) {
    const AsymptoticCheck c = asymptotic_check({0, 2}, k, z2);
    CHECK(c.rel_err < prev);
    prev = c.rel_err;
  }
  CHECK(prev < 1e-2);

  prev = 1e9;
  for (double k : {10.0, 50.0, 250.0}) {
    const AsymptoticCheck c = asymptotic_check({0.5, 1.5}, k, parse_field("1"));
    const double R = 1 / std::sqrt(k * k - 1);
    CHECK(std::abs(c.lhs - 2 * (k * R - 1) / (R * R * 1.5 * 1.5)) < 1e-9 * c.lhs);
    CHECK(c.rel_err < prev);
    prev = c.rel_err;
  }

  prev = 1e9;
  for (double k : {10.0, 50.0, 250.0}) {
    const AsymptoticCheck c = asymptotic_check({0, 2}, k, parse_field("z1^2+(z2-2)^2"));
    CHECK(c.rhs == 0.0);
    CHECK(std::isnan(c.rel_err));
    CHECK(c.abs_err < prev);
    prev = c.abs_err;
  }
}
