#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hyploop/errors.hpp"
#include "hyploop/field.hpp"

using namespace hyploop;

TEST_CASE("parser examples and precedence") {
  CHECK(parse_field("1").eval(0.3, 2.0) == 1.0);
  CHECK(parse_field("1").is_constant());
  CHECK(parse_field("z1^2 + (z2-2)^2").eval(0, 2) == 0.0);
  CHECK(parse_field("tanh(z1)").eval(0, 1) == 0.0);
  CHECK(parse_field("2^3^2").eval(0, 1) == 512.0);
  CHECK(parse_field("-2^2").eval(0, 1) == -4.0);
  CHECK(parse_field("2^-1").eval(0, 1) == 0.5);
  CHECK(parse_field("1-2-3").eval(0, 1) == -4.0);
  CHECK(parse_field("8/4/2").eval(0, 1) == 1.0);
  CHECK(parse_field("2*z1 + z2/4").eval(3, 8) == 8.0);
  CHECK(parse_field(" sqrt ( z2 ) ").eval(0, 9) == 3.0);
  CHECK(parse_field("1.5e1").eval(0, 1) == 15.0);
}

TEST_CASE("syntax errors carry the offset") {
  auto offset_of = [](const char* s) -> long {
    try {
      parse_field(s);
    } catch (const SyntaxError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  CHECK(offset_of("z1+") == 3);
  CHECK(offset_of("2 z1") == 2);  // implicit multiplication
  CHECK(offset_of("foo(z1)") == 0);
  CHECK(offset_of("(z1") == 3);
  CHECK(offset_of("z3") == 0);
  CHECK(offset_of("") == 0);
  CHECK(offset_of("sin z1") >= 3);
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(parse_field("log(z1)").eval(-1, 1), EvalDomainError);
  CHECK_THROWS_AS(parse_field("sqrt(z1)").eval(-1, 1), EvalDomainError);
  CHECK_THROWS_AS(parse_field("1/z1").eval(0, 1), EvalDomainError);
  CHECK_THROWS_AS(parse_field("exp(z2)").eval(0, 1000), EvalDomainError);
}

TEST_CASE("printing round trip is bitwise") {
  const char* fields[] = {"z1^2+(z2-2)^2", "sin(z1)*exp(-z2)/ (1+z2^2)", "-z1^3 - -z2", "atan(z1/z2)+log(z2)",
                          "tanh(z1)*sqrt(z2)", "abs(z1-0.25)+0.1", "2^-z2^2", "1/3*z1 - 0.1*z2"};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> a(-3, 3), b(0.1, 4);
  for (const char* f : fields) {
    const FieldExpr e = parse_field(f);
    const FieldExpr r = parse_field(e.to_string());
    CHECK(r.to_string() == e.to_string());
    for (int i = 0; i < 100; ++i) {
      const double z1 = a(rng), z2 = b(rng);
      CHECK(r.eval(z1, z2) == e.eval(z1, z2));
    }
  }
}

TEST_CASE("batch evaluation equals pointwise evaluation") {
  const FieldExpr e = parse_field("sin(z1)*z2^2 + exp(-z1*z2)");
  std::vector<double> z1(37), z2(37), out(37);
  for (std::size_t i = 0; i < z1.size(); ++i) {
    z1[i] = 0.1 * static_cast<double>(i) - 1.5;
    z2[i] = 0.5 + 0.05 * static_cast<double>(i);
  }
  e.eval_batch(z1, z2, out);
  for (std::size_t i = 0; i < z1.size(); ++i) CHECK(out[i] == e.eval(z1[i], z2[i]));
}

TEST_CASE("symbolic gradient against central differences") {
  const char* fields[] = {"z1^2+(z2-2)^2", "z2", "sin(z1)*exp(-z2)", "atan(z1*z2)+log(z2)", "tanh(z1)/sqrt(z2)",
                          "z1^3*z2^-2", "cos(z1+z2)^2"};
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> a(-2, 2), b(0.3, 3);
  for (const char* f : fields) {
    const FieldExpr e = parse_field(f);
    const FieldGrad g = grad_field(e);
    for (int i = 0; i < 20; ++i) {
      const Vec2 z{a(rng), b(rng)};
      const double h = 1e-5;
      const Vec2 fd{(e.eval(z.x + h, z.y) - e.eval(z.x - h, z.y)) / (2 * h),
                    (e.eval(z.x, z.y + h) - e.eval(z.x, z.y - h)) / (2 * h)};
      const Vec2 s = g.eval(z);
      const double scale = std::max(1.0, norm(s));
      CHECK(norm(fd - s) / scale < 1e-6);
    }
  }
  const FieldGrad gz = grad_field(parse_field("z2"));
  CHECK(gz.eval({0.4, 1.3}) == Vec2{0, 1});
  const FieldGrad gq = grad_field(parse_field("z1^2+(z2-2)^2"));
  CHECK(gq.eval({0, 2}) == Vec2{0, 0});
}

TEST_CASE("hyperbolic and Euclidean gradients vanish together") {
  const FieldGrad g = grad_field(parse_field("z1^2+(z2-2)^2"));
  for (int i = -4; i <= 4; ++i)
    for (int j = 1; j <= 8; ++j) {
      const Vec2 z{0.5 * i, 0.5 * j};
      const bool e0 = norm(g.eval(z)) < 1e-14;
      const bool h0 = norm(hyperbolic_gradient(g, z)) < 1e-14;
      CHECK(e0 == h0);
      CHECK(norm(hyperbolic_gradient(g, z) - z.y * z.y * g.eval(z)) == 0.0);
    }
}

TEST_CASE("abs is differentiable only away from its kink") {
  const FieldExpr e = parse_field("abs(z1)+z2");
  CHECK(e.uses_abs());
  CHECK_THROWS_AS(grad_field(e), NonDifferentiable);
  CHECK_THROWS_AS(grad_field(e, RegionBox{-1, 1, 1, 2}), NonDifferentiable);
  const FieldGrad g = grad_field(e, RegionBox{0.5, 1, 1, 2});
  CHECK(g.eval({0.7, 1.5}) == Vec2{1, 1});
  CHECK(e.min_abs_argument(RegionBox{0.5, 1, 1, 2}, 8) == doctest::Approx(0.5));
  CHECK(std::isinf(parse_field("z1").min_abs_argument(RegionBox{0.5, 1, 1, 2}, 8)));
}

TEST_CASE("nonexistence evidence") {
  const RegionBox box{-2, 2, 0.5, 3};
  const auto t = check_nonexistence(parse_field("tanh(z1)"), box, 16);
  CHECK(t.sup_at_most_one);
  CHECK(t.e1_fixed_sign);
  CHECK(t.any());

  const auto one = check_nonexistence(parse_field("1"), box, 16);
  CHECK(one.sup_at_most_one);
  CHECK_FALSE(one.e1_fixed_sign);
  CHECK_FALSE(one.z_fixed_sign);
  CHECK_FALSE(one.z2_fixed_sign);

  const auto q = check_nonexistence(parse_field("z1^2+z2^2"), RegionBox{0.5, 2, 0.5, 2}, 16);
  CHECK(q.z_fixed_sign);
  CHECK_FALSE(q.sup_at_most_one);

  const auto bump = check_nonexistence(parse_field("3 + z1^2+(z2-2)^2"), RegionBox{-1, 1, 1, 3}, 16);
  CHECK_FALSE(bump.any());
}
