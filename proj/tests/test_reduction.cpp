#include <doctest.h>

#include <cmath>

#include "hyploop/errors.hpp"
#include "hyploop/functionals.hpp"
#include "hyploop/linearized.hpp"
#include "hyploop/reduction.hpp"
#include "oracles.hpp"

using namespace hyploop;

namespace {

const char* kQuadratic = "z1^2+(z2-2)^2";

double sample_moment(double k, std::size_t n) {
  double s = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 w = oracle::circle(k, sample_angle(j, n));
    s += dot(w, w);
  }
  return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("unperturbed reduction is trivial") {
  const HyperbolicModel m(2.0, parse_field(kQuadratic));
  for (Vec2 z : {Vec2{0, 1}, Vec2{-2, 4}, Vec2{0, 2}, Vec2{3, 0.5}}) {
    const ReductionState s = reduce_at(m, 0.0, z, 256);
    CHECK(s.converged);
    CHECK(s.iterations <= 1);
    CHECK(oracle::sup(s.eta) < 1e-12);
    CHECK(std::abs(s.t) < 1e-12);
    CHECK(norm(s.theta) < 1e-11);
    CHECK(norm(reduced_grad(m, s)) < 1e-10);
  }
}

TEST_CASE("perturbed reduction at a fixed center") {
  const FieldExpr K = parse_field(kQuadratic);
  const HyperbolicModel m(2.0, K);
  const Vec2 z{0, 2};
  const double moment = sample_moment(2.0, 256);
  CHECK(std::abs(reference_moment(2.0, 256) - moment) < 1e-14);
  std::vector<double> ratios;
  for (double eps : {1e-3, 5e-4, 2.5e-4}) {
    const ReductionState s = reduce_at(m, eps, z, 256);
    CHECK(s.converged);
    CHECK(std::abs(s.t) < 1e-11);
    for (double c : s.constraint_res) CHECK(std::abs(c) < 1e-11);
    ratios.push_back(oracle::sup(s.eta) / eps);

    const Loop u = reduced_loop(m, s);
    const Loop w = reference_loop(2.0, 256);
    CHECK(std::abs(oracle::inner(u.points(), w.velocities())) < 1e-11);
    CHECK(std::abs(oracle::inner(u.points(), VecField::constant(256, {1, 0})) - z.x) < 1e-11);
    CHECK(std::abs(oracle::inner(u.points(), w.points()) - z.y * moment) < 1e-11);

    // The residual of the reduced loop lies in span{e1, w}.
    VecField r = residual_J(u, 2.0, eps, K);
    r -= s.theta.x * VecField::constant(256, {1, 0});
    r -= s.theta.y * w.points();
    CHECK(oracle::sup(r) < 1e-10);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  CHECK(hi / lo < 1.3);
}

TEST_CASE("multipliers give the gradient of the reduced energy") {
  const HyperbolicModel m(2.0, parse_field(kQuadratic));
  const double eps = 0.01;
  const Vec2 z{0.3, 1.8};
  const ReductionState s = reduce_at(m, eps, z, 256);
  const Vec2 g = reduced_grad(m, s);
  const double h = 1e-4;
  auto E = [&](Vec2 c) {
    const ReductionState t = reduce_at(m, eps, c, 256, &s);
    return m.energy(reduced_loop(m, t), eps).total;
  };
  const Vec2 fd{(E({z.x + h, z.y}) - E({z.x - h, z.y})) / (2 * h), (E({z.x, z.y + h}) - E({z.x, z.y - h})) / (2 * h)};
  CHECK(std::abs(fd.x - g.x) / std::abs(g.x) < 1e-4);
  CHECK(std::abs(fd.y - g.y) / std::abs(g.y) < 1e-4);

  const ReductionState sym = reduce_at(m, eps, {0.0, 1.8}, 256);
  CHECK(std::abs(reduced_grad(m, sym).x) < 1e-9);
}

TEST_CASE("reduced energy approaches minus the Melnikov function") {
  const double k = 2.0, R = 1 / std::sqrt(3.0);
  const HyperbolicModel one(k, parse_field("1"));
  double prev = 1e9;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const double d = std::abs(reduced_energy_G(one, reduce_at(one, eps, {0.2, 1.5}, 256)) + 2 * oracle::pi * (k * R - 1));
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-4);

  const FieldExpr K = parse_field(kQuadratic);
  const HyperbolicModel m(k, K);
  prev = 1e9;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    double sup = 0;
    for (double z1 : {-0.5, 0.0, 0.5})
      for (double z2 : {1.5, 2.0, 2.5}) {
        const ReductionState s = reduce_at(m, eps, {z1, z2}, 256);
        sup = std::max(sup, std::abs(reduced_energy_G(m, s) + melnikov_F({z1, z2}, k, K)));
      }
    CHECK(sup < prev);
    prev = sup;
  }
  CHECK_THROWS_AS(reduced_energy_G(m, reduce_at(m, 0.0, {0, 2}, 256)), DomainError);
}

TEST_CASE("reduction fails loudly for large perturbations") {
  const HyperbolicModel m(2.0, parse_field(kQuadratic));
  CHECK_THROWS_AS(reduce_at(m, 50.0, {0, 2}, 256), NewtonDiverged);
  CHECK_THROWS_AS(reduce_at(m, 0.01, {0, -1}, 256), DomainError);
}

TEST_CASE("full solve at the unperturbed level returns the circle") {
  const HyperbolicModel m(2.0, parse_field(kQuadratic));
  SolveOptions opt;
  opt.grid = 12;
  const SolveReport r = solve_full(m, 0.0, {-1, 1, 1, 3}, opt);
  CHECK(r.to_seed_circle.c2 < 1e-10);
  CHECK(r.verify.winding == 1);
  CHECK(r.verify.embedded);
  CHECK(r.z_critical == r.seed);
}

TEST_CASE("full solve for the quadratic field") {
  const FieldExpr K = parse_field(kQuadratic);
  const HyperbolicModel m(2.0, K);
  SolveOptions opt;
  opt.grid = 12;
  const SolveReport r = solve_full(m, 0.01, {-1, 1, 1, 3}, opt);
  CHECK(r.verify.winding == 1);
  CHECK(r.verify.embedded);
  CHECK(r.verify.curvature_defect < 1e-8);
  CHECK(r.verify.speed_defect < 1e-9);
  CHECK(r.verify.residual_sup < 1e-9);
  for (double x : r.verify.killing) CHECK(std::abs(x) < 1e-8);
  for (double x : r.necessary) CHECK(std::abs(x) < 1e-8);
  CHECK(std::abs(r.state.t) < 1e-10);
  CHECK(std::abs(r.z_critical.x) < 1e-8);
  CHECK(norm(reduced_grad(m, r.state)) < 1e-10);

  // Direct check of the curvature against the field, independent of verify.
  const auto kappa = geodesic_curvature(r.loop);
  for (std::size_t j = 0; j < kappa.size(); ++j)
    CHECK(std::abs(kappa[j] - (2.0 + 0.01 * K.eval(r.loop.point(j)))) < 1e-8);
}

TEST_CASE("constant field has nothing to solve") {
  const HyperbolicModel m(2.0, parse_field("1"));
  SolveOptions opt;
  opt.grid = 6;
  CHECK_THROWS_AS(solve_full(m, 0.01, {-1, 1, 1, 3}, opt), NoCritical);
}

TEST_CASE("continuation in the perturbation size") {
  const HyperbolicModel m(2.0, parse_field(kQuadratic));
  SolveOptions opt;
  opt.grid = 12;
  const ContinuationResult ok = continue_eps(m, {-1, 1, 1, 3}, {0.05, 0.001, 0.01}, opt);
  CHECK_FALSE(ok.truncated);
  REQUIRE(ok.reports.size() == 3);
  CHECK(ok.reports[0].eps == 0.001);
  CHECK(ok.eps_bar == 0.05);
  for (const auto& r : ok.reports) CHECK(r.verify.curvature_defect < 1e-8);

  const ContinuationResult bad = continue_eps(m, {-1, 1, 1, 3}, {0.01, 5.0}, opt);
  CHECK(bad.truncated);
  CHECK(bad.reports.size() == 1);
  CHECK(bad.eps_bar == 0.01);
  CHECK(bad.failed_eps == 5.0);
  CHECK_FALSE(bad.failure.empty());

  const ContinuationResult neg = continue_eps(m, {-1, 1, 1, 3}, {-0.01}, opt);
  REQUIRE(neg.reports.size() == 1);
  CHECK(std::abs(neg.reports[0].z_critical.x) < 1e-8);
  CHECK(neg.reports[0].verify.curvature_defect < 1e-8);
}
