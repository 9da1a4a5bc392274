#include "hyploop/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "hyploop/errors.hpp"
#include "hyploop/quadrature.hpp"

namespace hyploop {
namespace {

struct MappedRule {
  std::vector<double> x, y, w, q1, shift;  // shift = q2 + kR
};

MappedRule map_rule(const HyperPoint& z, double k, int radial, int angular) {
  const double r = reference_radius(k);
  const double kr = k * r;
  const quad::DiskRule d = quad::disk_rule(r, radial, angular);
  MappedRule m;
  const std::size_t n = d.points.size();
  m.x.resize(n);
  m.y.resize(n);
  m.w.resize(n);
  m.q1.resize(n);
  m.shift.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 q = d.points[i];
    const double s = q.y + kr;
    m.x[i] = z.z2() * q.x + z.z1();
    m.y[i] = z.z2() * s;
    m.q1[i] = q.x;
    m.shift[i] = s;
    m.w[i] = d.weights[i] / (s * s);
  }
  return m;
}

double weighted_sum(const MappedRule& m, const FieldExpr& f) {
  std::vector<double> v(m.x.size());
  f.eval_batch(m.x, m.y, v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += m.w[i] * v[i];
  return s;
}

double raw_F(const HyperPoint& z, double k, const FieldExpr& f, int radial, int angular) {
  return weighted_sum(map_rule(z, k, radial, angular), f);
}

Eigen::Matrix2d fd_hessian(const Objective& obj, Vec2 z) {
  const double h = 1e-5 * std::max(1.0, norm(z));
  Eigen::Matrix2d hs;
  const Vec2 gx = obj.gradient({z.x + h, z.y}) - obj.gradient({z.x - h, z.y});
  const Vec2 gy = obj.gradient({z.x, z.y + h}) - obj.gradient({z.x, z.y - h});
  hs << gx.x, gy.x, gx.y, gy.y;
  hs /= 2.0 * h;
  return 0.5 * (hs + hs.transpose());
}

CriticalKind classify(const Eigen::Matrix2d& h) {
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (scale == 0.0 || ev.cwiseAbs().minCoeff() < 1e-7 * scale) return CriticalKind::degenerate;
  if (ev(0) > 0.0) return CriticalKind::min;
  if (ev(1) < 0.0) return CriticalKind::max;
  return CriticalKind::saddle;
}

}  // namespace

std::string_view to_string(CriticalKind c) {
  switch (c) {
    case CriticalKind::min: return "min";
    case CriticalKind::max: return "max";
    case CriticalKind::saddle: return "saddle";
    case CriticalKind::degenerate: return "degenerate";
    case CriticalKind::none: break;
  }
  return "none";
}

double melnikov_F(const HyperPoint& z, double k, const FieldExpr& field, DiskQuadrature q) {
  const double full = raw_F(z, k, field, q.radial, q.angular);
  const double half = raw_F(z, k, field, std::max(1, q.radial / 2), std::max(1, q.angular / 2));
  if (!std::isfinite(full) || std::abs(full - half) > 1e-9 * std::max(1.0, std::abs(full)))
    throw QuadratureFailure("disk quadrature did not settle; field too rough for the rule");
  return full;
}

Vec2 melnikov_grad(const HyperPoint& z, double k, const FieldGrad& grad, DiskQuadrature q) {
  const MappedRule m = map_rule(z, k, q.radial, q.angular);
  const std::size_t n = m.x.size();
  std::vector<double> d1(n), d2(n);
  grad.d1.eval_batch(m.x, m.y, d1);
  grad.d2.eval_batch(m.x, m.y, d2);
  double g1 = 0.0, g2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g1 += m.w[i] * d1[i];
    g2 += m.w[i] * (d1[i] * m.q1[i] + d2[i] * m.shift[i]);
  }
  return {g1, g2};
}

Vec2 melnikov_grad(const HyperPoint& z, double k, const FieldExpr& field, DiskQuadrature q) {
  return melnikov_grad(z, k, grad_field(field), q);
}

Objective melnikov_objective(double k, const FieldExpr& field, DiskQuadrature q) {
  reference_radius(k);
  auto grad = std::make_shared<FieldGrad>(grad_field(field));
  Objective o;
  o.value = [k, field, q](Vec2 z) { return melnikov_F(HyperPoint(z.x, z.y), k, field, q); };
  o.gradient = [k, grad, q](Vec2 z) { return melnikov_grad(HyperPoint(z.x, z.y), k, *grad, q); };
  o.constant = field.is_constant();
  return o;
}

CriticalSearch find_critical(const Objective& obj, const RegionBox& box, int grid, int threads) {
  if (grid < 2) throw DomainError("grid must have at least 2 nodes per axis");
  if (threads < 1) throw DomainError("thread count must be positive");
  CriticalSearch out;
  const std::size_t g = static_cast<std::size_t>(grid);
  out.grid.resize(g * g);
  // Each worker fills a strided set of slots; the first error is rethrown.
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&](std::size_t first) {
    try {
      for (std::size_t idx = first; idx < g * g; idx += static_cast<std::size_t>(threads)) {
        const Vec2 z = box.node(static_cast<int>(idx / g), static_cast<int>(idx % g), grid);
        out.grid[idx] = GridNode{z, obj.value(z), obj.gradient(z)};
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, static_cast<std::size_t>(t));
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  double gmax = 0.0, fmax = 0.0;
  for (const auto& node : out.grid) {
    gmax = std::max(gmax, norm(node.grad));
    fmax = std::max(fmax, std::abs(node.value));
  }
  auto at = [&](int i, int j) -> const GridNode& { return out.grid[static_cast<std::size_t>(i) * g + j]; };

  // Sampled boundary test on F.
  double in_min = INFINITY, in_max = -INFINITY, bd_min = INFINITY, bd_max = -INFINITY;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double v = at(i, j).value;
      const bool edge = i == 0 || j == 0 || i == grid - 1 || j == grid - 1;
      (edge ? bd_min : in_min) = std::min(edge ? bd_min : in_min, v);
      (edge ? bd_max : in_max) = std::max(edge ? bd_max : in_max, v);
    }
  out.interior_min = in_min < bd_min;
  out.interior_max = in_max > bd_max;

  if (obj.constant || gmax <= 1e-13 * std::max(1.0, fmax)) {
    out.constant = true;
    out.interior_min = out.interior_max = false;
    out.note = "F constant";
    return out;
  }

  // Local minima of |grad|; on ties the lowest (z1, then z2) index wins.
  std::vector<Vec2> seeds;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double here = norm(at(i, j).grad);
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= grid || b >= grid) continue;
          const double there = norm(at(a, b).grad);
          const bool earlier = a < i || (a == i && b < j);
          if (there < here || (earlier && there == here)) {
            is_min = false;
            break;
          }
        }
      if (is_min) seeds.push_back(at(i, j).z);
    }

  for (const Vec2 seed : seeds) {
    Vec2 z = seed;
    MelnikovSample s;
    bool ok = false;
    try {
      for (int it = 0; it < 40; ++it) {
        s.grad = obj.gradient(z);
        s.iterations = it;
        if (norm(s.grad) < 1e-10) {
          ok = true;
          break;
        }
        const Eigen::Matrix2d h = fd_hessian(obj, z);
        const Eigen::Vector2d step = h.fullPivLu().solve(Eigen::Vector2d(s.grad.x, s.grad.y));
        if (!step.allFinite()) break;
        z = z - Vec2{step(0), step(1)};
        if (!std::isfinite(z.x) || !(z.y > 0.0)) break;
      }
    } catch (const Error&) {
      ok = false;
    }
    if (!ok || !box.contains(z)) continue;
    const bool dup = std::any_of(out.points.begin(), out.points.end(), [&](const MelnikovSample& p) {
      return norm(p.z - z) < 1e-6 * std::max(1.0, norm(z));
    });
    if (dup) continue;
    s.z = z;
    s.value = obj.value(z);
    s.hess = fd_hessian(obj, z);
    s.kind = classify(s.hess);
    out.points.push_back(s);
  }
  std::sort(out.points.begin(), out.points.end(), [](const MelnikovSample& a, const MelnikovSample& b) {
    return a.z.x != b.z.x ? a.z.x < b.z.x : a.z.y < b.z.y;
  });
  if (out.points.empty()) out.note = "no critical point in region";
  return out;
}

CriticalSearch find_critical(double k, const FieldExpr& field, const RegionBox& box, int grid, DiskQuadrature q,
                             int threads) {
  box.validate();
  return find_critical(melnikov_objective(k, field, q), box, grid, threads);
}

AsymptoticCheck asymptotic_check(const HyperPoint& z, double k, const FieldExpr& field) {
  const double r = reference_radius(k);
  const double z22 = z.z2() * z.z2();
  AsymptoticCheck a;
  a.lhs = melnikov_F(z, k, field) / (std::numbers::pi * r * r * z22);
  a.rhs = field.eval(z.vec()) / z22;
  a.abs_err = std::abs(a.lhs - a.rhs);
  a.rel_err = a.rhs != 0.0 ? a.abs_err / std::abs(a.rhs) : std::numeric_limits<double>::quiet_NaN();
  return a;
}

}  // namespace hyploop
