#include "hyploop/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "hyploop/errors.hpp"

namespace hyploop {
namespace {

using Vec = std::vector<double>;

// Unknown vector layout: eta.x (n), eta.y (n), t, theta1, theta2.
struct Layout {
  std::size_t n;
  std::size_t size() const { return 2 * n + 3; }
};

VecField field_part(const Vec& v, std::size_t n) {
  return {Vec(v.begin(), v.begin() + n), Vec(v.begin() + n, v.begin() + 2 * n)};
}

Vec pack(const VecField& f, double a, double b, double c) {
  Vec v(f.x);
  v.insert(v.end(), f.y.begin(), f.y.end());
  v.push_back(a);
  v.push_back(b);
  v.push_back(c);
  return v;
}

double sup(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

class System {
 public:
  System(const LoopModel& model, double eps, Vec2 z, std::size_t n)
      : model_(model), eps_(eps), z_(z), n_(n), base_(model.reference(z, n)), tau_(model.tangent(n)) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gram_(i, j) = mean_dot(tau_[i], tau_[j]);
    gram_ldlt_.compute(gram_);
  }

  const Loop& base() const { return base_; }

  std::optional<Loop> loop_at(const Vec& x) const {
    Loop u = base_.perturbed(field_part(x, n_));
    if (!model_.admissible(u)) return std::nullopt;
    return u;
  }

  /// Throws StepTooLarge when x is outside the admissible set.
  Vec eval(const Vec& x) const {
    const auto u = loop_at(x);
    if (!u) throw StepTooLarge("iterate left the admissible region");
    VecField f1 = model_.residual(*u, eps_);
    const std::size_t m = 2 * n_;
    for (int i = 0; i < 3; ++i) f1.add_scaled(-x[m + i], tau_[i]);
    const VecField eta = field_part(x, n_);
    return pack(f1, mean_dot(eta, tau_[0]), mean_dot(eta, tau_[1]), mean_dot(eta, tau_[2]));
  }

  Vec jvp(const Vec& x, const Vec& v) const {
    const double nv = sup(v);
    if (nv == 0.0) return Vec(v.size(), 0.0);
    const double h = 1e-6 * (1.0 + sup(x)) / nv;
    Vec xp(x), xm(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] += h * v[i];
      xm[i] -= h * v[i];
    }
    const Vec fp = eval(xp), fm = eval(xm);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (fp[i] - fm[i]) / (2.0 * h);
    return out;
  }

  /// Exact inverse of the linearization at x = 0, eps = 0.
  Vec precondition(const Vec& r) const {
    const VecField r1 = field_part(r, n_);
    const std::size_t m = 2 * n_;
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) b(i) = mean_dot(r1, tau_[i]);
    const Eigen::Vector3d c = -gram_ldlt_.solve(b);
    VecField rhs = r1;
    for (int i = 0; i < 3; ++i) rhs.add_scaled(c(i), tau_[i]);
    VecField phi = model_.solve_linearized(z_, rhs);
    const Eigen::Vector3d a = gram_ldlt_.solve(Eigen::Vector3d(r[m], r[m + 1], r[m + 2]));
    for (int i = 0; i < 3; ++i) phi.add_scaled(a(i), tau_[i]);
    return pack(phi, c(0), c(1), c(2));
  }

  double dot(const Vec& a, const Vec& b) const {
    const std::size_t m = 2 * n_;
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a[i] * b[i];
    s /= static_cast<double>(n_);
    for (std::size_t i = m; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

 private:
  const LoopModel& model_;
  double eps_;
  Vec2 z_;
  std::size_t n_;
  Loop base_;
  std::array<VecField, 3> tau_;
  Eigen::Matrix3d gram_;
  Eigen::LDLT<Eigen::Matrix3d> gram_ldlt_;
};

// Restarted GMRES with right preconditioning in the System inner product.
Vec gmres(const System& sys, const Vec& x, const Vec& b, const ReduceOptions& opt) {
  const std::size_t len = b.size();
  Vec sol(len, 0.0);
  auto nrm = [&](const Vec& v) { return std::sqrt(sys.dot(v, v)); };
  const double bnorm = nrm(b);
  if (bnorm == 0.0) return sol;
  int used = 0;
  Vec r = b;
  while (used < opt.gmres_max) {
    const double beta = nrm(r);
    if (beta <= opt.gmres_rtol * bnorm) break;
    const int m = std::min(opt.gmres_restart, opt.gmres_max - used);
    std::vector<Vec> v(1, r);
    for (double& e : v[0]) e /= beta;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    std::vector<double> cs(m), sn(m);
    g(0) = beta;
    int k = 0;
    for (; k < m; ++k) {
      Vec w = sys.jvp(x, sys.precondition(v[k]));
      for (int i = 0; i <= k; ++i) {
        h(i, k) = sys.dot(w, v[i]);
        for (std::size_t e = 0; e < len; ++e) w[e] -= h(i, k) * v[i][e];
      }
      h(k + 1, k) = nrm(w);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double d = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = d == 0.0 ? 1.0 : h(k, k) / d;
      sn[k] = d == 0.0 ? 0.0 : h(k + 1, k) / d;
      const double hk1 = h(k + 1, k);
      h(k, k) = cs[k] * h(k, k) + sn[k] * hk1;
      h(k + 1, k) = 0.0;
      g(k + 1) = -sn[k] * g(k);
      g(k) = cs[k] * g(k);
      ++used;
      const double res = std::abs(g(k + 1));
      if (res <= opt.gmres_rtol * bnorm || h(k, k) == 0.0 || hk1 == 0.0) {
        ++k;
        break;
      }
      for (double& e : w) e /= hk1;
      v.push_back(std::move(w));
    }
    const Eigen::VectorXd y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Vec comb(len, 0.0);
    for (int i = 0; i < k; ++i)
      for (std::size_t e = 0; e < len; ++e) comb[e] += y(i) * v[i][e];
    const Vec dx = sys.precondition(comb);
    for (std::size_t e = 0; e < len; ++e) sol[e] += dx[e];
    const Vec ax = sys.jvp(x, sol);
    for (std::size_t e = 0; e < len; ++e) r[e] = b[e] - ax[e];
  }
  return sol;
}

ReductionState state_from(const Vec& x, const Vec& f, std::size_t n, double eps, Vec2 z) {
  ReductionState s;
  s.eps = eps;
  s.z = z;
  s.eta = field_part(x, n);
  const std::size_t m = 2 * n;
  s.t = x[m];
  s.theta = {x[m + 1], x[m + 2]};
  s.residual_sup = 0.0;
  for (std::size_t i = 0; i < m; ++i) s.residual_sup = std::max(s.residual_sup, std::abs(f[i]));
  s.constraint_res = {f[m], f[m + 1], f[m + 2]};
  return s;
}

LoopDistance distance_to(const Loop& u, const Loop& w) { return loop_distance(u, w); }

}  // namespace

ReductionState reduce_at(const LoopModel& model, double eps, Vec2 z, std::size_t n, const ReductionState* warm,
                         const ReduceOptions& opt) {
  model.check_center(z);
  const System sys(model, eps, z, n);
  const Layout lay{n};
  Vec x(lay.size(), 0.0);
  if (warm != nullptr && warm->eta.size() == n) x = pack(warm->eta, warm->t, warm->theta.x, warm->theta.y);

  // J_0 vanishes exactly at the circle, so its computed value measures the
  // rounding floor of the residual at this center. Below twice that floor
  // Newton steps only reshuffle noise.
  const double floor = sup_norm(model.residual(sys.base(), 0.0));
  const double target = std::max(opt.tol, 2.0 * floor);
  Vec f = sys.eval(x);
  double r = sup(f);
  const double r0 = r;
  Vec best_x = x, best_f = f;
  double best_r = r;
  int stalled = 0;
  int it = 0;
  auto finish = [&](bool at_floor) {
    ReductionState s = state_from(best_x, best_f, n, eps, z);
    s.noise_floor = floor;
    s.iterations = it;
    s.converged = true;
    s.at_floor = at_floor;
    return s;
  };
  for (;; ++it) {
    if (r < target) return finish(false);
    if (it >= opt.max_iter || stalled >= 3) {
      if (best_r < 10.0 * target) return finish(true);
      throw NewtonDiverged("reduction Newton stalled at residual " + std::to_string(best_r));
    }
    Vec rhs(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
    const Vec dx = gmres(sys, x, rhs, opt);
    double lambda = 1.0;
    Vec trial(x.size());
    bool ok = false;
    for (int halve = 0; halve <= 20; ++halve) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + lambda * dx[i];
      if (sys.loop_at(trial)) {
        ok = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!ok) throw StepTooLarge("Newton step leaves the half-plane; try a smaller |eps|");
    x = trial;
    f = sys.eval(x);
    const double rn = sup(f);
    if (!std::isfinite(rn) || rn > 1e6 * std::max(r0, 1.0)) throw NewtonDiverged("reduction Newton diverged");
    stalled = rn > 0.5 * r ? stalled + 1 : 0;
    r = rn;
    if (r < best_r) {
      best_r = r;
      best_x = x;
      best_f = f;
    }
  }
}

ReductionState reduce_at(double eps, const HyperPoint& z, double k, const FieldExpr& field, std::size_t n) {
  return reduce_at(HyperbolicModel(k, field), eps, z.vec(), n);
}

Loop reduced_loop(const LoopModel& model, const ReductionState& s) {
  return model.reference(s.z, s.eta.size()).perturbed(s.eta);
}

double reduced_energy_G(const LoopModel& model, const ReductionState& s) {
  if (s.eps == 0.0) throw DomainError("reduced energy needs eps != 0");
  const double e = model.energy(reduced_loop(model, s), s.eps).total;
  return 2.0 * std::numbers::pi / s.eps * (e - model.reference_energy());
}

Vec2 reduced_grad(const LoopModel& model, const ReductionState& s) {
  const double len = model.length(reduced_loop(model, s));
  const Vec2 sc = model.reduced_scale(s.eta.size());
  return {s.theta.x * sc.x / len, s.theta.y * sc.y / len};
}

SolveReport solve_from(const LoopModel& model, double eps, Vec2 seed, const SolveOptions& opt,
                       const ReductionState* warm) {
  model.check_center(seed);
  const std::size_t n = opt.n;
  Vec2 z = seed;
  ReductionState st = reduce_at(model, eps, z, n, warm, opt.reduce);
  int iter = 0;
  if (eps != 0.0) {
    for (;; ++iter) {
      const Vec2 g = reduced_grad(model, st);
      if (std::max(std::abs(st.theta.x), std::abs(st.theta.y)) < opt.theta_tol) break;
      if (iter >= opt.max_center_iter) throw NewtonDiverged("center Newton did not converge");
      const double h = 1e-5 * std::max(1.0, norm(z));
      Eigen::Matrix2d jac;
      for (int c = 0; c < 2; ++c) {
        const Vec2 dz = c == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
        const Vec2 gp = reduced_grad(model, reduce_at(model, eps, z + dz, n, &st, opt.reduce));
        const Vec2 gm = reduced_grad(model, reduce_at(model, eps, z - dz, n, &st, opt.reduce));
        jac(0, c) = (gp.x - gm.x) / (2.0 * h);
        jac(1, c) = (gp.y - gm.y) / (2.0 * h);
      }
      const Eigen::Vector2d step = jac.fullPivLu().solve(Eigen::Vector2d(g.x, g.y));
      if (!step.allFinite()) throw NewtonDiverged("singular reduced Hessian");
      const Vec2 znew = z - Vec2{step(0), step(1)};
      model.check_center(znew);
      const bool tiny = norm(znew - z) < 1e-14 * std::max(1.0, norm(z));
      z = znew;
      st = reduce_at(model, eps, z, n, &st, opt.reduce);
      if (tiny) break;
    }
  }
  Loop u = reduced_loop(model, st);
  const VerifyReport vr = model.verify(u, eps);
  if (vr.winding != 1 || !vr.embedded)
    throw NotEmbedded("solution found but it is not an embedded simple loop (winding " +
                      std::to_string(vr.winding) + ")");
  if (!(vr.residual_sup < 1e-9)) throw NewtonDiverged("full residual above 1e-9 after reduction");

  std::vector<double> kv(u.size());
  model.field().eval_batch(u.x(), u.y(), kv);
  std::vector<double> a(u.size()), b(u.size());
  const bool hyperbolic = model.name() == "hyperbolic";
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec2 p = u.point(j);
    const Vec2 iv = rot(u.velocity(j));
    const double w = hyperbolic ? kv[j] / (p.y * p.y) : kv[j];
    a[j] = w * iv.x;
    b[j] = w * dot(p, iv);
  }
  SolveReport rep{u, vr, st, seed, z, eps, iter, distance_to(u, model.reference(seed, n)),
                  distance_to(u, model.reference(z, n)), {mean(a), mean(b)}};
  return rep;
}

SolveReport solve_full(const LoopModel& model, double eps, const RegionBox& box, const SolveOptions& opt) {
  box.validate(model.name() == "hyperbolic");
  const CriticalSearch cs = find_critical(model.melnikov(), box, opt.grid, opt.threads);
  for (const auto& p : cs.points)
    if (p.kind != CriticalKind::degenerate && p.kind != CriticalKind::none) return solve_from(model, eps, p.z, opt);
  throw NoCritical(cs.constant ? "F constant, no critical point" : "no nondegenerate critical point in region");
}

ContinuationResult continue_eps(const LoopModel& model, const RegionBox& box, std::vector<double> eps_targets,
                                const SolveOptions& opt) {
  std::stable_sort(eps_targets.begin(), eps_targets.end(),
                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  ContinuationResult out;
  for (const double eps : eps_targets) {
    try {
      if (out.reports.empty()) {
        out.reports.push_back(solve_full(model, eps, box, opt));
      } else {
        const SolveReport& prev = out.reports.back();
        ReductionState warm = prev.state;
        if (prev.eps != 0.0) {
          const double s = eps / prev.eps;
          warm.eta *= s;
          warm.t *= s;
          warm.theta = s * warm.theta;
        }
        out.reports.push_back(solve_from(model, eps, prev.z_critical, opt, &warm));
      }
      out.eps_bar = std::max(out.eps_bar, std::abs(eps));
    } catch (const Error& e) {
      if (out.reports.empty() && dynamic_cast<const NoCritical*>(&e) != nullptr) throw;
      out.truncated = true;
      out.failed_eps = eps;
      out.failure = e.what();
      break;
    }
  }
  return out;
}

}  // namespace hyploop
