#include "hyploop/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <vector>

#include "hyploop/errors.hpp"
#include "hyploop/simd/kernels.hpp"

namespace hyploop {
namespace detail {

enum class Op { num, var, neg, add, sub, mul, div, pow, fn };
enum class Fn { sin, cos, exp, log, tanh, atan, sqrt, abs, sign };

struct Node {
  Op op;
  double value = 0.0;
  int var = 0;
  Fn fn = Fn::sin;
  std::shared_ptr<const Node> a = nullptr;
  std::shared_ptr<const Node> b = nullptr;
};

}  // namespace detail

namespace {

using detail::Fn;
using detail::Node;
using detail::Op;
using NodeP = std::shared_ptr<const Node>;

struct FnName {
  std::string_view name;
  Fn fn;
};
constexpr FnName kFunctions[] = {{"sin", Fn::sin},   {"cos", Fn::cos},   {"exp", Fn::exp},
                                 {"log", Fn::log},   {"tanh", Fn::tanh}, {"atan", Fn::atan},
                                 {"sqrt", Fn::sqrt}, {"abs", Fn::abs},   {"sign", Fn::sign}};

std::string_view fn_name(Fn f) {
  for (const auto& e : kFunctions)
    if (e.fn == f) return e.name;
  return "?";
}

NodeP num(double v) { return std::make_shared<Node>(Node{Op::num, v}); }
NodeP var(int i) { return std::make_shared<Node>(Node{Op::var, 0.0, i}); }
NodeP unary(Op op, NodeP a) { return std::make_shared<Node>(Node{op, 0.0, 0, Fn::sin, std::move(a)}); }
NodeP binary(Op op, NodeP a, NodeP b) {
  return std::make_shared<Node>(Node{op, 0.0, 0, Fn::sin, std::move(a), std::move(b)});
}
NodeP call(Fn f, NodeP a) { return std::make_shared<Node>(Node{Op::fn, 0.0, 0, f, std::move(a)}); }

bool is_num(const NodeP& n, double v) { return n->op == Op::num && n->value == v; }

// Builders with 0/1 folding, used by differentiation only.
NodeP s_neg(NodeP a) {
  if (is_num(a, 0.0)) return a;
  if (a->op == Op::neg) return a->a;
  return unary(Op::neg, std::move(a));
}
NodeP s_add(NodeP a, NodeP b) {
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  return binary(Op::add, std::move(a), std::move(b));
}
NodeP s_sub(NodeP a, NodeP b) {
  if (is_num(b, 0.0)) return a;
  if (is_num(a, 0.0)) return s_neg(std::move(b));
  return binary(Op::sub, std::move(a), std::move(b));
}
NodeP s_mul(NodeP a, NodeP b) {
  if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  return binary(Op::mul, std::move(a), std::move(b));
}
NodeP s_div(NodeP a, NodeP b) {
  if (is_num(a, 0.0)) return num(0.0);
  if (is_num(b, 1.0)) return a;
  return binary(Op::div, std::move(a), std::move(b));
}

bool has_var(const NodeP& n) {
  if (!n) return false;
  if (n->op == Op::var) return true;
  return has_var(n->a) || has_var(n->b);
}

bool has_fn(const NodeP& n, Fn f) {
  if (!n) return false;
  if (n->op == Op::fn && n->fn == f) return true;
  return has_fn(n->a, f) || has_fn(n->b, f);
}

NodeP diff(const NodeP& n, int v) {
  switch (n->op) {
    case Op::num: return num(0.0);
    case Op::var: return num(n->var == v ? 1.0 : 0.0);
    case Op::neg: return s_neg(diff(n->a, v));
    case Op::add: return s_add(diff(n->a, v), diff(n->b, v));
    case Op::sub: return s_sub(diff(n->a, v), diff(n->b, v));
    case Op::mul: return s_add(s_mul(diff(n->a, v), n->b), s_mul(n->a, diff(n->b, v)));
    case Op::div: {
      // (a' b - a b') / b^2
      NodeP top = s_sub(s_mul(diff(n->a, v), n->b), s_mul(n->a, diff(n->b, v)));
      return s_div(std::move(top), binary(Op::mul, n->b, n->b));
    }
    case Op::pow: {
      const NodeP& u = n->a;
      const NodeP& e = n->b;
      NodeP du = diff(u, v);
      if (!has_var(e)) {
        NodeP lowered = e->op == Op::num ? num(e->value - 1.0) : binary(Op::sub, e, num(1.0));
        NodeP p = is_num(lowered, 1.0) ? u : binary(Op::pow, u, std::move(lowered));
        return s_mul(s_mul(e, std::move(p)), std::move(du));
      }
      // u^e (e' log u + e u' / u)
      NodeP inner = s_add(s_mul(diff(e, v), call(Fn::log, u)), s_div(s_mul(e, std::move(du)), u));
      return s_mul(n, std::move(inner));
    }
    case Op::fn: {
      const NodeP& u = n->a;
      NodeP du = diff(u, v);
      if (is_num(du, 0.0)) return du;
      switch (n->fn) {
        case Fn::sin: return s_mul(call(Fn::cos, u), du);
        case Fn::cos: return s_neg(s_mul(call(Fn::sin, u), du));
        case Fn::exp: return s_mul(n, du);
        case Fn::log: return s_div(du, u);
        case Fn::tanh: return s_mul(binary(Op::sub, num(1.0), binary(Op::mul, n, n)), du);
        case Fn::atan: return s_div(du, binary(Op::add, num(1.0), binary(Op::mul, u, u)));
        case Fn::sqrt: return s_div(du, binary(Op::mul, num(2.0), n));
        case Fn::abs: return s_mul(call(Fn::sign, u), du);
        case Fn::sign: return num(0.0);
      }
    }
  }
  return num(0.0);
}

[[noreturn]] void domain_fail(const char* what) { throw EvalDomainError(what); }

double checked(double r, const char* what) {
  if (!std::isfinite(r)) domain_fail(what);
  return r;
}

double apply_fn(Fn f, double x) {
  switch (f) {
    case Fn::sin: return std::sin(x);
    case Fn::cos: return std::cos(x);
    case Fn::exp: return std::exp(x);
    case Fn::log:
      if (!(x > 0.0)) domain_fail("log of a non-positive number");
      return std::log(x);
    case Fn::tanh: return std::tanh(x);
    case Fn::atan: return std::atan(x);
    case Fn::sqrt:
      if (x < 0.0) domain_fail("sqrt of a negative number");
      return std::sqrt(x);
    case Fn::abs: return std::abs(x);
    case Fn::sign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  }
  return 0.0;
}

double apply_pow(double b, double e) {
  if (b == 0.0 && e < 0.0) domain_fail("zero raised to a negative power");
  if (b < 0.0 && e != std::trunc(e)) domain_fail("negative base with non-integer exponent");
  return std::pow(b, e);
}

double eval_node(const Node& n, double z1, double z2) {
  switch (n.op) {
    case Op::num: return n.value;
    case Op::var: return n.var == 0 ? z1 : z2;
    case Op::neg: return -eval_node(*n.a, z1, z2);
    case Op::add: return checked(eval_node(*n.a, z1, z2) + eval_node(*n.b, z1, z2), "overflow");
    case Op::sub: return checked(eval_node(*n.a, z1, z2) - eval_node(*n.b, z1, z2), "overflow");
    case Op::mul: return checked(eval_node(*n.a, z1, z2) * eval_node(*n.b, z1, z2), "overflow");
    case Op::div: {
      const double a = eval_node(*n.a, z1, z2);
      const double b = eval_node(*n.b, z1, z2);
      if (b == 0.0) domain_fail("division by zero");
      return checked(a / b, "overflow");
    }
    case Op::pow:
      return checked(apply_pow(eval_node(*n.a, z1, z2), eval_node(*n.b, z1, z2)), "overflow in power");
    case Op::fn: return checked(apply_fn(n.fn, eval_node(*n.a, z1, z2)), "overflow in function");
  }
  return 0.0;
}

void check_all_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) domain_fail(what);
}

// Node-at-a-time evaluation over whole arrays. Arithmetic goes through the
// SIMD kernel table; results match eval_node exactly because every step is a
// single correctly rounded operation in both paths.
std::vector<double> eval_batch_node(const Node& n, std::span<const double> z1, std::span<const double> z2) {
  const std::size_t len = z1.size();
  const auto& k = simd::active();
  switch (n.op) {
    case Op::num: return std::vector<double>(len, n.value);
    case Op::var: {
      auto s = n.var == 0 ? z1 : z2;
      return {s.begin(), s.end()};
    }
    case Op::neg: {
      auto a = eval_batch_node(*n.a, z1, z2);
      for (double& x : a) x = -x;
      return a;
    }
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      auto a = eval_batch_node(*n.a, z1, z2);
      auto b = eval_batch_node(*n.b, z1, z2);
      if (n.op == Op::div)
        for (double x : b)
          if (x == 0.0) domain_fail("division by zero");
      auto fn = n.op == Op::add ? k.add : n.op == Op::sub ? k.sub : n.op == Op::mul ? k.mul : k.div;
      fn(a.data(), b.data(), a.data(), len);
      check_all_finite(a, "overflow");
      return a;
    }
    case Op::pow: {
      auto a = eval_batch_node(*n.a, z1, z2);
      auto b = eval_batch_node(*n.b, z1, z2);
      for (std::size_t i = 0; i < len; ++i) a[i] = apply_pow(a[i], b[i]);
      check_all_finite(a, "overflow in power");
      return a;
    }
    case Op::fn: {
      auto a = eval_batch_node(*n.a, z1, z2);
      for (double& x : a) x = apply_fn(n.fn, x);
      check_all_finite(a, "overflow in function");
      return a;
    }
  }
  return {};
}

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", std::abs(n.value));
      if (std::signbit(n.value)) {
        out += "(-";
        out += buf;
        out += ")";
      } else {
        out += buf;
      }
      return;
    }
    case Op::var: out += n.var == 0 ? "z1" : "z2"; return;
    case Op::neg:
      out += "(-";
      print(*n.a, out);
      out += ")";
      return;
    case Op::fn:
      out += fn_name(n.fn);
      out += "(";
      print(*n.a, out);
      out += ")";
      return;
    default: {
      const char sym = n.op == Op::add ? '+' : n.op == Op::sub ? '-' : n.op == Op::mul ? '*' : n.op == Op::div ? '/' : '^';
      out += "(";
      print(*n.a, out);
      out += ' ';
      out += sym;
      out += ' ';
      print(*n.b, out);
      out += ")";
    }
  }
}

void collect_abs_args(const NodeP& n, std::vector<const Node*>& out) {
  if (!n) return;
  if (n->op == Op::fn && n->fn == Fn::abs) out.push_back(n->a.get());
  collect_abs_args(n->a, out);
  collect_abs_args(n->b, out);
}

// Pratt parser over the raw text.
class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodeP run() {
    skip();
    if (pos_ == s_.size()) fail("expression");
    NodeP e = expr(0);
    skip();
    if (pos_ != s_.size()) fail("operator or end of input");
    return e;
  }

 private:
  static constexpr int kSumBp = 1;
  static constexpr int kProductBp = 3;
  static constexpr int kUnaryBp = 5;
  static constexpr int kPowerBp = 7;

  [[noreturn]] void fail(std::string expected) const { throw SyntaxError(pos_, std::move(expected)); }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }

  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  NodeP expr(int min_bp) {
    NodeP lhs = prefix();
    for (;;) {
      skip();
      if (pos_ == s_.size()) return lhs;
      const char c = s_[pos_];
      int lbp, rbp;
      Op op;
      switch (c) {
        case '+': op = Op::add; lbp = kSumBp; rbp = kSumBp + 1; break;
        case '-': op = Op::sub; lbp = kSumBp; rbp = kSumBp + 1; break;
        case '*': op = Op::mul; lbp = kProductBp; rbp = kProductBp + 1; break;
        case '/': op = Op::div; lbp = kProductBp; rbp = kProductBp + 1; break;
        // Exponent binds at unary level so that 2^-1 parses; right associative.
        case '^': op = Op::pow; lbp = kPowerBp; rbp = kUnaryBp; break;
        case ')': return lhs;
        default: fail("operator or end of input");
      }
      if (lbp < min_bp) return lhs;
      ++pos_;
      NodeP rhs = expr(rbp);
      lhs = binary(op, std::move(lhs), std::move(rhs));
    }
  }

  NodeP prefix() {
    skip();
    if (pos_ == s_.size()) fail("expression");
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      return unary(Op::neg, expr(kUnaryBp));
    }
    if (c == '(') {
      ++pos_;
      NodeP e = expr(0);
      skip();
      if (pos_ == s_.size() || s_[pos_] != ')') fail("')'");
      ++pos_;
      return e;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_alpha(c)) return identifier();
    fail("expression");
  }

  NodeP number() {
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc() || !std::isfinite(v)) fail("number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return num(v);
  }

  NodeP identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (is_alpha(s_[pos_]) || is_digit(s_[pos_]))) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    if (id == "z1") return var(0);
    if (id == "z2") return var(1);
    for (const auto& f : kFunctions) {
      if (f.name != id) continue;
      skip();
      if (pos_ == s_.size() || s_[pos_] != '(') fail("'(' after function name");
      ++pos_;
      NodeP arg = expr(0);
      skip();
      if (pos_ == s_.size() || s_[pos_] != ')') fail("')'");
      ++pos_;
      return call(f.fn, std::move(arg));
    }
    pos_ = start;
    fail("z1, z2, a number or a function name");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

FieldExpr FieldExpr::parse(std::string_view text) { return FieldExpr(Parser(text).run()); }

FieldExpr FieldExpr::constant(double c) { return FieldExpr(num(c)); }

double FieldExpr::eval(double z1, double z2) const { return eval_node(*root_, z1, z2); }

void FieldExpr::eval_batch(std::span<const double> z1, std::span<const double> z2, std::span<double> out) const {
  if (z1.size() != z2.size() || out.size() != z1.size()) throw DomainError("batch size mismatch");
  const auto v = eval_batch_node(*root_, z1, z2);
  std::copy(v.begin(), v.end(), out.begin());
}

FieldExpr FieldExpr::partial(int v) const {
  if (v != 0 && v != 1) throw DomainError("variable index must be 0 or 1");
  return FieldExpr(diff(root_, v));
}

std::string FieldExpr::to_string() const {
  std::string s;
  print(*root_, s);
  return s;
}

bool FieldExpr::uses_abs() const { return has_fn(root_, Fn::abs) || has_fn(root_, Fn::sign); }

bool FieldExpr::is_constant() const { return !has_var(root_); }

double FieldExpr::min_abs_argument(const RegionBox& box, int n) const {
  std::vector<const Node*> args;
  collect_abs_args(root_, args);
  double lo = std::numeric_limits<double>::infinity();
  std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (const Node* a : args) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec2 z = box.node(i, j, n);
        const double x = eval_node(*a, z.x, z.y);
        v[static_cast<std::size_t>(i * n + j)] = x;
        lo = std::min(lo, std::abs(x));
      }
    // A sign change between neighbors means a zero in between.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x = v[static_cast<std::size_t>(i * n + j)];
        if ((i + 1 < n && x * v[static_cast<std::size_t>((i + 1) * n + j)] < 0.0) ||
            (j + 1 < n && x * v[static_cast<std::size_t>(i * n + j + 1)] < 0.0))
          return 0.0;
      }
  }
  return lo;
}

FieldGrad grad_field(const FieldExpr& k) {
  if (k.uses_abs()) throw NonDifferentiable("field uses abs; gradient needs a region bounded away from its kinks");
  return {k.partial(0), k.partial(1)};
}

FieldGrad grad_field(const FieldExpr& k, const RegionBox& box, int samples) {
  if (k.uses_abs() && !(k.min_abs_argument(box, std::max(samples, 2)) > 1e-8))
    throw NonDifferentiable("abs argument reaches 0 inside the region");
  return {k.partial(0), k.partial(1)};
}

Vec2 hyperbolic_gradient(const FieldGrad& g, Vec2 z) { return (z.y * z.y) * g.eval(z); }

NonexistenceReport check_nonexistence(const FieldExpr& k, const RegionBox& box, int samples) {
  if (samples < 2) throw DomainError("need at least 2 samples per axis");
  box.validate();
  NonexistenceReport r;
  r.samples = samples;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) r.sup_abs = std::max(r.sup_abs, std::abs(k.eval(box.node(i, j, samples))));
  r.sup_at_most_one = r.sup_abs <= 1.0;

  std::optional<FieldGrad> grad;
  try {
    grad = grad_field(k, box, samples);
  } catch (const NonDifferentiable&) {
    return r;
  }
  const FieldGrad& g = *grad;
  // Sign tallies: +1 all positive, -1 all negative, 0 mixed or zero somewhere.
  int sgn[3] = {2, 2, 2};
  auto tally = [](int& s, double v) {
    const int here = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (s == 2) s = here;
    else if (s != here) s = 0;
  };
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      const Vec2 z = box.node(i, j, samples);
      const Vec2 d = g.eval(z);
      tally(sgn[0], d.x);
      tally(sgn[1], dot(d, z));
      tally(sgn[2], dot(d, csq(z)));
    }
  r.e1_fixed_sign = sgn[0] == 1 || sgn[0] == -1;
  r.z_fixed_sign = sgn[1] == 1 || sgn[1] == -1;
  r.z2_fixed_sign = sgn[2] == 1 || sgn[2] == -1;
  return r;
}

}  // namespace hyploop
