#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "hyploop/geometry.hpp"

namespace hyploop {

namespace detail {
struct Node;
}

/// Immutable expression tree for a scalar field K(z1, z2).
///
/// Grammar, loosest to tightest binding:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := atom ('^' unary)?          right associative
///   atom    := number | z1 | z2 | func '(' sum ')' | '(' sum ')'
/// with func one of sin cos exp log tanh atan sqrt abs.
class FieldExpr {
 public:
  /// Throws SyntaxError carrying the byte offset of the offending token.
  static FieldExpr parse(std::string_view text);
  static FieldExpr constant(double c);

  /// Throws EvalDomainError on log/sqrt of a negative number, division by
  /// zero, or a non-finite result.
  double eval(double z1, double z2) const;
  double eval(Vec2 z) const { return eval(z.x, z.y); }

  /// Elementwise evaluation; out[i] = eval(z1[i], z2[i]) bit for bit.
  void eval_batch(std::span<const double> z1, std::span<const double> z2, std::span<double> out) const;

  /// Symbolic partial derivative in z1 (var = 0) or z2 (var = 1). Derivatives of
  /// abs(u) use the sign of u; callers decide whether that is admissible.
  FieldExpr partial(int var) const;

  /// Fully parenthesized text that parses back to the same tree.
  std::string to_string() const;

  bool uses_abs() const;
  /// True if no variable appears.
  bool is_constant() const;

  /// Lower bound of |argument| over all abs nodes sampled on an n x n grid of
  /// the box; 0 if an argument changes sign between neighboring samples, +inf
  /// when no abs node is present.
  double min_abs_argument(const RegionBox& box, int n) const;

 private:
  explicit FieldExpr(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const detail::Node> root_;
};

inline FieldExpr parse_field(std::string_view text) { return FieldExpr::parse(text); }

struct FieldGrad {
  FieldExpr d1;
  FieldExpr d2;

  Vec2 eval(Vec2 z) const { return {d1.eval(z), d2.eval(z)}; }
};

/// Symbolic Euclidean gradient. Throws NonDifferentiable if the field uses abs.
FieldGrad grad_field(const FieldExpr& k);
/// Same, but abs is accepted when its argument stays away from 0 on the box
/// (sampled on a samples x samples grid, margin 1e-8).
FieldGrad grad_field(const FieldExpr& k, const RegionBox& box, int samples = 64);

/// Hyperbolic gradient z2^2 grad K.
Vec2 hyperbolic_gradient(const FieldGrad& g, Vec2 z);

/// Sampled evidence for the nonexistence criteria. Every flag is a statement
/// about the sampled grid only.
struct NonexistenceReport {
  double sup_abs = 0.0;
  bool sup_at_most_one = false;  // sup |K| <= 1: no K-loop at all
  bool e1_fixed_sign = false;    // grad K . e1 has constant nonzero sign
  bool z_fixed_sign = false;     // grad K . z
  bool z2_fixed_sign = false;    // grad K . z^2, z^2 = (z1^2 - z2^2, 2 z1 z2)
  int samples = 0;

  bool any() const { return sup_at_most_one || e1_fixed_sign || z_fixed_sign || z2_fixed_sign; }
};

/// samples >= 2 per axis. Gradient conditions are reported false when the
/// field is not differentiable on the box.
NonexistenceReport check_nonexistence(const FieldExpr& k, const RegionBox& box, int samples);

}  // namespace hyploop
