#include "hyploop/errors.hpp"

#include <cstdio>

namespace hyploop {

SyntaxError::SyntaxError(std::size_t offset, std::string expected)
    : Error("syntax error at offset " + std::to_string(offset) + ": expected " + expected),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

std::string describe_projection(const std::array<double, 3>& p, double tol) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "right-hand side not orthogonal to the kernel (projections %.3e, %.3e, %.3e; tol %.1e)",
                p[0], p[1], p[2], tol);
  return buf;
}

}  // namespace

NotOrthogonal::NotOrthogonal(const std::array<double, 3>& projection, double tol)
    : Error(describe_projection(projection, tol)), projection_(projection) {}

}  // namespace hyploop
