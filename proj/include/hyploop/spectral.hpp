#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Fourier tools for real periodic samples f(theta_j), theta_j = 2 pi j / N.
// Coefficients are c_m = (1/N) sum_j f_j exp(-i m theta_j) for m = 0..N/2.

namespace hyploop::spectral {

using Coeffs = std::vector<std::complex<double>>;

constexpr bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

Coeffs forward(std::span<const double> f);
std::vector<double> inverse(const Coeffs& c, std::size_t n);

/// Derivative of the trigonometric interpolant evaluated at the samples.
/// Coefficients below the roundoff floor (8 eps max|c_m|) are dropped first so
/// that rounding noise in high modes is not amplified by m^order.
std::vector<double> derivative(std::span<const double> f, int order);

/// First and second derivative sharing one forward transform.
void derivatives(std::span<const double> f, std::vector<double>& d1, std::vector<double>& d2);

/// Values of the trigonometric interpolant on a uniform grid of m points.
std::vector<double> resample(std::span<const double> f, std::size_t m);

/// Samples of theta -> f(theta + alpha).
std::vector<double> shift(std::span<const double> f, double alpha);

/// Trigonometric interpolant evaluated at an arbitrary parameter value.
double evaluate(const Coeffs& c, std::size_t n, double theta);

}  // namespace hyploop::spectral
