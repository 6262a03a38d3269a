#pragma once

#include <span>
#include <vector>

namespace rotodrum {

/// Evaluates sum coeffs[i] * t^(n-i) (highest degree first) by Horner's rule.
double polyval(std::span<const double> coeffs, double t);

/// Real roots of a*t^3 + b*t^2 + c*t + d in closed form (Cardano / trigonometric),
/// Newton-polished, ascending. Falls back to the quadratic/linear case when the
/// leading coefficients vanish.
std::vector<double> cubic_real_roots(double a, double b, double c, double d);

/// Real roots of a polynomial (highest degree first) from the eigenvalues of its
/// companion matrix; eigenvalues with |imag| <= imag_tol * (1 + |real|) count as
/// real. Newton-polished, ascending.
std::vector<double> companion_real_roots(std::span<const double> coeffs, double imag_tol = 1e-7);

}  // namespace rotodrum
