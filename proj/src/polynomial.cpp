#include "rotodrum/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace rotodrum {
namespace {

double polyder_val(std::span<const double> coeffs, double t) {
  const std::size_t n = coeffs.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = acc * t + coeffs[i] * static_cast<double>(n - i);
  return acc;
}

double polish(std::span<const double> coeffs, double t) {
  for (int it = 0; it < 4; ++it) {
    const double f = polyval(coeffs, t);
    const double df = polyder_val(coeffs, t);
    if (df == 0.0) break;
    const double next = t - f / df;
    // Keep the polished value only if it does not make the residual worse.
    if (std::abs(polyval(coeffs, next)) > std::abs(f)) break;
    t = next;
  }
  return t;
}

}  // namespace

double polyval(std::span<const double> coeffs, double t) {
  double acc = 0.0;
  for (double c : coeffs) acc = acc * t + c;
  return acc;
}

std::vector<double> cubic_real_roots(double a, double b, double c, double d) {
  std::vector<double> roots;
  if (a == 0.0) {
    if (b == 0.0) {
      if (c != 0.0) roots.push_back(-d / c);
      return roots;
    }
    const double disc = c * c - 4 * b * d;
    if (disc < 0) return roots;
    const double q = -0.5 * (c + std::copysign(std::sqrt(disc), c));
    if (q != 0.0) roots.push_back(q / b);
    roots.push_back(q != 0.0 ? d / q : -c / (2 * b));
    std::sort(roots.begin(), roots.end());
    return roots;
  }
  const double B = b / a;
  const double C = c / a;
  const double D = d / a;
  const double p = C - B * B / 3.0;
  const double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;
  const double shift = -B / 3.0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0) {
    const double s = std::sqrt(disc);
    roots.push_back(std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s) + shift);
  } else if (p == 0.0) {
    roots.push_back(shift);
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  }
  const double coeffs[] = {a, b, c, d};
  for (double& r : roots) r = polish(coeffs, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<double> companion_real_roots(std::span<const double> coeffs, double imag_tol) {
  std::size_t lead = 0;
  while (lead < coeffs.size() && coeffs[lead] == 0.0) ++lead;
  const std::span<const double> poly = coeffs.subspan(lead);
  std::vector<double> roots;
  if (poly.size() < 2) return roots;
  const auto n = static_cast<Eigen::Index>(poly.size() - 1);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = -poly[static_cast<std::size_t>(j + 1)] / poly[0];
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  for (const auto& ev : solver.eigenvalues()) {
    if (std::abs(ev.imag()) <= imag_tol * (1.0 + std::abs(ev.real()))) {
      roots.push_back(polish(poly, ev.real()));
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace rotodrum
