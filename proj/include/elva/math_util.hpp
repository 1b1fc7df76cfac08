// Small numerical helpers shared across the pricing engines.
#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace elva {

inline constexpr double kPi = 3.14159265358979323846;

// Solves a tridiagonal system in place (Thomas algorithm). The matrix is
// given by its three diagonals; `lower[0]` and `upper[n-1]` are unused.
// Requires a nonsingular matrix; the engines only build diagonally
// dominant ones.
inline void solve_tridiagonal(std::span<const double> lower,
                              std::span<const double> diag,
                              std::span<const double> upper,
                              std::span<double> rhs,
                              std::span<double> scratch) {
  const std::size_t n = diag.size();
  assert(lower.size() == n && upper.size() == n && rhs.size() == n &&
         scratch.size() >= n);
  if (n == 0) return;
  double pivot = diag[0];
  if (std::abs(pivot) < 1e-300) throw std::runtime_error("tridiagonal solve: zero pivot");
  scratch[0] = upper[0] / pivot;
  rhs[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * scratch[i - 1];
    if (std::abs(pivot) < 1e-300) throw std::runtime_error("tridiagonal solve: zero pivot");
    scratch[i] = upper[i] / pivot;
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

// Adaptive quadrature on a finite interval.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 15, tol);
}

// Quadrature on [a, b] with an integrable singularity at `a`: the interval
// is split into geometrically shrinking panels toward the singular end.
inline double integrate_singular_left(const std::function<double(double)>& f,
                                      double a, double b, double tol = 1e-12) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  double hi = b;
  const double len = b - a;
  for (int level = 0; level < 220; ++level) {
    double lo = a + len * std::pow(0.5, level + 1);
    if (lo >= hi) { hi = lo; continue; }
    double part = integrate(f, lo, hi, tol);
    total += part;
    hi = lo;
    if (hi - a < 1e-300) break;
    if (std::abs(part) < tol * (1.0 + std::abs(total)) && level > 8) break;
  }
  return total;
}

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::size_t n = 0;
};

inline MeanVariance sample_moments(std::span<const double> xs) {
  MeanVariance mv;
  mv.n = xs.size();
  if (mv.n == 0) return mv;
  double s = 0.0;
  for (double x : xs) s += x;
  mv.mean = s / static_cast<double>(mv.n);
  if (mv.n < 2) return mv;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mv.mean;
    ss += d * d;
  }
  mv.variance = ss / static_cast<double>(mv.n - 1);
  return mv;
}

inline double inverse_normal_cdf(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kPi));
}

}  // namespace elva
