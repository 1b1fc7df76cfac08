#include <doctest.h>

#include <cmath>
#include <vector>

#include "elva/fft_conv.hpp"
#include "elva/math_util.hpp"
#include "elva/rng.hpp"

using namespace elva;

TEST_CASE("tridiagonal solve reproduces a dense product") {
  const std::size_t n = 64;
  std::vector<double> lower(n, -0.3), diag(n, 2.1), upper(n, -0.4), x(n), rhs(n),
      scratch(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.3 * i) + 0.1 * i;
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = diag[i] * x[i];
    if (i > 0) rhs[i] += lower[i] * x[i - 1];
    if (i + 1 < n) rhs[i] += upper[i] * x[i + 1];
  }
  solve_tridiagonal(lower, diag, upper, rhs, scratch);
  for (std::size_t i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("quadrature helpers") {
  CHECK(integrate([](double t) { return t * t; }, 0.0, 3.0) ==
        doctest::Approx(9.0).epsilon(1e-12));
  // integrable singularity t^{-1/2} at the left end
  CHECK(integrate_singular_left([](double t) { return 1.0 / std::sqrt(t); }, 0.0,
                                1.0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("convolver matches the direct stencil sum, fft path included") {
  Rng rng(42);
  const int half = 90;  // wide enough to take the fft branch
  const std::size_t n = 257;
  std::vector<double> w(2 * half + 1);
  for (auto& v : w) v = rng.uniform();
  w[half] = 0.0;
  std::vector<double> row(n);
  for (auto& v : row) v = rng.uniform() * 2.0 - 1.0;

  JumpConvolver fft_conv(w, half, n);
  std::vector<double> got(n);
  fft_conv.apply(row, got);

  for (int i = 0; i < static_cast<int>(n); ++i) {
    double want = 0.0;
    for (int k = -half; k <= half; ++k) {
      const int j = i + k;
      const double v = j < 0 ? row.front()
                             : (j >= static_cast<int>(n) ? row.back() : row[j]);
      want += w[k + half] * v;
    }
    CHECK(got[i] == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  bool differs = false;
  Rng a2(7, 3);
  for (int i = 0; i < 100; ++i) differs |= (a2() != c());
  CHECK(differs);
}
