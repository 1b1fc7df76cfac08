#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "elva/levy_models.hpp"
#include "elva/math_util.hpp"
#include "elva/rng.hpp"

using namespace elva;
using cd = std::complex<double>;

namespace {

LevyModel table_nig() { return LevyModel::nig(6.0, -0.4, 2.0); }
LevyModel table_vg() { return LevyModel::vg(0.85, 0.0, 0.2); }
LevyModel table_cgmy() { return LevyModel::cgmy(0.02, 5.0, 15.0, 1.2); }
LevyModel table_mjd() { return LevyModel::mjd(0.25, 0.6, 0.01, 0.13); }

std::vector<LevyModel> table_models() {
  return {table_nig(), table_vg(), table_cgmy(), table_mjd()};
}

cd corrected_exponent(const LevyModel& m, cd xi) {
  return m.char_exponent(xi) - cd(0.0, 1.0) * m.martingale_correction() * xi;
}

// One-sided integral of y * nu(y) over |y| > 1.
double outer_mean(const LevyModel& m) {
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    double lo = 1.0;
    for (int panel = 0; panel < 120; ++panel) {
      const double hi = lo * 2.0;
      const double part = integrate(
          [&](double t) { return sign * t * m.levy_density(sign * t); }, lo, hi,
          1e-13);
      total += part;
      if (std::abs(part) < 1e-16 && panel > 2) break;
      lo = hi;
    }
  }
  return total;
}

// Rebuilds psi from the Lévy density through the Lévy-Khintchine integral
// with truncation 1_{|y|<=1}; the linear drift is fixed by matching the mean
// of the closed-form exponent.
cd psi_from_density(const LevyModel& m, double xi, double trunc) {
  auto real_part = [&](double y) { return (1.0 - std::cos(xi * y)); };
  auto imag_small = [&](double y) { return xi * y - std::sin(xi * y); };

  double re = 0.0, im = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    // (0, 1]: compensated integrand, mildly singular density at zero
    re += integrate_singular_left(
        [&](double t) { return real_part(sign * t) * m.levy_density(sign * t); },
        0.0, 1.0);
    im += integrate_singular_left(
        [&](double t) { return imag_small(sign * t) * m.levy_density(sign * t); },
        0.0, 1.0);
    // [1, trunc]: raw integrand
    re += integrate(
        [&](double t) { return (1.0 - std::cos(xi * sign * t)) * m.levy_density(sign * t); },
        1.0, trunc, 1e-12);
    im += integrate(
        [&](double t) { return -std::sin(xi * sign * t) * m.levy_density(sign * t); },
        1.0, trunc, 1e-12);
  }

  const double h = 1e-5;
  const cd dpsi = (m.char_exponent(cd(h)) - m.char_exponent(cd(-h))) / cd(2.0 * h);
  const double mean_rate = -dpsi.imag();
  const double mu = mean_rate - outer_mean(m);

  const double gauss = 0.5 * m.gaussian_variance() * xi * xi;
  return cd(gauss + re, im) - cd(0.0, 1.0) * mu * xi;
}

}  // namespace

TEST_CASE("psi vanishes at zero and is hermitian on the real line") {
  for (const auto& m : table_models()) {
    CAPTURE(m.name());
    CHECK(std::abs(m.char_exponent(cd(0.0))) < 1e-14);
    for (double xi : {0.3, 1.7, 5.0}) {
      const cd a = m.char_exponent(cd(-xi));
      const cd b = std::conj(m.char_exponent(cd(xi)));
      CHECK(std::abs(a - b) < 1e-13 * (1.0 + std::abs(b)));
    }
  }
}

TEST_CASE("closed-form exponents at the martingale point") {
  CHECK(table_nig().char_exponent(cd(0.0, -1.0)).real() ==
        doctest::Approx(-0.03345439239717297).epsilon(1e-12));
  CHECK(table_vg().char_exponent(cd(0.0, -1.0)).real() ==
        doctest::Approx(0.020171951570553532).epsilon(1e-12));
  CHECK(table_cgmy().char_exponent(cd(0.0, -1.0)).real() ==
        doctest::Approx(0.035058632878462887).epsilon(1e-12));
  CHECK(table_mjd().char_exponent(cd(0.0, -1.0)).real() ==
        doctest::Approx(-0.042422751700181371).epsilon(1e-12));
}

TEST_CASE("martingale correction kills psi_corrected(-i)") {
  for (const auto& m : table_models()) {
    CAPTURE(m.name());
    CHECK(std::abs(corrected_exponent(m, cd(0.0, -1.0))) < 1e-12);
  }
  // pure diffusion limit: mu_c = -sigma^2 / 2
  const LevyModel bs = LevyModel::mjd(0.3, 0.0, 0.0, 0.1);
  CHECK(bs.martingale_correction() == doctest::Approx(-0.045).epsilon(1e-14));
  // and the correction equals psi(-i) by definition
  CHECK(table_vg().martingale_correction() ==
        doctest::Approx(0.020171951570553532).epsilon(1e-12));
}

TEST_CASE("char_exponent rejects points outside the strip") {
  CHECK_THROWS_AS(table_nig().char_exponent(cd(0.0, -1.5)), std::domain_error);
  CHECK_THROWS_AS(table_nig().char_exponent(cd(0.0, 0.5)), std::domain_error);
}

TEST_CASE("parameter domains are enforced at construction") {
  CHECK_THROWS_AS(LevyModel::nig(6.0, 6.5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(LevyModel::nig(1.0, -0.4, 2.0), std::invalid_argument);  // beta+1 issue
  CHECK_THROWS_AS(LevyModel::cgmy(0.02, 5.0, 0.9, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(LevyModel::vg(0.85, 0.0, -0.2), std::invalid_argument);
  CHECK_THROWS_AS(LevyModel::mjd(0.25, 0.6, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("levy density closed forms") {
  const LevyModel sym = LevyModel::nig(6.0, 0.0, 2.0);
  for (double y : {0.1, 0.5, 1.0})
    CHECK(sym.levy_density(y) == doctest::Approx(sym.levy_density(-y)).epsilon(1e-13));

  CHECK(table_mjd().levy_density(0.01) ==
        doctest::Approx(1.8412720633912276).epsilon(1e-12));
  CHECK(table_cgmy().levy_density(-0.2) ==
        doctest::Approx(0.25378708841300749).epsilon(1e-12));
  CHECK_THROWS_AS(table_nig().levy_density(0.0), std::domain_error);
}

TEST_CASE("density and exponent are consistent through the LK integral") {
  for (const auto& m : table_models()) {
    CAPTURE(m.name());
    const double tol = m.name() == "cgmy" ? 1e-3 : 1e-4;
    const double trunc = std::max(1.5, m.truncation_bound(1e-10));
    for (double xi : {0.5, 1.0, 3.0}) {
      const cd direct = m.char_exponent(cd(xi));
      const cd rebuilt = psi_from_density(m, xi, trunc);
      CHECK(std::abs(direct - rebuilt) < tol);
    }
  }
}

TEST_CASE("variance rate matches the numerical second derivative of psi") {
  for (const auto& m : table_models()) {
    CAPTURE(m.name());
    const double h = 1e-4;
    const cd second = (m.char_exponent(cd(h)) - 2.0 * m.char_exponent(cd(0.0)) +
                       m.char_exponent(cd(-h))) /
                      cd(h * h);
    CHECK(m.variance_rate() == doctest::Approx(second.real()).epsilon(1e-6));
  }
  CHECK(table_nig().variance_rate() ==
        doctest::Approx(0.33556796557084535).epsilon(1e-12));
  CHECK(table_mjd().variance_rate() == doctest::Approx(0.0727).epsilon(1e-12));
}

TEST_CASE("jump discretization bookkeeping") {
  const double dy = 1e-4;
  const LevyModel mjd = table_mjd();
  // truncate six jump std devs beyond the jump mean
  const double b = std::round((0.01 + 6.0 * 0.13) / dy) * dy;
  const auto jd = discretize_jumps(mjd, dy, dy, b);

  // independent Gaussian-mass oracle for the band [eps, b]
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  auto band = [&](double lo, double hi) {
    return 0.6 * (phi((hi - 0.01) / 0.13) - phi((lo - 0.01) / 0.13));
  };
  const double expected = band(dy, b) + band(-b, -dy);
  CHECK(jd.lambda_eps == doctest::Approx(expected).epsilon(1e-9));
  // the truncation at b loses essentially nothing: lambda_eps recovers the
  // full intensity once the (tiny) sub-eps gap is added back
  CHECK(jd.lambda_eps + band(-dy, dy) == doctest::Approx(0.6).epsilon(2e-9));

  double wsum = 0.0;
  for (double w : jd.weights) {
    CHECK(w >= 0.0);
    wsum += w;
  }
  CHECK(wsum == doctest::Approx(jd.lambda_eps).epsilon(1e-12));
  CHECK(jd.sigma_eps_sq >= 0.0);
  CHECK(jd.sigma_eps_sq < 1e-6);  // finite activity: vanishes with eps

  // degenerate band
  const auto empty = discretize_jumps(table_nig(), 0.01, 0.05, 0.05);
  CHECK(empty.lambda_eps == 0.0);
  for (double w : empty.weights) CHECK(w == 0.0);

  // internal consistency on an infinite-activity model
  const auto nig = discretize_jumps(table_nig(), 0.01, 0.01, 5.0);
  double s = 0.0;
  for (double w : nig.weights) s += w;
  CHECK(s == doctest::Approx(nig.lambda_eps).epsilon(1e-12));

  CHECK_THROWS_AS(discretize_jumps(mjd, 0.01, 0.02, 0.015), std::invalid_argument);
  CHECK_THROWS_AS(discretize_jumps(mjd, 0.01, 0.015, 0.5), std::invalid_argument);
}

TEST_CASE("mjd compensator drift converges to its closed form") {
  const double limit = 0.011172751700181371;  // lambda (e^{mu + s^2/2} - 1)
  const LevyModel mjd = table_mjd();
  auto drift_at = [&](double dy) {
    const double b = std::round(1.05 / dy) * dy;
    return discretize_jumps(mjd, dy, dy, b).drift_comp;
  };
  const double coarse = drift_at(0.002);
  const double fine = drift_at(0.0005);
  CHECK(std::abs(fine - limit) < 1e-5);
  CHECK(std::abs(fine - limit) < std::abs(coarse - limit) + 1e-12);
}

TEST_CASE("increment samplers reproduce moments and characteristic function") {
  const std::size_t n = 1000000;

  SUBCASE("symmetric vg has zero mean") {
    const IncrementSampler sampler(table_vg(), 1.0);
    Rng rng(101);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sampler.sample(rng);
    const auto mv = sample_moments(xs);
    const double se = std::sqrt(mv.variance / n);
    CHECK(std::abs(mv.mean) < 4.0 * se);
  }

  SUBCASE("mjd variance matches the compound-Poisson formula") {
    const IncrementSampler sampler(table_mjd(), 1.0);
    Rng rng(202);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sampler.sample(rng);
    const auto mv = sample_moments(xs);
    double m4 = 0.0;
    for (double x : xs) {
      const double d = x - mv.mean;
      m4 += d * d * d * d;
    }
    m4 /= static_cast<double>(n);
    const double se_var = std::sqrt((m4 - mv.variance * mv.variance) / n);
    CHECK(std::abs(mv.variance - 0.0727) < 4.0 * se_var);
  }

  SUBCASE("empirical characteristic function matches exp(-dt psi)") {
    for (const auto& m : table_models()) {
      CAPTURE(m.name());
      const IncrementSampler sampler(m, 1.0);
      Rng rng(303);
      std::vector<double> xs(n);
      for (auto& x : xs) x = sampler.sample(rng);
      for (double xi : {1.0, 2.0}) {
        double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
        for (double x : xs) {
          const double c = std::cos(xi * x), s = std::sin(xi * x);
          sc += c;
          ss += s;
          sc2 += c * c;
          ss2 += s * s;
        }
        const double mc = sc / n, ms = ss / n;
        const double se_c = std::sqrt((sc2 / n - mc * mc) / n);
        const double se_s = std::sqrt((ss2 / n - ms * ms) / n);
        const cd theory = std::exp(-sampler.dt() * m.char_exponent(cd(xi)));
        CHECK(std::abs(mc - theory.real()) < 5.0 * se_c + 1e-4);
        CHECK(std::abs(ms - theory.imag()) < 5.0 * se_s + 1e-4);
      }
    }
  }

  SUBCASE("same seed, same stream") {
    const IncrementSampler sampler(table_nig(), 0.5);
    Rng a(7), b(7);
    for (int i = 0; i < 1000; ++i) CHECK(sampler.sample(a) == sampler.sample(b));
  }
}
