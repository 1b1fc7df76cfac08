#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "elva/hull_white.hpp"
#include "elva/math_util.hpp"

using namespace elva;

namespace {
HullWhiteParams base_params() { return HullWhiteParams(0.2, 0.03, 0.02); }

// Forward level-by-level node distribution, for lattice moment checks.
struct LatticeMoments {
  double mean, variance;
};
LatticeMoments tree_moments(const RateTree& tree, int level) {
  std::vector<double> prob(1, 1.0);
  for (int n = 0; n < level; ++n) {
    std::vector<double> next(static_cast<std::size_t>(n) + 2, 0.0);
    for (int j = 0; j <= n; ++j) {
      if (prob[j] == 0.0) continue;
      const double p = tree.pu(n, j);
      next[tree.ju(n, j)] += prob[j] * p;
      next[tree.jd(n, j)] += prob[j] * (1.0 - p);
    }
    prob = std::move(next);
  }
  double mean = 0.0, second = 0.0;
  for (int j = 0; j <= level; ++j) {
    const double r = tree.R(level, j);
    mean += prob[j] * r;
    second += prob[j] * r * r;
  }
  return {mean, second - mean * mean};
}
}  // namespace

TEST_CASE("flat-curve beta and theta") {
  const auto p = base_params();
  CHECK(hw_beta(p, 0.0) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(hw_beta(p, 5.0) == doctest::Approx(0.024495234510054441).epsilon(1e-12));
  CHECK(hw_beta(p, 400.0) == doctest::Approx(0.03125).epsilon(1e-10));
  CHECK(hw_theta(p, 0.0) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(hw_theta(p, 2.5) == doctest::Approx(0.027111356286821274).epsilon(1e-12));
  CHECK(hw_theta(p, 400.0) == doctest::Approx(0.03125).epsilon(1e-10));
}

TEST_CASE("tabulated curves interpolate and differentiate consistently") {
  const char* path = "curve_test.csv";
  {
    std::ofstream f(path);
    f << "maturity_years,zcb_price\n";
    for (double t : {0.5, 1.0, 2.0, 5.0, 10.0, 30.0})
      f << t << "," << std::exp(-0.025 * t - 0.001 * t * t / 10.0) << "\n";
  }
  const DiscountCurve curve = DiscountCurve::from_csv(path);
  CHECK(curve.zcb(0.0) == doctest::Approx(1.0));
  CHECK(curve.zcb(5.0) == doctest::Approx(std::exp(-0.125 - 0.0025)).epsilon(1e-12));
  // fwd consistent with -d log zcb / dT through finite differences
  for (double t : {1.5, 4.0, 8.0}) {
    const double h = 1e-3;
    const double fd = (std::log(curve.zcb(t - h)) - std::log(curve.zcb(t + h))) / (2 * h);
    CHECK(curve.fwd(t) == doctest::Approx(fd).epsilon(1e-6));
  }
  const HullWhiteParams p(0.2, 0.03, 0.025, curve);
  CHECK_THROWS_AS(hw_theta(p, 1.0), std::invalid_argument);
  std::remove(path);

  // malformed files are rejected
  {
    std::ofstream f(path);
    f << "maturity_years,zcb_price\n2.0,0.95\n1.0,0.99\n";
  }
  CHECK_THROWS(DiscountCurve::from_csv(path));
  std::remove(path);
}

TEST_CASE("lattice geometry and local consistency") {
  const auto p = base_params();
  const RateTree tree(p, 25, 10);
  CHECK(tree.levels() == 251);
  CHECK(tree.dt() == doctest::Approx(0.1).epsilon(1e-15));

  // central node of an even level: zero drift, adjacent targets, p = 1/2
  const int n = 100, j = 50;
  CHECK(tree.R(n, j) == 0.0);
  CHECK(tree.ju(n, j) == j + 1);
  CHECK(tree.jd(n, j) == j);
  CHECK(tree.pu(n, j) == doctest::Approx(0.5).epsilon(1e-14));

  const double dt = tree.dt();
  for (int lvl = 0; lvl + 1 < tree.levels(); lvl += 7) {
    for (int node = 0; node <= lvl; ++node) {
      const int up = tree.ju(lvl, node);
      const int dn = tree.jd(lvl, node);
      CHECK(up >= node + 1);
      CHECK(up <= lvl + 1);
      CHECK(dn >= 0);
      CHECK(dn <= node);
      const double pu = tree.pu(lvl, node);
      CHECK(pu >= 0.0);
      CHECK(pu <= 1.0);
      if (pu > 0.0 && pu < 1.0) {
        const double drifted = tree.R(lvl, node) * (1.0 - p.k * dt);
        const double mean = pu * tree.R(lvl + 1, up) + (1.0 - pu) * tree.R(lvl + 1, dn);
        CHECK(mean == doctest::Approx(drifted).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(RateTree(p, 25, 10, 100), std::invalid_argument);
}

TEST_CASE("lattice zcb prices converge to the flat curve") {
  const auto p = base_params();
  const RateTree coarse(p, 25, 10);
  const RateTree fine(p, 25, 100);
  for (int t : {1, 5, 25}) {
    const double exact = std::exp(-0.02 * t);
    CHECK(std::abs(coarse.zcb(t) / exact - 1.0) < 3e-3);
    CHECK(std::abs(fine.zcb(t) / exact - 1.0) < 5e-4);
  }
}

TEST_CASE("lattice moments approach the OU moments") {
  const auto p = base_params();
  for (double t : {1.0, 25.0}) {
    double prev_var_err = std::numeric_limits<double>::infinity();
    double prev_mean_err = std::numeric_limits<double>::infinity();
    for (int nt : {10, 40, 160}) {
      const RateTree tree(p, 25, nt);
      const auto mm = tree_moments(tree, static_cast<int>(t * nt));
      const double mean_err = std::abs(mm.mean);
      const double var_err = std::abs(mm.variance - ou_variance(p.k, t));
      CHECK(mean_err < 0.5 / nt);  // O(dt)
      CHECK(var_err <= prev_var_err + 1e-12);
      CHECK(mean_err <= prev_mean_err + 1e-12);
      prev_var_err = var_err;
      prev_mean_err = mean_err;
    }
  }
}

TEST_CASE("exact path sampler matches OU moments and reprices the curve") {
  const auto p = base_params();
  const std::size_t n = 200000;
  const RatePaths paths = sample_rate_paths(p, 25, n, 4242);

  for (int m : {1, 5, 25}) {
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = paths.rate(m, k);
    const auto mv = sample_moments(r);
    const double se_mean = std::sqrt(mv.variance / n);
    CHECK(std::abs(mv.mean - hw_beta(p, m)) < 4.0 * se_mean);
    const double want_var = p.sigma * p.sigma * ou_variance(p.k, m);
    const double se_var = mv.variance * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(mv.variance - want_var) < 5.0 * se_var);
  }

  // flat-curve repricing: E[exp(-I_25)] = exp(-r0 * 25)
  std::vector<double> disc(n);
  for (std::size_t k = 0; k < n; ++k) disc[k] = std::exp(-paths.integral(25, k));
  const auto mv = sample_moments(disc);
  const double se = std::sqrt(mv.variance / n);
  CHECK(std::abs(mv.mean - std::exp(-0.5)) < 4.0 * se);

  // and agrees with the lattice discount bond
  const RateTree tree(p, 25, 100);
  CHECK(std::abs(mv.mean - tree.zcb(25)) < 4.0 * se + 5e-4 * std::exp(-0.5));

  // bitwise determinism
  const RatePaths again = sample_rate_paths(p, 25, 1000, 4242);
  for (std::size_t k = 0; k < 1000; ++k) {
    CHECK(again.rate(25, k) == paths.rate(25, k));
    CHECK(again.integral(25, k) == paths.integral(25, k));
  }
}
