// Hull-White short rate: r_t = sigma * R_t + beta(t) with R an OU factor
// (dR = -k R dt + dW). Provides the deterministic shift beta and theta, a
// recombining binomial lattice for R whose jump targets are searched so the
// one-step mean matches the OU drift, and exact joint simulation of
// (r, integral of r) at unit intervals.
#pragma once

#include <cstdint>
#include <vector>

#include "elva/discount_curve.hpp"
#include "elva/rng.hpp"

namespace elva {

struct HullWhiteParams {
  double k;      // mean reversion speed, > 0
  double sigma;  // rate volatility, > 0
  double r0;     // initial short rate
  DiscountCurve curve = DiscountCurve::flat(0.0);

  HullWhiteParams(double k_, double sigma_, double r0_)
      : HullWhiteParams(k_, sigma_, r0_, DiscountCurve::flat(r0_)) {}
  HullWhiteParams(double k_, double sigma_, double r0_, DiscountCurve c);
};

double hw_beta(const HullWhiteParams& p, double t);
// Flat-curve theta only; throws for tabulated curves.
double hw_theta(const HullWhiteParams& p, double t);
// Integral of beta over [t0, t1] (closed form for the flat curve).
double hw_beta_integral(const HullWhiteParams& p, double t0, double t1);

// Unconditional moments of the OU factor and its time integral.
double ou_variance(double k, double t);                 // Var[R_t | R_0 = 0]
double ou_integral_variance(double k, double t);        // Var[int_0^t R ds]

// Recombining lattice for R with nodes R_j^n = (2j - n) sqrt(dt). The up
// index is the smallest node at level n+1 weakly above the drifted value,
// the down index the largest weakly below (within [j+1, n+1] and [0, j]);
// probabilities are clamped to [0, 1].
class RateTree {
 public:
  RateTree(const HullWhiteParams& params, int maturity_years,
           int steps_per_year, std::size_t max_levels = 30000);

  int levels() const { return n_levels_; }  // node levels, M * N_T + 1
  double dt() const { return dt_; }
  int steps_per_year() const { return steps_per_year_; }

  double R(int n, int j) const { return (2.0 * j - n) * sqrt_dt_; }
  double rate(int n, int j) const { return sigma_ * R(n, j) + beta_[n]; }
  int ju(int n, int j) const { return ju_[offset_[n] + j]; }
  int jd(int n, int j) const { return jd_[offset_[n] + j]; }
  double pu(int n, int j) const { return pu_[offset_[n] + j]; }

  // Backward-discounted unit payoff from level T * N_T down to the root.
  double zcb(int maturity_years) const;

 private:
  int n_levels_;
  int steps_per_year_;
  double dt_;
  double sqrt_dt_;
  double sigma_;
  std::vector<double> beta_;
  std::vector<std::size_t> offset_;
  std::vector<int> ju_;
  std::vector<int> jd_;
  std::vector<double> pu_;
};

// Draws (R_{t+h}, int_t^{t+h} R ds) given R_t, from the exact joint Gaussian
// law of the OU factor and its integral.
class OuIntervalSampler {
 public:
  OuIntervalSampler(double k, double h);
  // Updates state to R_{t+h} and returns the integral increment.
  double step(double& R, Rng& rng) const;

 private:
  double decay_;
  double mean_integral_factor_;
  double chol_rr_, chol_ir_, chol_ii_;
};

struct RatePaths {
  int maturity;
  std::size_t n_paths;
  std::uint64_t seed;
  // Row-major by anniversary: value(m, k) = data[m * n_paths + k].
  std::vector<double> r;
  std::vector<double> I;
  double rate(int m, std::size_t k) const { return r[m * n_paths + k]; }
  double integral(int m, std::size_t k) const { return I[m * n_paths + k]; }
};

// Exact sampling of (r_m, I_m) at anniversaries m = 0..M.
RatePaths sample_rate_paths(const HullWhiteParams& params, int maturity_years,
                            std::size_t n_paths, std::uint64_t seed);

}  // namespace elva
