#include "elva/hull_white.hpp"

#include <cmath>
#include <stdexcept>

namespace elva {

HullWhiteParams::HullWhiteParams(double k_, double sigma_, double r0_,
                                 DiscountCurve c)
    : k(k_), sigma(sigma_), r0(r0_), curve(std::move(c)) {
  if (!(k > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("HullWhiteParams: k and sigma must be positive");
}

double hw_beta(const HullWhiteParams& p, double t) {
  const double e = 1.0 - std::exp(-p.k * t);
  return p.curve.fwd(t) + p.sigma * p.sigma / (2.0 * p.k * p.k) * e * e;
}

double hw_theta(const HullWhiteParams& p, double t) {
  if (!p.curve.is_flat())
    throw std::invalid_argument("hw_theta: only available for the flat curve");
  return p.r0 + p.sigma * p.sigma / (2.0 * p.k * p.k) *
                    (1.0 - std::exp(-2.0 * p.k * t));
}

namespace {
// int_0^t (1 - e^{-ks})^2 ds
double squared_relaxation_integral(double k, double t) {
  return t - 2.0 * (1.0 - std::exp(-k * t)) / k +
         (1.0 - std::exp(-2.0 * k * t)) / (2.0 * k);
}
}  // namespace

double hw_beta_integral(const HullWhiteParams& p, double t0, double t1) {
  const double shift = p.sigma * p.sigma / (2.0 * p.k * p.k) *
                       (squared_relaxation_integral(p.k, t1) -
                        squared_relaxation_integral(p.k, t0));
  return p.curve.integrated_fwd(t0, t1) + shift;
}

double ou_variance(double k, double t) {
  return (1.0 - std::exp(-2.0 * k * t)) / (2.0 * k);
}

double ou_integral_variance(double k, double t) {
  return squared_relaxation_integral(k, t) / (k * k);
}

RateTree::RateTree(const HullWhiteParams& params, int maturity_years,
                   int steps_per_year, std::size_t max_levels) {
  if (maturity_years < 1 || steps_per_year < 1)
    throw std::invalid_argument("RateTree: maturity and steps per year must be >= 1");
  const std::size_t steps =
      static_cast<std::size_t>(maturity_years) * static_cast<std::size_t>(steps_per_year);
  if (steps + 1 > max_levels)
    throw std::invalid_argument("RateTree: requested lattice exceeds the level limit");

  n_levels_ = static_cast<int>(steps) + 1;
  steps_per_year_ = steps_per_year;
  dt_ = 1.0 / steps_per_year;
  sqrt_dt_ = std::sqrt(dt_);
  sigma_ = params.sigma;

  beta_.resize(n_levels_);
  for (int n = 0; n < n_levels_; ++n) beta_[n] = hw_beta(params, n * dt_);

  offset_.resize(n_levels_);
  std::size_t total = 0;
  for (int n = 0; n < n_levels_; ++n) {
    offset_[n] = total;
    total += static_cast<std::size_t>(n) + 1;
  }
  ju_.resize(total);
  jd_.resize(total);
  pu_.resize(total);

  const double drift_factor = 1.0 - params.k * dt_;
  for (int n = 0; n + 1 < n_levels_; ++n) {
    for (int j = 0; j <= n; ++j) {
      // Drifted node in units of sqrt(dt); level n+1 holds 2j* - (n+1).
      const double target = (2.0 * j - n) * drift_factor;
      const double x = 0.5 * (target + n + 1);
      int up = std::max(j + 1, static_cast<int>(std::ceil(x)));
      if (up > n + 1) up = n + 1;
      int down = std::min(j, static_cast<int>(std::floor(x)));
      if (down < 0) down = 0;
      const double r_up = 2.0 * up - (n + 1);
      const double r_down = 2.0 * down - (n + 1);
      double p = (target - r_down) / (r_up - r_down);
      p = std::min(1.0, std::max(0.0, p));
      const std::size_t idx = offset_[n] + static_cast<std::size_t>(j);
      ju_[idx] = up;
      jd_[idx] = down;
      pu_[idx] = p;
    }
  }
}

double RateTree::zcb(int maturity_years) const {
  const int n_mat = maturity_years * steps_per_year_;
  if (n_mat < 0 || n_mat >= n_levels_)
    throw std::invalid_argument("RateTree::zcb: maturity beyond the lattice");
  std::vector<double> value(static_cast<std::size_t>(n_mat) + 1, 1.0);
  for (int n = n_mat - 1; n >= 0; --n) {
    std::vector<double> next(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
      const double p = pu(n, j);
      const double cont = p * value[ju(n, j)] + (1.0 - p) * value[jd(n, j)];
      next[j] = std::exp(-rate(n, j) * dt_) * cont;
    }
    value = std::move(next);
  }
  return value[0];
}

OuIntervalSampler::OuIntervalSampler(double k, double h) {
  decay_ = std::exp(-k * h);
  mean_integral_factor_ = (1.0 - decay_) / k;
  const double var_r = ou_variance(k, h);
  const double var_i = ou_integral_variance(k, h);
  const double cov = (1.0 - decay_) * (1.0 - decay_) / (2.0 * k * k);
  chol_rr_ = std::sqrt(var_r);
  chol_ir_ = cov / chol_rr_;
  const double resid = var_i - chol_ir_ * chol_ir_;
  chol_ii_ = std::sqrt(resid > 0.0 ? resid : 0.0);
}

double OuIntervalSampler::step(double& R, Rng& rng) const {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double integral = R * mean_integral_factor_ + chol_ir_ * z1 + chol_ii_ * z2;
  R = R * decay_ + chol_rr_ * z1;
  return integral;
}

RatePaths sample_rate_paths(const HullWhiteParams& params, int maturity_years,
                            std::size_t n_paths, std::uint64_t seed) {
  if (n_paths < 1) throw std::invalid_argument("sample_rate_paths: need n_paths >= 1");
  RatePaths out;
  out.maturity = maturity_years;
  out.n_paths = n_paths;
  out.seed = seed;
  out.r.resize((maturity_years + 1) * n_paths);
  out.I.resize((maturity_years + 1) * n_paths);

  const OuIntervalSampler stepper(params.k, 1.0);
  std::vector<double> beta_int(maturity_years);
  for (int m = 0; m < maturity_years; ++m)
    beta_int[m] = hw_beta_integral(params, m, m + 1);
  const double beta0 = hw_beta(params, 0.0);
  std::vector<double> beta_at(maturity_years + 1);
  for (int m = 0; m <= maturity_years; ++m) beta_at[m] = hw_beta(params, m);

  for (std::size_t k = 0; k < n_paths; ++k) {
    Rng rng(seed, k);
    double R = 0.0;
    double I = 0.0;
    out.r[k] = params.sigma * R + beta0;
    out.I[k] = 0.0;
    for (int m = 0; m < maturity_years; ++m) {
      const double intR = stepper.step(R, rng);
      I += params.sigma * intR + beta_int[m];
      out.r[(m + 1) * n_paths + k] = params.sigma * R + beta_at[m + 1];
      out.I[(m + 1) * n_paths + k] = I;
    }
  }
  return out;
}

}  // namespace elva
