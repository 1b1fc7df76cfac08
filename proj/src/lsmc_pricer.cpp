#include "elva/lsmc_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "elva/math_util.hpp"

namespace elva {

PathSet simulate_paths(const LevyModel& model, const HullWhiteParams& rates,
                       const ElvaContract& contract, std::size_t n_paths,
                       std::uint64_t seed) {
  if (n_paths < 1) throw std::invalid_argument("simulate_paths: need n_paths >= 1");
  const int m_years = contract.maturity;
  PathSet out;
  out.maturity = m_years;
  out.n_paths = n_paths;
  out.seed = seed;
  out.model_name = model.name();
  out.fund.resize((m_years + 1) * n_paths);
  out.rate.resize((m_years + 1) * n_paths);
  out.integral.resize((m_years + 1) * n_paths);

  const IncrementSampler sampler(model, 1.0);
  const OuIntervalSampler rate_step(rates.k, 1.0);
  const double mu_c = model.martingale_correction();
  std::vector<double> q_hat(m_years), beta_int(m_years), beta_at(m_years + 1);
  for (int m = 0; m < m_years; ++m) {
    q_hat[m] = effective_dividend(contract, m);
    beta_int[m] = hw_beta_integral(rates, m, m + 1);
  }
  for (int m = 0; m <= m_years; ++m) beta_at[m] = hw_beta(rates, m);

  for (std::size_t k = 0; k < n_paths; ++k) {
    Rng rng(seed, k);
    double R = 0.0;
    double I = 0.0;
    double log_f = std::log(contract.f0);
    out.fund[k] = contract.f0;
    out.rate[k] = beta_at[0];
    out.integral[k] = 0.0;
    for (int m = 0; m < m_years; ++m) {
      const double intR = rate_step.step(R, rng);
      const double dI = rates.sigma * intR + beta_int[m];
      I += dI;
      const double x = sampler.sample(rng);
      log_f += dI - q_hat[m] + mu_c + x;
      const std::size_t idx = (m + 1) * n_paths + k;
      out.fund[idx] = std::exp(log_f);
      out.rate[idx] = rates.sigma * R + beta_at[m + 1];
      out.integral[idx] = I;
    }
  }
  return out;
}

std::pair<double, double> confidence_interval(std::span<const double> samples,
                                              double level) {
  if (samples.size() < 2)
    throw std::invalid_argument("confidence_interval: need at least two samples");
  if (!(level > 0.0) || !(level < 1.0))
    throw std::invalid_argument("confidence_interval: level must lie in (0, 1)");
  const MeanVariance mv = sample_moments(samples);
  const double z = inverse_normal_cdf(0.5 * (1.0 + level));
  const double half = z * std::sqrt(mv.variance / static_cast<double>(mv.n));
  return {mv.mean - half, mv.mean + half};
}

PriceResult summarize(std::span<const double> samples, double level) {
  const MeanVariance mv = sample_moments(samples);
  PriceResult pr;
  pr.value = mv.mean;
  pr.std_error = mv.n > 1 ? std::sqrt(mv.variance / static_cast<double>(mv.n)) : 0.0;
  if (mv.n > 1) {
    auto [lo, hi] = confidence_interval(samples, level);
    pr.ci_lo = lo;
    pr.ci_hi = hi;
  } else {
    pr.ci_lo = pr.ci_hi = mv.mean;
  }
  return pr;
}

std::vector<double> no_surrender_cashflows(const PathSet& paths,
                                           const MortalityTable& mortality,
                                           const ElvaContract& contract) {
  const int m_years = contract.maturity;
  std::vector<double> value(paths.n_paths, 0.0);
  double mass_before_maturity = 0.0;
  for (int m = 1; m < m_years; ++m) mass_before_maturity += mortality.mass(m);
  for (std::size_t k = 0; k < paths.n_paths; ++k) {
    double v = 0.0;
    for (int m = 1; m < m_years; ++m)
      v += mortality.mass(m) * std::exp(-paths.I(m, k)) *
           death_benefit(contract, m, paths.f(m, k));
    v += (1.0 - mass_before_maturity) * std::exp(-paths.I(m_years, k)) *
         death_benefit(contract, m_years, paths.f(m_years, k));
    value[k] = v;
  }
  return value;
}

PriceResult price_no_surrender(const PathSet& paths, const MortalityTable& mortality,
                               const ElvaContract& contract) {
  return summarize(no_surrender_cashflows(paths, mortality, contract));
}

int SectorPartition::sector_of(double f) const {
  return static_cast<int>(std::lower_bound(bounds.begin(), bounds.end(), f) -
                          bounds.begin());
}

SectorPartition partition_sectors(std::span<const double> fund,
                                  const ElvaContract& contract, int m,
                                  double split_fraction) {
  const double b1 = contract.f0 * std::exp(contract.floor_rate * m);
  const double b2 = contract.f0 * std::exp(contract.cap_rate * m);
  std::vector<double> bounds = {b1 / 8.0, b1 / 4.0, b1 / 2.0,       b1,
                                0.5 * (b1 + b2),    b2,       2.0 * b2,
                                4.0 * b2,           8.0 * b2};
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  SectorPartition part;
  part.bounds = std::move(bounds);
  part.members.resize(part.bounds.size() + 1);
  for (std::uint32_t k = 0; k < fund.size(); ++k)
    part.members[part.sector_of(fund[k])].push_back(k);

  // Median-split any sector holding more than the allowed share of points;
  // splitting stops when the points cannot be separated.
  const std::size_t cap =
      static_cast<std::size_t>(split_fraction * static_cast<double>(fund.size()));
  std::vector<std::size_t> todo(part.members.size());
  std::iota(todo.begin(), todo.end(), 0);
  while (!todo.empty()) {
    const std::size_t s = todo.back();
    todo.pop_back();
    auto& pts = part.members[s];
    if (pts.size() <= cap || pts.size() < 2) continue;
    std::vector<double> values(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) values[i] = fund[pts[i]];
    const std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double threshold = values[mid];
    std::vector<std::uint32_t> left, right;
    for (std::uint32_t k : pts)
      (fund[k] <= threshold ? left : right).push_back(k);
    if (left.empty() || right.empty()) continue;  // indistinguishable points
    part.bounds.insert(part.bounds.begin() + s, threshold);
    part.members[s] = std::move(right);
    part.members.insert(part.members.begin() + s, std::move(left));
    for (auto& t : todo)
      if (t > s) ++t;
    todo.push_back(s);
    todo.push_back(s + 1);
  }
  return part;
}

namespace {

int basis_size(int degree) { return (degree + 1) * (degree + 2) / 2; }

// Complete bivariate monomials ordered by total degree.
void fill_basis_row(double u, double v, int degree, double* row) {
  int idx = 0;
  for (int total = 0; total <= degree; ++total)
    for (int a = total; a >= 0; --a)
      row[idx++] = std::pow(u, a) * std::pow(v, total - a);
}

struct ScaledPoints {
  std::vector<double> u, v;
  double f_lo, f_hi, r_lo, r_hi;
};

double affine_to_unit(double x, double lo, double hi) {
  return hi > lo ? (2.0 * x - (lo + hi)) / (hi - lo) : 0.0;
}

ScaledPoints scale_points(std::span<const double> f, std::span<const double> r,
                          const std::vector<std::uint32_t>& idx) {
  ScaledPoints sp;
  sp.f_lo = sp.r_lo = std::numeric_limits<double>::infinity();
  sp.f_hi = sp.r_hi = -std::numeric_limits<double>::infinity();
  for (std::uint32_t k : idx) {
    sp.f_lo = std::min(sp.f_lo, f[k]);
    sp.f_hi = std::max(sp.f_hi, f[k]);
    sp.r_lo = std::min(sp.r_lo, r[k]);
    sp.r_hi = std::max(sp.r_hi, r[k]);
  }
  sp.u.resize(idx.size());
  sp.v.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    sp.u[i] = affine_to_unit(f[idx[i]], sp.f_lo, sp.f_hi);
    sp.v[i] = affine_to_unit(r[idx[i]], sp.r_lo, sp.r_hi);
  }
  return sp;
}

// Least squares on the monomial basis; returns false on rank deficiency.
bool solve_ls(const std::vector<double>& u, const std::vector<double>& v,
              const std::vector<double>& y, std::span<const std::size_t> rows,
              int degree, std::vector<double>* coeffs) {
  const int p = basis_size(degree);
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd rhs(n);
  std::vector<double> row(p);
  for (int i = 0; i < n; ++i) {
    fill_basis_row(u[rows[i]], v[rows[i]], degree, row.data());
    for (int j = 0; j < p; ++j) x(i, j) = row[j];
    rhs(i) = y[rows[i]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) return false;
  Eigen::VectorXd beta = qr.solve(rhs);
  coeffs->assign(beta.data(), beta.data() + p);
  return true;
}

double eval_poly(const std::vector<double>& coeffs, int degree, double u, double v) {
  double acc = 0.0;
  int idx = 0;
  for (int total = 0; total <= degree; ++total)
    for (int a = total; a >= 0; --a)
      acc += coeffs[idx++] * std::pow(u, a) * std::pow(v, total - a);
  return acc;
}

double mse_on(const std::vector<double>& u, const std::vector<double>& v,
              const std::vector<double>& y, std::span<const std::size_t> rows,
              const std::vector<double>& coeffs, int degree) {
  if (rows.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i : rows) {
    const double e = eval_poly(coeffs, degree, u[i], v[i]) - y[i];
    acc += e * e;
  }
  return acc / static_cast<double>(rows.size());
}

SectorFit fit_sector(std::span<const double> f, std::span<const double> r,
                     std::span<const double> y,
                     const std::vector<std::uint32_t>& idx, int sector_index,
                     std::uint64_t seed, const RegressionConfig& cfg) {
  SectorFit fit;
  fit.source = sector_index;
  const std::size_t n = idx.size();
  ScaledPoints sp = scale_points(f, r, idx);
  fit.f_lo = sp.f_lo;
  fit.f_hi = sp.f_hi;
  fit.r_lo = sp.r_lo;
  fit.r_hi = sp.r_hi;
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];

  if (n == 1) {
    fit.fitted = true;
    fit.degree = 0;
    fit.coeffs = {ys[0]};
    fit.mse_in = {0.0};
    fit.mse_out = {0.0};
    return fit;
  }

  // Seeded 80/20 split for degree selection.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, static_cast<std::uint64_t>(sector_index));
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(n))));
  if (n_test >= n) n_test = n - 1;
  std::span<const std::size_t> test(order.data(), n_test);
  std::span<const std::size_t> train(order.data() + n_test, n - n_test);

  int best_degree = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  std::vector<double> coeffs;
  for (int d = 0; d <= cfg.degree_cap; ++d) {
    if (static_cast<std::size_t>(basis_size(d)) > train.size()) break;
    if (!solve_ls(sp.u, sp.v, ys, train, d, &coeffs)) break;
    const double in = mse_on(sp.u, sp.v, ys, train, coeffs, d);
    const double out = mse_on(sp.u, sp.v, ys, test, coeffs, d);
    fit.mse_in.push_back(in);
    fit.mse_out.push_back(out);
    if (out < best_mse) {
      best_mse = out;
      best_degree = d;
    } else {
      break;  // out-of-sample error stopped improving
    }
  }

  // Refit the selected degree on the full sector, backing off on rank loss.
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (int d = best_degree; d >= 0; --d) {
    if (static_cast<std::size_t>(basis_size(d)) > n) continue;
    if (solve_ls(sp.u, sp.v, ys, all, d, &coeffs)) {
      fit.fitted = true;
      fit.degree = d;
      fit.coeffs = coeffs;
      return fit;
    }
  }
  fit.fitted = true;
  fit.degree = 0;
  fit.coeffs = {sample_moments(ys).mean};
  return fit;
}

}  // namespace

double ContinuationModel::evaluate(double f, double r) const {
  if (fits.empty()) return 0.0;
  const int s = static_cast<int>(
      std::lower_bound(bounds.begin(), bounds.end(), f) - bounds.begin());
  const SectorFit& fit = fits[static_cast<std::size_t>(s)];
  if (!fit.fitted) return 0.0;
  const double u = affine_to_unit(f, fit.f_lo, fit.f_hi);
  const double v = affine_to_unit(r, fit.r_lo, fit.r_hi);
  return eval_poly(fit.coeffs, fit.degree, u, v);
}

ContinuationModel fit_local_regression(std::span<const double> f,
                                       std::span<const double> r,
                                       std::span<const double> y,
                                       const SectorPartition& partition,
                                       std::uint64_t seed,
                                       const RegressionConfig& config) {
  ContinuationModel model;
  model.bounds = partition.bounds;
  model.fits.resize(partition.sectors());

  std::vector<int> populated;
  for (std::size_t s = 0; s < partition.sectors(); ++s) {
    if (partition.members[s].size() >= config.min_points) {
      model.fits[s] = fit_sector(f, r, y, partition.members[s],
                                 static_cast<int>(s), seed, config);
      populated.push_back(static_cast<int>(s));
    }
  }

  if (populated.empty()) {
    // No sector is individually usable; pool everything.
    std::vector<std::uint32_t> all;
    for (const auto& m : partition.members) all.insert(all.end(), m.begin(), m.end());
    if (all.empty()) return model;
    std::sort(all.begin(), all.end());
    SectorFit global = fit_sector(f, r, y, all, 0, seed, config);
    for (auto& fit : model.fits) fit = global;
    return model;
  }

  for (std::size_t s = 0; s < partition.sectors(); ++s) {
    if (model.fits[s].fitted) continue;
    int nearest = populated.front();
    for (int c : populated)
      if (std::abs(c - static_cast<int>(s)) < std::abs(nearest - static_cast<int>(s)))
        nearest = c;
    model.fits[s] = model.fits[static_cast<std::size_t>(nearest)];
  }
  return model;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + salt);
  return splitmix64(s);
}

}  // namespace

BackwardResult backward_induction(const PathSet& paths, const ElvaContract& contract,
                                  const MortalityTable& mortality,
                                  const RegressionConfig& config) {
  const int m_years = contract.maturity;
  if (m_years < 2)
    throw std::invalid_argument("backward_induction: maturity must be >= 2");
  const std::size_t n = paths.n_paths;

  BackwardResult result;
  result.stopping.assign(n, m_years);
  result.rule.continuation.resize(m_years - 1);

  // Per-path state: accum = discounted mortality-weighted death benefits
  // strictly before the stopping time, mass = their probability mass,
  // stop_value = discounted benefit at the stopping time.
  std::vector<double> accum(n, 0.0), mass(n, 0.0), stop_value(n);
  for (std::size_t k = 0; k < n; ++k)
    stop_value[k] = std::exp(-paths.I(m_years, k)) *
                    death_benefit(contract, m_years, paths.f(m_years, k));

  std::vector<double> y(n), f_m(n), r_m(n);
  for (int m = m_years - 1; m >= 1; --m) {
    const double survival = mortality.survival_to(m);
    if (!(survival > 0.0))
      throw std::domain_error("backward_induction: survival exhausted before maturity");

    for (std::size_t k = 0; k < n; ++k) {
      f_m[k] = paths.f(m, k);
      r_m[k] = paths.r(m, k);
      y[k] = std::exp(paths.I(m, k)) *
             (accum[k] + (survival - mass[k]) * stop_value[k]) / survival;
    }

    const SectorPartition partition = partition_sectors(f_m, contract, m);
    ContinuationModel cont =
        fit_local_regression(f_m, r_m, y, partition, mix_seed(paths.seed, m), config);

    for (std::size_t k = 0; k < n; ++k) {
      const double sb = surrender_benefit(contract, m, f_m[k]);
      // A zero surrender benefit never beats the nonnegative continuation.
      if (sb > 0.0 && sb >= cont.evaluate(f_m[k], r_m[k])) {
        result.stopping[k] = m;
        accum[k] = 0.0;
        mass[k] = 0.0;
        stop_value[k] = std::exp(-paths.I(m, k)) * sb;
      }
    }
    result.rule.continuation[m - 1] = std::move(cont);

    const double p_m = mortality.mass(m);
    for (std::size_t k = 0; k < n; ++k) {
      if (result.stopping[k] > m) {
        accum[k] += p_m * std::exp(-paths.I(m, k)) *
                    death_benefit(contract, m, f_m[k]);
        mass[k] += p_m;
      }
    }
  }

  result.cashflows.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    result.cashflows[k] = accum[k] + (1.0 - mass[k]) * stop_value[k];
  result.price = summarize(result.cashflows);
  return result;
}

std::vector<double> cashflows_under_rule(const PathSet& paths, const SurrenderRule& rule,
                                         const ElvaContract& contract,
                                         const MortalityTable& mortality) {
  const int m_years = contract.maturity;
  if (static_cast<int>(rule.continuation.size()) != m_years - 1)
    throw std::invalid_argument("cashflows_under_rule: rule horizon mismatch");
  std::vector<double> value(paths.n_paths);
  for (std::size_t k = 0; k < paths.n_paths; ++k) {
    int tau = m_years;
    for (int m = 1; m < m_years; ++m) {
      const double f = paths.f(m, k);
      const double sb = surrender_benefit(contract, m, f);
      if (sb > 0.0 &&
          sb >= rule.continuation[m - 1].evaluate(f, paths.r(m, k))) {
        tau = m;
        break;
      }
    }
    double v = 0.0;
    double used_mass = 0.0;
    for (int h = 1; h < tau; ++h) {
      v += mortality.mass(h) * std::exp(-paths.I(h, k)) *
           death_benefit(contract, h, paths.f(h, k));
      used_mass += mortality.mass(h);
    }
    v += (1.0 - used_mass) * std::exp(-paths.I(tau, k)) *
         surrender_benefit(contract, tau, paths.f(tau, k));
    value[k] = v;
  }
  return value;
}

PriceResult price_under_rule(const PathSet& paths, const SurrenderRule& rule,
                             const ElvaContract& contract,
                             const MortalityTable& mortality) {
  return summarize(cashflows_under_rule(paths, rule, contract, mortality));
}

}  // namespace elva
