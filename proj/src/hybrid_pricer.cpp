#include "elva/hybrid_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "elva/math_util.hpp"

namespace elva {

LogPriceGrid build_log_grid(const ElvaContract& contract, const LevyModel& model,
                            const HullWhiteParams& rates, const HybridConfig& config) {
  if (!(config.dy > 0.0) || config.steps_per_year < 1 || !(config.grid_width_stds > 0.0))
    throw std::invalid_argument("hybrid config: dy, N_T and grid width must be positive");
  const double horizon = contract.maturity;
  const double var_y = model.variance_rate() * horizon +
                       rates.sigma * rates.sigma *
                           ou_integral_variance(rates.k, horizon);
  const double half = config.grid_width_stds * std::sqrt(var_y);
  const int n_half = static_cast<int>(std::ceil(half / config.dy - 1e-12));
  const std::size_t n = 2 * static_cast<std::size_t>(n_half) + 1;
  if (n > config.max_grid_points)
    throw std::invalid_argument("hybrid config: grid exceeds max_grid_points");
  LogPriceGrid grid;
  grid.dy = config.dy;
  grid.anchor = n_half;
  grid.n = static_cast<int>(n);
  grid.y_min = std::log(contract.f0) - n_half * config.dy;
  return grid;
}

ImexStepper::ImexStepper(const LogPriceGrid& grid, const JumpDiscretization& jumps,
                         double gaussian_variance, double dt)
    : grid_(grid),
      jumps_(jumps),
      gaussian_variance_(gaussian_variance),
      dt_(dt),
      diffusion_(0.5 * (gaussian_variance + jumps.sigma_eps_sq)),
      convolver_(jumps.weights, jumps.half_width, static_cast<std::size_t>(grid.n)) {
  const std::size_t n = static_cast<std::size_t>(grid_.n);
  conv_.resize(n);
  rhs_.resize(n);
  lower_.resize(n);
  diag_.resize(n);
  upper_.resize(n);
  scratch_.resize(n);
}

void ImexStepper::step(std::span<const double> in, std::span<double> out,
                       double rate, double q_hat) {
  const std::size_t n = static_cast<std::size_t>(grid_.n);
  if (in.size() != n || out.size() != n)
    throw std::invalid_argument("ImexStepper: row length mismatch");
  const double dy = grid_.dy;
  const double advection =
      rate - q_hat - 0.5 * (gaussian_variance_ + jumps_.sigma_eps_sq) - jumps_.drift_comp;

  convolver_.apply(in, conv_);

  const double lam = jumps_.lambda_eps;
  for (std::size_t i = 0; i < n; ++i)
    rhs_[i] = in[i] + dt_ * (conv_[i] - lam * in[i]);
  rhs_.front() = in.front();
  rhs_.back() = in.back();

  const double d_over = diffusion_ / (dy * dy);
  double lo, di, up;
  if (std::abs(advection) * dy <= 2.0 * diffusion_) {
    // Central differences; the implicit matrix stays an M-matrix.
    const double a_half = advection / (2.0 * dy);
    lo = -dt_ * (d_over - a_half);
    di = 1.0 + 2.0 * dt_ * d_over;
    up = -dt_ * (d_over + a_half);
  } else if (advection > 0.0) {
    lo = -dt_ * d_over;
    di = 1.0 + dt_ * (2.0 * d_over + advection / dy);
    up = -dt_ * (d_over + advection / dy);
  } else {
    lo = -dt_ * (d_over - advection / dy);
    di = 1.0 + dt_ * (2.0 * d_over - advection / dy);
    up = -dt_ * d_over;
  }
  std::fill(lower_.begin(), lower_.end(), lo);
  std::fill(diag_.begin(), diag_.end(), di);
  std::fill(upper_.begin(), upper_.end(), up);
  lower_.front() = lower_.back() = 0.0;
  upper_.front() = upper_.back() = 0.0;
  diag_.front() = diag_.back() = 1.0;

  solve_tridiagonal(lower_, diag_, upper_, rhs_, scratch_);

  const double discount = std::exp(-rate * dt_);
  for (std::size_t i = 0; i < n; ++i) out[i] = discount * rhs_[i];
}

namespace {

double choose_truncation(const LevyModel& model, const HybridConfig& cfg) {
  double b = cfg.truncation_override > 0.0 ? cfg.truncation_override
                                           : model.truncation_bound(cfg.tail_tolerance);
  const double cells = std::ceil(b / cfg.dy - 1e-9);
  return std::max(1.0, cells) * cfg.dy;
}

double choose_eps(const LevyModel& model, const HybridConfig& cfg, double b) {
  if (cfg.eps_override > 0.0) return cfg.eps_override;
  const double dt = 1.0 / cfg.steps_per_year;
  const double budget = cfg.explicit_intensity_budget / dt;
  const int max_cells = static_cast<int>(std::llround(b / cfg.dy));
  int lo = 1;
  if (model.tail_intensity(lo * cfg.dy) <= budget) return cfg.dy;
  int hi = lo;
  while (hi < max_cells && model.tail_intensity(hi * cfg.dy) > budget) hi *= 2;
  hi = std::min(hi, max_cells);
  if (model.tail_intensity(hi * cfg.dy) > budget) return hi * cfg.dy;
  // Smallest cell count whose truncated intensity fits the budget.
  while (lo + 1 < hi) {
    const int mid = (lo + hi) / 2;
    (model.tail_intensity(mid * cfg.dy) > budget ? lo : hi) = mid;
  }
  return hi * cfg.dy;
}

JumpDiscretization make_jumps(const LevyModel& model, const HybridConfig& cfg) {
  const double b = choose_truncation(model, cfg);
  const double eps = std::min(choose_eps(model, cfg, b), b);
  return discretize_jumps(model, cfg.dy, eps, b);
}

void run_partitioned(int n_items, int threads,
                     const std::function<void(int, int, int)>& body) {
  if (threads <= 1 || n_items < 2 * threads) {
    body(0, n_items, 0);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n_items + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(n_items, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end, t] { body(begin, end, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

HybridPricer::HybridPricer(const ElvaContract& contract, const LevyModel& model,
                           const HullWhiteParams& rates,
                           const MortalityTable& mortality,
                           const HybridConfig& config)
    : contract_(contract),
      model_(model),
      rates_(rates),
      mortality_(mortality),
      config_(config),
      grid_(build_log_grid(contract, model, rates, config)),
      tree_(rates, contract.maturity, config.steps_per_year, config.max_levels),
      jumps_(make_jumps(model, config)) {
  q_hat_.resize(contract.maturity);
  for (int m = 0; m < contract.maturity; ++m)
    q_hat_[m] = effective_dividend(contract, m);
  prototype_stepper_ = std::make_unique<ImexStepper>(
      grid_, jumps_, model.gaussian_variance(), tree_.dt());
}

ValueSurface HybridPricer::terminal_surface() const {
  ValueSurface s;
  s.level = tree_.levels() - 1;
  s.n_y = grid_.n;
  s.v.resize(static_cast<std::size_t>(s.level + 1) * grid_.n);
  std::vector<double> payoff(grid_.n);
  for (int i = 0; i < grid_.n; ++i)
    payoff[i] = death_benefit(contract_, contract_.maturity, std::exp(grid_.y(i)));
  for (int j = 0; j <= s.level; ++j)
    std::copy(payoff.begin(), payoff.end(), s.row(j));
  return s;
}

void HybridPricer::rollback_interval(ValueSurface& surface, int m) const {
  const int nt = config_.steps_per_year;
  if (surface.level != (m + 1) * nt)
    throw std::invalid_argument("rollback_interval: surface level mismatch");
  const double q_hat = q_hat_[m];
  const int threads = std::max(1, config_.threads);

  std::vector<ImexStepper> steppers(static_cast<std::size_t>(threads),
                                    *prototype_stepper_);
  ValueSurface next = std::move(surface);
  ValueSurface cur;
  cur.n_y = grid_.n;

  for (int n = (m + 1) * nt - 1; n >= m * nt; --n) {
    cur.level = n;
    cur.v.assign(static_cast<std::size_t>(n + 1) * grid_.n, 0.0);
    run_partitioned(n + 1, threads, [&](int begin, int end, int worker) {
      std::vector<double> vbar(static_cast<std::size_t>(grid_.n));
      ImexStepper& stepper = steppers[static_cast<std::size_t>(worker)];
      for (int j = begin; j < end; ++j) {
        const double p = tree_.pu(n, j);
        const double* up = next.row(tree_.ju(n, j));
        const double* dn = next.row(tree_.jd(n, j));
        for (int i = 0; i < grid_.n; ++i)
          vbar[static_cast<std::size_t>(i)] = p * up[i] + (1.0 - p) * dn[i];
        stepper.step(vbar, std::span<double>(cur.row(j), grid_.n),
                     tree_.rate(n, j), q_hat);
      }
    });
    next = std::move(cur);
    cur.n_y = grid_.n;
  }
  surface = std::move(next);
}

void HybridPricer::anniversary_update(ValueSurface& surface, int m,
                                      SurrenderMode mode) const {
  if (m < 1 || m >= contract_.maturity)
    throw std::invalid_argument("anniversary_update: m must lie in [1, M-1]");
  const double p_death = mortality_.conditional_death_prob(m);
  std::vector<double> db(grid_.n), sb(grid_.n);
  for (int i = 0; i < grid_.n; ++i) {
    const double fund = std::exp(grid_.y(i));
    db[i] = death_benefit(contract_, m, fund);
    sb[i] = mode == SurrenderMode::allowed ? surrender_benefit(contract_, m, fund) : 0.0;
  }
  for (int j = 0; j <= surface.level; ++j) {
    double* row = surface.row(j);
    for (int i = 0; i < grid_.n; ++i)
      row[i] = p_death * db[i] + (1.0 - p_death) * std::max(sb[i], row[i]);
  }
}

double HybridPricer::price(SurrenderMode mode) const {
  return price(mode, {}, nullptr);
}

double HybridPricer::price(SurrenderMode mode,
                           const std::vector<int>& region_anniversaries,
                           std::vector<ExerciseRegion>* regions) const {
  for (int m : region_anniversaries)
    if (m < 1 || m >= contract_.maturity)
      throw std::invalid_argument("exercise region: anniversary must lie in [1, M-1]");

  ValueSurface surface = terminal_surface();
  for (int m = contract_.maturity - 1; m >= 0; --m) {
    rollback_interval(surface, m);
    if (m == 0) break;
    if (regions &&
        std::find(region_anniversaries.begin(), region_anniversaries.end(), m) !=
            region_anniversaries.end()) {
      ExerciseRegion region;
      region.anniversary = m;
      region.fund.resize(grid_.n);
      std::vector<double> sb(grid_.n);
      for (int i = 0; i < grid_.n; ++i) {
        region.fund[i] = std::exp(grid_.y(i));
        sb[i] = surrender_benefit(contract_, m, region.fund[i]);
      }
      const int level = m * config_.steps_per_year;
      region.rate.resize(static_cast<std::size_t>(level) + 1);
      region.optimal.assign((static_cast<std::size_t>(level) + 1) * grid_.n, 0);
      for (int j = 0; j <= level; ++j) {
        region.rate[j] = tree_.rate(level, j);
        const double* row = surface.row(j);
        for (int i = 0; i < grid_.n; ++i)
          region.optimal[static_cast<std::size_t>(j) * grid_.n + i] =
              sb[i] >= row[i] ? 1 : 0;
      }
      regions->push_back(std::move(region));
    }
    anniversary_update(surface, m, mode);
  }

  // Root row: log F0 sits on a node by construction; interpolate anyway so
  // off-node queries work if the anchor is ever configured away.
  const double x = std::log(contract_.f0);
  const double* row = surface.row(0);
  int i = std::min(grid_.n - 2, std::max(0, static_cast<int>((x - grid_.y_min) / grid_.dy)));
  const double w = (x - grid_.y(i)) / grid_.dy;
  return row[i] * (1.0 - w) + row[i + 1] * w;
}

ExerciseRegion HybridPricer::exercise_region(int anniversary) const {
  std::vector<ExerciseRegion> regions;
  price(SurrenderMode::allowed, {anniversary}, &regions);
  return std::move(regions.front());
}

}  // namespace elva
