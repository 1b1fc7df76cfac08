// Longstaff-Schwartz valuation on anniversary-sampled paths. Continuation
// values are regressed locally: the fund axis is split into sectors around
// the floor/cap growth levels (plus median splits of crowded sectors) and a
// bivariate polynomial in (F, r) is fit per sector, its degree chosen on a
// held-out fifth of the sector's points.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "elva/contract.hpp"
#include "elva/hull_white.hpp"
#include "elva/levy_models.hpp"

namespace elva {

struct PathSet {
  int maturity = 0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string model_name;
  // Row-major by anniversary m = 0..maturity.
  std::vector<double> fund, rate, integral;

  double f(int m, std::size_t k) const { return fund[m * n_paths + k]; }
  double r(int m, std::size_t k) const { return rate[m * n_paths + k]; }
  double I(int m, std::size_t k) const { return integral[m * n_paths + k]; }
};

PathSet simulate_paths(const LevyModel& model, const HullWhiteParams& rates,
                       const ElvaContract& contract, std::size_t n_paths,
                       std::uint64_t seed);

struct PriceResult {
  double value = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Normal-approximation interval, mean +- z * s / sqrt(n).
std::pair<double, double> confidence_interval(std::span<const double> samples,
                                              double level = 0.99);
PriceResult summarize(std::span<const double> samples, double level = 0.99);

// Per-path discounted cashflow of the contract without surrender.
std::vector<double> no_surrender_cashflows(const PathSet& paths,
                                           const MortalityTable& mortality,
                                           const ElvaContract& contract);
PriceResult price_no_surrender(const PathSet& paths, const MortalityTable& mortality,
                               const ElvaContract& contract);

struct SectorPartition {
  std::vector<double> bounds;  // strictly increasing; sector s is (bounds[s-1], bounds[s]]
  std::vector<std::vector<std::uint32_t>> members;

  std::size_t sectors() const { return members.size(); }
  int sector_of(double f) const;
};

SectorPartition partition_sectors(std::span<const double> fund,
                                  const ElvaContract& contract, int m,
                                  double split_fraction = 0.2);

struct SectorFit {
  bool fitted = false;
  int source = -1;  // sector whose data produced this fit
  int degree = 0;
  std::vector<double> coeffs;  // complete bivariate basis up to `degree`
  double f_lo = 0.0, f_hi = 0.0, r_lo = 0.0, r_hi = 0.0;
  std::vector<double> mse_in, mse_out;  // per tried degree
};

struct ContinuationModel {
  std::vector<double> bounds;
  std::vector<SectorFit> fits;
  double evaluate(double f, double r) const;
};

struct RegressionConfig {
  int degree_cap = 8;
  std::size_t min_points = 10;  // thinner sectors borrow a neighbour's fit
  double test_fraction = 0.2;
};

ContinuationModel fit_local_regression(std::span<const double> f,
                                       std::span<const double> r,
                                       std::span<const double> y,
                                       const SectorPartition& partition,
                                       std::uint64_t seed,
                                       const RegressionConfig& config = {});

struct SurrenderRule {
  // continuation[m-1] is the fitted continuation value at anniversary m.
  std::vector<ContinuationModel> continuation;
};

struct BackwardResult {
  PriceResult price;
  std::vector<int> stopping;       // per-path stopping anniversary in [1, M]
  std::vector<double> cashflows;   // per-path discounted value
  SurrenderRule rule;
};

BackwardResult backward_induction(const PathSet& paths, const ElvaContract& contract,
                                  const MortalityTable& mortality,
                                  const RegressionConfig& config = {});

// Reprices a frozen exercise rule on a fresh path set.
std::vector<double> cashflows_under_rule(const PathSet& paths, const SurrenderRule& rule,
                                         const ElvaContract& contract,
                                         const MortalityTable& mortality);
PriceResult price_under_rule(const PathSet& paths, const SurrenderRule& rule,
                             const ElvaContract& contract,
                             const MortalityTable& mortality);

}  // namespace elva
