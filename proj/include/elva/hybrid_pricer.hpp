// Hybrid lattice / finite-difference pricer. Between anniversaries the
// contract value solves a one-dimensional PIDE in the log fund value with
// the short rate frozen at a lattice node; rate transitions are handled by
// averaging over the node's up/down successors before each step. At
// anniversaries the value is mixed with the death benefit and compared with
// the surrender benefit. One time step treats diffusion and advection
// implicitly (tridiagonal solve), the jump convolution explicitly, and
// applies the exact per-step discount factor exp(-r dt) so that a constant
// payoff rolls back to the lattice discount bond identically.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "elva/contract.hpp"
#include "elva/fft_conv.hpp"
#include "elva/hull_white.hpp"
#include "elva/levy_models.hpp"

namespace elva {

struct HybridConfig {
  double dy = 0.010;
  int steps_per_year = 10;
  double grid_width_stds = 6.0;  // half-width in std devs of the terminal log fund
  // The explicit jump part is stable when lambda_eps * dt stays below 1;
  // the small-jump cutoff eps is raised until the truncated intensity fits
  // this budget (exceeding jumps are absorbed into the diffusion term).
  double explicit_intensity_budget = 1.0;
  double eps_override = 0.0;         // 0 = derive from the budget
  double truncation_override = 0.0;  // 0 = derive from tail_tolerance
  double tail_tolerance = 1e-8;      // neglected tail intensity
  std::size_t max_levels = 30000;
  std::size_t max_grid_points = 4000000;
  int threads = 1;
};

// Uniform grid in y = log F, spanning grid_width_stds standard deviations
// of Y_M on each side of log F0, with log F0 exactly on a node.
struct LogPriceGrid {
  double y_min = 0.0;
  double dy = 0.0;
  int n = 0;
  int anchor = 0;  // index of log F0
  double y(int i) const { return y_min + i * dy; }
};

LogPriceGrid build_log_grid(const ElvaContract& contract, const LevyModel& model,
                            const HullWhiteParams& rates, const HybridConfig& config);

enum class SurrenderMode { allowed, prohibited };

// Contract values on the product (rate nodes at one lattice level) x (grid).
struct ValueSurface {
  int level = 0;  // lattice time index n
  int n_y = 0;
  std::vector<double> v;  // row-major, (level+1) rows of n_y values
  double* row(int j) { return v.data() + static_cast<std::size_t>(j) * n_y; }
  const double* row(int j) const { return v.data() + static_cast<std::size_t>(j) * n_y; }
};

struct ExerciseRegion {
  int anniversary = 0;
  std::vector<double> fund;      // grid of fund values, size n_y
  std::vector<double> rate;      // node rates at the anniversary level
  std::vector<std::uint8_t> optimal;  // row-major [rate node][fund], 1 = surrender
  bool at(int j, int i) const {
    return optimal[static_cast<std::size_t>(j) * fund.size() + i] != 0;
  }
};

// One IMEX step at a frozen short rate. Exposed separately so the pieces of
// the scheme can be exercised directly in tests.
class ImexStepper {
 public:
  ImexStepper(const LogPriceGrid& grid, const JumpDiscretization& jumps,
              double gaussian_variance, double dt);

  // out may not alias in. First and last entries of the result are the
  // discounted input boundary values (the lattice carries those columns).
  void step(std::span<const double> in, std::span<double> out, double rate,
            double q_hat);

  double dt() const { return dt_; }
  const JumpDiscretization& jumps() const { return jumps_; }

 private:
  LogPriceGrid grid_;
  JumpDiscretization jumps_;
  double gaussian_variance_;
  double dt_;
  double diffusion_;  // (sigma^2 + sigma_eps^2) / 2
  JumpConvolver convolver_;
  std::vector<double> conv_, rhs_, lower_, diag_, upper_, scratch_;
};

class HybridPricer {
 public:
  HybridPricer(const ElvaContract& contract, const LevyModel& model,
               const HullWhiteParams& rates, const MortalityTable& mortality,
               const HybridConfig& config);

  double price(SurrenderMode mode) const;
  // Collects, at the requested anniversaries, the set where the surrender
  // benefit weakly exceeds the rolled-back continuation value.
  double price(SurrenderMode mode, const std::vector<int>& region_anniversaries,
               std::vector<ExerciseRegion>* regions) const;
  ExerciseRegion exercise_region(int anniversary) const;

  // Rolls a surface at level (m+1)*N_T back to level m*N_T.
  void rollback_interval(ValueSurface& surface, int m) const;
  void anniversary_update(ValueSurface& surface, int m, SurrenderMode mode) const;
  ValueSurface terminal_surface() const;

  const LogPriceGrid& grid() const { return grid_; }
  const RateTree& tree() const { return tree_; }
  const JumpDiscretization& jumps() const { return jumps_; }

 private:
  ElvaContract contract_;
  LevyModel model_;
  HullWhiteParams rates_;
  MortalityTable mortality_;
  HybridConfig config_;
  LogPriceGrid grid_;
  RateTree tree_;
  JumpDiscretization jumps_;
  std::vector<double> q_hat_;  // per interval
  std::unique_ptr<ImexStepper> prototype_stepper_;
};

}  // namespace elva
