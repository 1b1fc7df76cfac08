// Equity-linked annuity contract with capped/floored accumulation and death
// benefits, surrender penalties, per-interval fees, and the mortality mass
// function of the insured.
#pragma once

#include <string>
#include <vector>

namespace elva {

struct ElvaContract {
  int maturity;                   // M, whole years
  double f0 = 1.0;                // initial premium = initial fund value
  double floor_rate;              // g
  double cap_rate;                // c, >= g
  double dividend;                // q
  std::vector<double> fees;       // alpha_m, m = 0..M-1, each in [0, 1)
  std::vector<double> penalties;  // gamma_m, m = 1..M-1, each in [0, 1]
  int age;                        // policyholder age at inception

  // Scalar fee/penalty schedules are broadcast to all intervals.
  static ElvaContract make(int maturity, double f0, double g, double c, double q,
                           const std::vector<double>& fees,
                           const std::vector<double>& penalties, int age);
  static ElvaContract make(int maturity, double f0, double g, double c, double q,
                           double fee, double penalty, int age);

  double fee(int m) const { return fees[static_cast<std::size_t>(m)]; }
  double penalty(int m) const { return penalties[static_cast<std::size_t>(m) - 1]; }
};

// DB_m(F) = max(F0 e^{g m}, min(F0 e^{c m}, F)), 1 <= m <= M.
double death_benefit(const ElvaContract& c, int m, double fund);

// SB_m(F) = (1 - gamma_m) min(F0 e^{c m}, F) before maturity; DB_M at m = M.
double surrender_benefit(const ElvaContract& c, int m, double fund);

// Fee paid continuously over [m, m+1]: q_hat = q - log(1 - alpha_m).
double effective_dividend(const ElvaContract& c, int m);

// Probability mass p_m of death in the m-th contract year (m >= 1), for the
// age the table was built for.
class MortalityTable {
 public:
  explicit MortalityTable(std::vector<double> mass);
  // CSV with a header row and rows (m, p_m); masses must be nonnegative and
  // sum to at most 1 (within rounding).
  static MortalityTable load_csv(const std::string& path);

  int horizon() const { return static_cast<int>(mass_.size()); }
  double mass(int m) const;               // p_m, zero beyond the table
  double survival_to(int m) const;        // 1 - sum_{h<=m} p_h
  // Mass of death in year m conditional on survival to m-1; throws when the
  // survival probability is not positive.
  double conditional_death_prob(int m) const;

 private:
  std::vector<double> mass_;
  std::vector<double> survival_;  // survival_[m] = survival to end of year m
};

}  // namespace elva
