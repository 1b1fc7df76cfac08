#include "elva/contract.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace elva {

ElvaContract ElvaContract::make(int maturity, double f0, double g, double c,
                                double q, const std::vector<double>& fees,
                                const std::vector<double>& penalties, int age) {
  if (maturity < 1) throw std::invalid_argument("contract: maturity must be >= 1");
  if (!(f0 > 0.0)) throw std::invalid_argument("contract: F0 must be positive");
  if (c < g) throw std::invalid_argument("contract: cap rate must be >= floor rate");
  auto broadcast = [](const std::vector<double>& v, std::size_t n) {
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    if (v.size() != n)
      throw std::invalid_argument("contract: schedule length mismatch");
    return v;
  };
  ElvaContract out;
  out.maturity = maturity;
  out.f0 = f0;
  out.floor_rate = g;
  out.cap_rate = c;
  out.dividend = q;
  out.fees = broadcast(fees, static_cast<std::size_t>(maturity));
  out.penalties = broadcast(penalties, static_cast<std::size_t>(std::max(1, maturity - 1)));
  out.age = age;
  for (double a : out.fees)
    if (a < 0.0 || a >= 1.0)
      throw std::invalid_argument("contract: fees must lie in [0, 1)");
  for (double p : out.penalties)
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("contract: penalties must lie in [0, 1]");
  return out;
}

ElvaContract ElvaContract::make(int maturity, double f0, double g, double c,
                                double q, double fee, double penalty, int age) {
  return make(maturity, f0, g, c, q, std::vector<double>{fee},
              std::vector<double>{penalty}, age);
}

double death_benefit(const ElvaContract& c, int m, double fund) {
  const double floor = c.f0 * std::exp(c.floor_rate * m);
  const double cap = c.f0 * std::exp(c.cap_rate * m);
  return std::max(floor, std::min(cap, fund));
}

double surrender_benefit(const ElvaContract& c, int m, double fund) {
  if (m == c.maturity) return death_benefit(c, m, fund);
  const double cap = c.f0 * std::exp(c.cap_rate * m);
  return (1.0 - c.penalty(m)) * std::min(cap, fund);
}

double effective_dividend(const ElvaContract& c, int m) {
  return c.dividend - std::log1p(-c.fee(m));
}

MortalityTable::MortalityTable(std::vector<double> mass) : mass_(std::move(mass)) {
  survival_.resize(mass_.size() + 1);
  survival_[0] = 1.0;
  double cum = 0.0;
  for (std::size_t m = 0; m < mass_.size(); ++m) {
    if (mass_[m] < 0.0)
      throw std::invalid_argument("mortality: negative mass at entry " +
                                  std::to_string(m + 1));
    cum += mass_[m];
    survival_[m + 1] = 1.0 - cum;
  }
  if (cum > 1.0 + 1e-12)
    throw std::invalid_argument("mortality: masses sum beyond 1");
}

MortalityTable MortalityTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("mortality: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> mass;
  double cum = 0.0;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    long m = 0;
    double p = 0.0;
    if (!(ss >> m >> p))
      throw std::runtime_error("mortality: parse error at row " + std::to_string(row));
    if (m != static_cast<long>(mass.size()) + 1)
      throw std::runtime_error("mortality: entries must be consecutive from 1 (row " +
                               std::to_string(row) + ")");
    if (p < 0.0)
      throw std::runtime_error("mortality: negative mass at row " + std::to_string(row));
    cum += p;
    if (cum > 1.0 + 1e-12)
      throw std::runtime_error("mortality: cumulative mass exceeds 1 at row " +
                               std::to_string(row));
    mass.push_back(p);
  }
  if (mass.empty()) throw std::runtime_error("mortality: no data rows in " + path);
  return MortalityTable(std::move(mass));
}

double MortalityTable::mass(int m) const {
  if (m < 1) throw std::invalid_argument("mortality: year index starts at 1");
  if (m > horizon()) return 0.0;
  return mass_[static_cast<std::size_t>(m) - 1];
}

double MortalityTable::survival_to(int m) const {
  if (m < 0) throw std::invalid_argument("mortality: negative year index");
  if (m >= static_cast<int>(survival_.size())) return survival_.back();
  return survival_[static_cast<std::size_t>(m)];
}

double MortalityTable::conditional_death_prob(int m) const {
  const double surv = survival_to(m - 1);
  if (!(surv > 0.0))
    throw std::domain_error("mortality: survival exhausted before year " +
                            std::to_string(m));
  return mass(m) / surv;
}

}  // namespace elva
