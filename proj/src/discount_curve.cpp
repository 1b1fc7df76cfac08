#include "elva/discount_curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace elva {

DiscountCurve DiscountCurve::flat(double r0) {
  DiscountCurve c;
  c.flat_ = true;
  c.r0_ = r0;
  return c;
}

DiscountCurve DiscountCurve::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("discount curve: cannot open " + path);
  DiscountCurve c;
  c.flat_ = false;
  c.times_.push_back(0.0);
  c.log_prices_.push_back(0.0);
  std::string line;
  std::getline(in, line);  // header
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t = 0.0, p = 0.0;
    if (!(ss >> t >> p))
      throw std::runtime_error("discount curve: parse error at row " +
                               std::to_string(row));
    if (t <= c.times_.back())
      throw std::runtime_error("discount curve: maturities must be strictly increasing (row " +
                               std::to_string(row) + ")");
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::runtime_error("discount curve: prices must be positive (row " +
                               std::to_string(row) + ")");
    c.times_.push_back(t);
    c.log_prices_.push_back(std::log(p));
  }
  if (c.times_.size() < 2)
    throw std::runtime_error("discount curve: no data rows in " + path);
  return c;
}

double DiscountCurve::zcb(double t) const {
  if (flat_) return std::exp(-r0_ * t);
  if (t <= 0.0) return 1.0;
  // Log-linear between knots, constant forward beyond the last one.
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  if (hi >= times_.size()) hi = times_.size() - 1;
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return std::exp(log_prices_[lo] + w * (log_prices_[hi] - log_prices_[lo]));
}

double DiscountCurve::fwd(double t) const {
  if (flat_) return r0_;
  const double h = 1.0 / 365.0;
  const double lo = std::max(0.0, t - h);
  const double hi = lo + 2.0 * h;
  return (std::log(zcb(lo)) - std::log(zcb(hi))) / (hi - lo);
}

double DiscountCurve::integrated_fwd(double t0, double t1) const {
  if (flat_) return r0_ * (t1 - t0);
  return std::log(zcb(t0)) - std::log(zcb(t1));
}

}  // namespace elva
