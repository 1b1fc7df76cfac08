// Initial zero-coupon curve: either the flat curve P(0,T) = exp(-r0 T) or a
// tabulated curve read from CSV, interpolated log-linearly.
#pragma once

#include <string>
#include <vector>

namespace elva {

class DiscountCurve {
 public:
  static DiscountCurve flat(double r0);
  // CSV with a header row and rows (maturity_years, zcb_price), strictly
  // increasing maturities, all prices positive.
  static DiscountCurve from_csv(const std::string& path);

  bool is_flat() const { return flat_; }
  double flat_rate() const { return r0_; }

  double zcb(double t) const;
  // Instantaneous forward rate; tabulated curves use a centered difference
  // with a one-day step.
  double fwd(double t) const;
  // Integral of fwd over [t0, t1]; equals log(zcb(t0)/zcb(t1)).
  double integrated_fwd(double t0, double t1) const;

 private:
  DiscountCurve() = default;
  bool flat_ = true;
  double r0_ = 0.0;
  std::vector<double> times_;
  std::vector<double> log_prices_;
};

}  // namespace elva
