// Exponential Lévy models for the fund log-price: normal inverse Gaussian,
// variance gamma, CGMY and Merton jump diffusion. Each model exposes its
// characteristic exponent psi (sign convention E[exp(i xi X_t)] =
// exp(-t psi(xi))), its Lévy density, the drift that turns exp(X) into a
// martingale (psi(-i) = 0 after correction), a cell-integrated jump
// discretization for the finite-difference engine, and increment samplers
// for Monte Carlo.
#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "elva/rng.hpp"

namespace elva {

struct NigParams {
  double alpha;  // tail heaviness, > 0
  double beta;   // skew, |beta| < alpha
  double delta;  // scale, > 0
};

struct VgParams {
  double kappa;  // subordinator variance, > 0
  double theta;  // drift of the subordinated Brownian motion
  double sigma;  // volatility, > 0
};

struct CgmyParams {
  double c;  // intensity, > 0
  double g;  // left tail decay, > 0
  double m;  // right tail decay, > 1 so that exp moments exist
  double y;  // fine structure, < 2
};

struct MjdParams {
  double sigma;      // diffusion volatility, >= 0
  double lambda;     // jump intensity, >= 0
  double jump_mean;  // mean of a single log jump
  double jump_std;   // std dev of a single log jump, > 0
};

class LevyModel {
 public:
  using Params = std::variant<NigParams, VgParams, CgmyParams, MjdParams>;

  static LevyModel nig(double alpha, double beta, double delta);
  static LevyModel vg(double kappa, double theta, double sigma);
  static LevyModel cgmy(double c, double g, double m, double y);
  static LevyModel mjd(double sigma, double lambda, double jump_mean,
                       double jump_std);

  const Params& params() const { return params_; }
  const std::string& name() const { return name_; }

  // Characteristic exponent without the martingale drift, evaluable on the
  // strip Im(xi) in [-1, 0]. Throws std::domain_error outside the strip or
  // when the parameters do not admit the requested point.
  std::complex<double> char_exponent(std::complex<double> xi) const;

  // Drift mu_c with psi_corrected(xi) = psi(xi) - i mu_c xi and
  // psi_corrected(-i) = 0, i.e. mu_c = psi(-i).
  double martingale_correction() const { return martingale_correction_; }

  // Lévy density nu(y), y != 0.
  double levy_density(double y) const;

  // Second cumulant per unit time (variance rate of X_1), and the variance
  // of the Brownian component alone.
  double variance_rate() const;
  double gaussian_variance() const;

  // Intensity of jumps larger than b: integral of nu over |y| > b.
  double tail_intensity(double b) const;
  // Smallest b with tail_intensity(b) < tol, located by bisection.
  double truncation_bound(double tol = 1e-8) const;

 private:
  LevyModel(Params p, std::string name);
  Params params_;
  std::string name_;
  double martingale_correction_ = 0.0;
};

// Jump measure restricted to eps <= |y| <= b and lumped onto grid cells of
// width dy: weights[k + half_width] approximates the nu-mass of the cell
// around k*dy. Jumps below eps are summarized by the diffusion add-on
// sigma_eps_sq; drift_comp is the discrete (e^y - 1) compensator so that
// exp(y) stays a martingale under the discretized generator.
struct JumpDiscretization {
  std::vector<double> weights;  // size 2*half_width + 1, zero inside the gap
  int half_width = 0;           // b / dy
  int gap = 1;                  // eps / dy
  double dy = 0.0;
  double eps = 0.0;
  double b = 0.0;
  double sigma_eps_sq = 0.0;
  double lambda_eps = 0.0;
  double drift_comp = 0.0;
};

// Requires 0 < eps <= b with both integer multiples of dy.
JumpDiscretization discretize_jumps(const LevyModel& model, double dy,
                                    double eps, double b);

// Draws increments of the uncorrected process X over a fixed horizon dt.
// The caller adds (r - q_hat) dt + mu_c dt. CGMY increments are sampled by
// inverting a tabulated CDF recovered from the characteristic function;
// the table is built once at construction.
class IncrementSampler {
 public:
  IncrementSampler(const LevyModel& model, double dt);
  double sample(Rng& rng) const;
  double dt() const { return dt_; }

 private:
  struct CgmyTable {
    std::vector<double> x;
    std::vector<double> cdf;
  };
  LevyModel model_;
  double dt_;
  // NIG inverse-Gaussian subordinator parameters.
  double ig_mean_ = 0.0;
  double ig_shape_ = 0.0;
  std::shared_ptr<const CgmyTable> cgmy_table_;
};

}  // namespace elva
