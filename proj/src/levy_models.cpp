#include "elva/levy_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fftw3.h>

#include "elva/math_util.hpp"

namespace elva {
namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

void check_strip(const cd& xi) {
  const double v = xi.imag();
  if (v < -1.0 - 1e-12 || v > 1e-12)
    throw std::domain_error("char_exponent: xi outside the strip Im in [-1, 0]");
}

cd psi_nig(const NigParams& p, cd xi) {
  const cd w = p.beta + kI * xi;
  if (xi.real() == 0.0 && std::abs(p.beta - xi.imag()) >= p.alpha)
    throw std::domain_error("char_exponent: NIG exponent undefined at this xi");
  const double gamma = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
  return p.delta * (std::sqrt(cd(p.alpha * p.alpha) - w * w) - gamma);
}

cd psi_vg(const VgParams& p, cd xi) {
  const cd z = 1.0 - kI * xi * p.theta * p.kappa +
               0.5 * p.kappa * p.sigma * p.sigma * xi * xi;
  if (z.imag() == 0.0 && z.real() <= 0.0)
    throw std::domain_error("char_exponent: VG log argument on the cut");
  return -std::log(z) / p.kappa;
}

cd psi_cgmy(const CgmyParams& p, cd xi) {
  const cd gp = std::pow(cd(p.g) + kI * xi, p.y);
  const cd mp = std::pow(cd(p.m) - kI * xi, p.y);
  return p.c * std::tgamma(-p.y) *
         (std::pow(p.g, p.y) - gp + std::pow(p.m, p.y) - mp);
}

cd psi_mjd(const MjdParams& p, cd xi) {
  const cd jump = std::exp(kI * p.jump_mean * xi -
                           0.5 * p.jump_std * p.jump_std * xi * xi);
  return 0.5 * p.sigma * p.sigma * xi * xi - p.lambda * (jump - 1.0);
}

double nu_nig(const NigParams& p, double y) {
  const double ay = p.alpha * std::abs(y);
  // K1 underflows around ay ~ 700; the density is zero for practical purposes.
  if (ay > 690.0) return 0.0;
  return p.delta * p.alpha / kPi * std::exp(p.beta * y) *
         std::cyl_bessel_k(1.0, ay) / std::abs(y);
}

double nu_vg(const VgParams& p, double y) {
  const double s2 = p.sigma * p.sigma;
  const double a = p.theta / s2;
  const double b = std::sqrt(p.theta * p.theta + 2.0 * s2 / p.kappa) / s2;
  return std::exp(a * y - b * std::abs(y)) / (p.kappa * std::abs(y));
}

double nu_cgmy(const CgmyParams& p, double y) {
  const double decay = y < 0.0 ? p.g : p.m;
  return p.c * std::exp(-decay * std::abs(y)) /
         std::pow(std::abs(y), 1.0 + p.y);
}

double nu_mjd(const MjdParams& p, double y) {
  return p.lambda * normal_pdf(y, p.jump_mean, p.jump_std);
}

double ig_draw(double mean, double shape, Rng& rng) {
  const double nu = rng.normal();
  const double y = nu * nu;
  double x = mean + mean * mean * y / (2.0 * shape) -
             mean / (2.0 * shape) *
                 std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
  if (x <= 0.0) x = std::numeric_limits<double>::min();
  const double u = rng.uniform();
  return u <= mean / (mean + x) ? x : mean * mean / x;
}

}  // namespace

LevyModel::LevyModel(Params p, std::string name)
    : params_(std::move(p)), name_(std::move(name)) {
  const cd at_minus_i = char_exponent(cd(0.0, -1.0));
  if (std::abs(at_minus_i.imag()) > 1e-10)
    throw std::invalid_argument("LevyModel: psi(-i) is not real");
  martingale_correction_ = at_minus_i.real();
}

LevyModel LevyModel::nig(double alpha, double beta, double delta) {
  if (!(alpha > 0.0) || !(std::abs(beta) < alpha) || !(delta > 0.0))
    throw std::invalid_argument("NIG requires alpha > 0, |beta| < alpha, delta > 0");
  if (!(std::abs(beta + 1.0) < alpha))
    throw std::invalid_argument("NIG requires |beta + 1| < alpha for exponential moments");
  return LevyModel(NigParams{alpha, beta, delta}, "nig");
}

LevyModel LevyModel::vg(double kappa, double theta, double sigma) {
  if (!(kappa > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("VG requires kappa > 0, sigma > 0");
  if (!(1.0 - theta * kappa - 0.5 * kappa * sigma * sigma > 0.0))
    throw std::invalid_argument("VG parameters do not admit exponential moments");
  return LevyModel(VgParams{kappa, theta, sigma}, "vg");
}

LevyModel LevyModel::cgmy(double c, double g, double m, double y) {
  if (!(c > 0.0) || !(g > 0.0) || !(m > 1.0) || !(y < 2.0))
    throw std::invalid_argument("CGMY requires C > 0, G > 0, M > 1, Y < 2");
  return LevyModel(CgmyParams{c, g, m, y}, "cgmy");
}

LevyModel LevyModel::mjd(double sigma, double lambda, double jump_mean,
                         double jump_std) {
  if (!(sigma >= 0.0) || !(lambda >= 0.0) || !(jump_std > 0.0))
    throw std::invalid_argument("MJD requires sigma >= 0, lambda >= 0, jump_std > 0");
  return LevyModel(MjdParams{sigma, lambda, jump_mean, jump_std}, "mjd");
}

std::complex<double> LevyModel::char_exponent(std::complex<double> xi) const {
  check_strip(xi);
  return std::visit(
      [&](const auto& p) -> cd {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NigParams>) return psi_nig(p, xi);
        else if constexpr (std::is_same_v<T, VgParams>) return psi_vg(p, xi);
        else if constexpr (std::is_same_v<T, CgmyParams>) return psi_cgmy(p, xi);
        else return psi_mjd(p, xi);
      },
      params_);
}

double LevyModel::levy_density(double y) const {
  if (y == 0.0) throw std::domain_error("levy_density: y must be nonzero");
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NigParams>) return nu_nig(p, y);
        else if constexpr (std::is_same_v<T, VgParams>) return nu_vg(p, y);
        else if constexpr (std::is_same_v<T, CgmyParams>) return nu_cgmy(p, y);
        else return nu_mjd(p, y);
      },
      params_);
}

double LevyModel::variance_rate() const {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NigParams>) {
          const double g2 = p.alpha * p.alpha - p.beta * p.beta;
          return p.delta * p.alpha * p.alpha / (g2 * std::sqrt(g2));
        } else if constexpr (std::is_same_v<T, VgParams>) {
          return p.sigma * p.sigma + p.theta * p.theta * p.kappa;
        } else if constexpr (std::is_same_v<T, CgmyParams>) {
          return p.c * std::tgamma(2.0 - p.y) *
                 (std::pow(p.g, p.y - 2.0) + std::pow(p.m, p.y - 2.0));
        } else {
          return p.sigma * p.sigma +
                 p.lambda * (p.jump_mean * p.jump_mean + p.jump_std * p.jump_std);
        }
      },
      params_);
}

double LevyModel::gaussian_variance() const {
  if (const auto* p = std::get_if<MjdParams>(&params_)) return p->sigma * p->sigma;
  return 0.0;
}

double LevyModel::tail_intensity(double b) const {
  if (!(b > 0.0)) throw std::invalid_argument("tail_intensity: b must be positive");
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    double lo = b;
    for (int panel = 0; panel < 200; ++panel) {
      const double hi = lo * 2.0;
      const double part = integrate(
          [&](double t) { return levy_density(sign * t); }, lo, hi, 1e-14);
      total += part;
      if (part < 1e-18 && panel > 2) break;
      lo = hi;
    }
  }
  return total;
}

double LevyModel::truncation_bound(double tol) const {
  double lo = 1e-3;
  if (tail_intensity(lo) < tol) return lo;
  double hi = 0.5;
  int guard = 0;
  while (tail_intensity(hi) >= tol) {
    hi *= 2.0;
    if (++guard > 40)
      throw std::runtime_error("truncation_bound: tail does not decay");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail_intensity(mid) < tol ? hi : lo) = mid;
  }
  return hi;
}

JumpDiscretization discretize_jumps(const LevyModel& model, double dy,
                                    double eps, double b) {
  if (!(dy > 0.0) || !(eps > 0.0) || eps > b + 1e-15)
    throw std::invalid_argument("discretize_jumps: need 0 < eps <= b and dy > 0");
  const double ge = eps / dy;
  const double gb = b / dy;
  if (std::abs(ge - std::round(ge)) > 1e-9 || std::abs(gb - std::round(gb)) > 1e-9)
    throw std::invalid_argument("discretize_jumps: eps and b must be multiples of dy");

  JumpDiscretization jd;
  jd.dy = dy;
  jd.eps = eps;
  jd.b = b;
  jd.gap = static_cast<int>(std::llround(ge));
  jd.half_width = static_cast<int>(std::llround(gb));
  jd.weights.assign(2 * jd.half_width + 1, 0.0);

  auto cell_mass = [&](double lo, double hi, double sign) -> double {
    if (hi <= lo) return 0.0;
    return integrate([&](double t) { return model.levy_density(sign * t); }, lo,
                     hi, 1e-13);
  };

  for (int k = jd.gap; k <= jd.half_width; ++k) {
    const double lo = std::max(eps, (k - 0.5) * dy);
    const double hi = std::min(b, (k + 0.5) * dy);
    jd.weights[jd.half_width + k] = std::max(cell_mass(lo, hi, 1.0), 0.0);
    jd.weights[jd.half_width - k] = std::max(cell_mass(lo, hi, -1.0), 0.0);
  }

  double lam = 0.0;
  double comp = 0.0;
  for (int k = -jd.half_width; k <= jd.half_width; ++k) {
    const double w = jd.weights[jd.half_width + k];
    lam += w;
    comp += w * std::expm1(k * dy);
  }
  jd.lambda_eps = lam;
  jd.drift_comp = comp;

  jd.sigma_eps_sq = integrate_singular_left(
      [&](double t) {
        return t * t * (model.levy_density(t) + model.levy_density(-t));
      },
      0.0, eps);
  if (jd.sigma_eps_sq < 0.0) jd.sigma_eps_sq = 0.0;
  return jd;
}

IncrementSampler::IncrementSampler(const LevyModel& model, double dt)
    : model_(model), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("IncrementSampler: dt must be positive");
  if (const auto* p = std::get_if<NigParams>(&model_.params())) {
    const double gamma = std::sqrt(p->alpha * p->alpha - p->beta * p->beta);
    ig_mean_ = p->delta * dt / gamma;
    ig_shape_ = p->delta * p->delta * dt * dt;
  } else if (std::holds_alternative<CgmyParams>(model_.params())) {
    // Tabulate the CDF of X_dt by Fourier inversion of exp(-dt psi).
    const int n = 1 << 16;
    const double std1 = std::sqrt(model_.variance_rate() * dt);
    const double h = 1e-5;
    const cd dpsi = (model_.char_exponent(cd(h)) - model_.char_exponent(cd(-h))) /
                    cd(2.0 * h);
    const double mean = -dpsi.imag() * dt;
    const double half = std::max(0.5, std::abs(mean) + 30.0 * std1);
    const double dx = 2.0 * half / n;
    const double dxi = 2.0 * kPi / (n * dx);

    std::vector<cd> buf(n);
    for (int j = 0; j < n; ++j) {
      const double xi = (j - n / 2) * dxi;
      const cd phi = std::exp(-dt * model_.char_exponent(cd(xi)));
      buf[j] = phi * std::exp(cd(0.0, xi * half));
    }
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf.data()),
                                      reinterpret_cast<fftw_complex*>(buf.data()),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    auto table = std::make_shared<CgmyTable>();
    table->x.resize(n);
    std::vector<double> density(n);
    for (int j = 0; j < n; ++j) {
      table->x[j] = -half + j * dx;
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      density[j] = std::max(0.0, sign * buf[j].real() * dxi / (2.0 * kPi));
    }
    table->cdf.resize(n);
    table->cdf[0] = 0.0;
    for (int j = 1; j < n; ++j)
      table->cdf[j] = table->cdf[j - 1] + 0.5 * dx * (density[j - 1] + density[j]);
    const double total = table->cdf.back();
    if (!(total > 0.0))
      throw std::runtime_error("IncrementSampler: CGMY density tabulation failed");
    for (double& c : table->cdf) c /= total;
    cgmy_table_ = std::move(table);
  }
}

double IncrementSampler::sample(Rng& rng) const {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NigParams>) {
          const double z = ig_draw(ig_mean_, ig_shape_, rng);
          return p.beta * z + std::sqrt(z) * rng.normal();
        } else if constexpr (std::is_same_v<T, VgParams>) {
          std::gamma_distribution<double> gamma(dt_ / p.kappa, p.kappa);
          const double g = gamma(rng);
          return p.theta * g + p.sigma * std::sqrt(g) * rng.normal();
        } else if constexpr (std::is_same_v<T, CgmyParams>) {
          const auto& t = *cgmy_table_;
          const double u = rng.uniform();
          const auto it = std::lower_bound(t.cdf.begin(), t.cdf.end(), u);
          std::size_t j = static_cast<std::size_t>(it - t.cdf.begin());
          if (j == 0) return t.x.front();
          if (j >= t.cdf.size()) return t.x.back();
          const double c0 = t.cdf[j - 1];
          const double c1 = t.cdf[j];
          const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
          return t.x[j - 1] + frac * (t.x[j] - t.x[j - 1]);
        } else {
          double x = p.sigma * std::sqrt(dt_) * rng.normal();
          std::poisson_distribution<int> pois(p.lambda * dt_);
          const int jumps = p.lambda > 0.0 ? pois(rng) : 0;
          for (int j = 0; j < jumps; ++j)
            x += p.jump_mean + p.jump_std * rng.normal();
          return x;
        }
      },
      model_.params());
}

}  // namespace elva
