#include "tltk/physics.hpp"

#include <cmath>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"
#include "tltk/special.hpp"

namespace tltk {

namespace con = constants;

void InterferometerSetup::validate() const {
  for (int i = 0; i < 3; ++i) {
    const auto& g = gratings[i];
    if (g.power < 0.0)
      throw ValidationError("setup: grating " + std::to_string(i + 1) +
                            " power must be >= 0");
    if (!(g.waist_y > 0.0))
      throw ValidationError("setup: grating " + std::to_string(i + 1) +
                            " waist must be > 0");
    if (!(g.wavelength > 0.0))
      throw ValidationError("setup: grating " + std::to_string(i + 1) +
                            " wavelength must be > 0");
  }
  if (!(separation > 0.0))
    throw ValidationError("setup: grating separation must be > 0");
  const double d = gratings[0].period();
  for (int i = 1; i < 3; ++i)
    if (std::abs(gratings[i].period() - d) > 1e-15)
      throw ValidationError("setup: all gratings must share one period");
}

double de_broglie_wavelength(double mass, double v) {
  if (!(mass > 0.0) || !(v > 0.0))
    throw ValidationError("de_broglie_wavelength: mass and v must be > 0");
  return con::h / (mass * v);
}

double talbot_length(double mass, double v, double period) {
  if (!(period > 0.0))
    throw ValidationError("talbot_length: period must be > 0");
  return mass * v * period * period / con::h;
}

GratingInteraction grating_interaction(const ClusterSpecies& species,
                                       const GratingSettings& grating,
                                       double v) {
  if (!(v > 0.0)) throw ValidationError("grating_interaction: v must be > 0");
  GratingInteraction gi;
  if (grating.power == 0.0) return gi;
  const double sigma = species.sigma_ion();
  gi.n0 = 8.0 * sigma * grating.power * grating.wavelength /
          (std::sqrt(2.0 * con::pi) * con::h * con::c * grating.waist_y * v);
  gi.phi0 = std::sqrt(8.0 / con::pi) * species.alpha_total() * grating.power /
            (con::hbar * con::c * con::eps0 * grating.waist_y * v);
  return gi;
}

namespace {

// B_n from (zeta_coh, zeta_ion, n0): e^{-n0/2} times the coefficient of
// w^{-n} in exp(p w + q/w), p = (zc - zi)/2, q = -(zc + zi)/2. The direct
// series is used for |pq| <= 9; outside that the coefficient is expressed
// through I_n(2 sqrt(pq)) or J_n(2 sqrt(-pq)) in log-magnitude form to avoid
// the series' catastrophic cancellation.
double coefficient_core(int n, double zc, double zi, double n0) {
  double p = 0.5 * (zc - zi);
  double q = -0.5 * (zc + zi);
  const double t = p * q;
  if (std::abs(t) <= 9.0) {
    return std::exp(-0.5 * n0) * special::generating_coefficient(n, p, q);
  }
  const int m = n < 0 ? -n : n;
  if (n < 0) std::swap(p, q);
  const double sgn_q = q >= 0.0 ? 1.0 : -1.0;
  double log_mag, sign;
  if (t > 0.0) {
    const double x = 2.0 * std::sqrt(t);
    const double log_i = x <= 30.0 ? std::log(special::bessel_i(m, x))
                                   : x + special::log_ive(m, x);
    log_mag = 0.5 * m * (std::log(std::abs(q)) - std::log(std::abs(p))) + log_i;
    sign = (m & 1) ? sgn_q : 1.0;
  } else {
    const double x = 2.0 * std::sqrt(-t);
    const double j = special::bessel_j(m, x);
    if (j == 0.0) return 0.0;
    log_mag = 0.5 * m * (std::log(std::abs(q)) - std::log(std::abs(p))) +
              std::log(std::abs(j));
    sign = ((m & 1) ? sgn_q : 1.0) * (j > 0.0 ? 1.0 : -1.0);
  }
  const double ex = -0.5 * n0 + log_mag;
  return ex > -745.0 ? sign * std::exp(ex) : 0.0;
}

}  // namespace

double tl_coefficient(const GratingInteraction& inter, int n, double xi,
                      Model model) {
  if (!std::isfinite(xi))
    throw ValidationError("tl_coefficient: xi must be finite");
  double zc, zi;
  if (model == Model::classical) {
    zc = inter.phi0 * con::pi * xi;
    zi = 0.5 * inter.n0;
  } else {
    zc = inter.phi0 * std::sin(con::pi * xi);
    zi = 0.5 * inter.n0 * std::cos(con::pi * xi);
  }
  return coefficient_core(n, zc, zi, inter.n0);
}

std::complex<double> talbot_lau_coefficient(const GratingInteraction& inter,
                                            int n, double xi) {
  return {tl_coefficient(inter, n, xi, Model::quantum), 0.0};
}

std::complex<double> talbot_lau_coefficient_classical(
    const GratingInteraction& inter, int n, double xi) {
  return {tl_coefficient(inter, n, xi, Model::classical), 0.0};
}

std::vector<std::complex<double>> fourier_signal(const InterferometerSetup& setup,
                                                 const ClusterSpecies& species,
                                                 double v, Model model,
                                                 int l_max) {
  if (l_max < 1) throw ValidationError("fourier_signal: l_max must be >= 1");
  setup.validate();
  const double d = setup.period();
  const double xi1 = setup.separation / talbot_length(species.mass, v, d);
  const GratingInteraction g1 = grating_interaction(species, setup.gratings[0], v);
  const GratingInteraction g2 = grating_interaction(species, setup.gratings[1], v);
  const GratingInteraction g3 = grating_interaction(species, setup.gratings[2], v);
  std::vector<std::complex<double>> s(2 * l_max + 1);
  for (int l = 0; l <= l_max; ++l) {
    const double b1 = tl_coefficient(g1, -l, 0.0, model);
    const double b2 = tl_coefficient(g2, 2 * l, -l * xi1, model);
    const double b3 = tl_coefficient(g3, l, 0.0, model);
    const double sl = b1 * b2 * b3;
    s[l_max + l] = {sl, 0.0};
    s[l_max - l] = {sl, 0.0};  // signal is real and even in l
  }
  return s;
}

double visibility_from_coefficients(
    const std::vector<std::complex<double>>& s) {
  if (s.empty() || s.size() % 2 == 0)
    throw ValidationError("visibility: need coefficients for l = -l_max..l_max");
  const std::size_t mid = s.size() / 2;
  const double s0 = s[mid].real();
  if (!(s0 > 0.0)) throw NumericError("visibility: degenerate signal, S_0 <= 0");
  return 2.0 * std::abs(s[mid + 1]) / s0;
}

double ionization_threshold(const ClusterSpecies& species, int charge_state) {
  if (charge_state < 0)
    throw ValidationError("ionization_threshold: charge state must be >= 0");
  if (!(species.radius > 0.0))
    throw ValidationError("ionization_threshold: species radius must be > 0");
  const double coulomb = con::e_charge * con::e_charge /
                         (4.0 * con::pi * con::eps0 * species.radius);
  return species.work_function + (charge_state + 0.375) * coulomb;
}

}  // namespace tltk
