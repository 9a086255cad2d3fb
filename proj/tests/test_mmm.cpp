#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "tltk/config.hpp"
#include "tltk/constants.hpp"
#include "tltk/ensemble.hpp"
#include "tltk/errors.hpp"
#include "tltk/mmm.hpp"
#include "tltk/physics.hpp"
#include "tltk/special.hpp"
#include "tltk/synth.hpp"

using namespace tltk;
namespace kc = tltk::constants;

namespace {

struct Fixture {
  RunConfig cfg;
  InterferometerSetup setup = cfg.setup();
  BeamEnsemble beam = cfg.beam();
  ClusterSpecies sp = cfg.species_model().at_mass(beam.effective_mass_center());
};

// Independent evaluation of the decay-constant integral with a fixed-panel
// composite Simpson rule (4096 panels over z in [0, 8]).
double reference_k(int ell, double sigma_q, const ClusterSpecies& sp,
                   const InterferometerSetup& setup, double v) {
  const double hbar = kc::hbar;
  const double lt = talbot_length(sp.mass, v, setup.period());
  const double arg_j = sp.radius * sigma_q / hbar;
  const double arg_f =
      std::abs(ell) * setup.period() * sigma_q * setup.separation / (hbar * lt);
  auto integrand = [&](double z) {
    double j1 = special::spherical_j1(arg_j * z);
    return std::exp(-z * z / 2) * j1 * j1 *
           special::one_minus_si_over_x(arg_f * z);
  };
  const int panels = 4096;
  const double h = 8.0 / panels;
  double acc = integrand(0.0) + integrand(8.0);
  for (int i = 1; i < panels; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  double integral = acc * h / 3.0;
  double pref = 3.0 * hbar * sp.mass / (sp.radius * sigma_q * kc::m_electron);
  return 2.0 * std::sqrt(2.0 / M_PI) * pref * pref *
         (setup.separation / v) * integral;
}

}  // namespace

TEST_CASE("decay constant matches an independent fixed-panel quadrature") {
  Fixture f;
  for (double len : {1e-9, 10e-9, 100e-9, 1e-6}) {
    double sigma_q = kc::hbar / len;
    for (int ell : {1, 2}) {
      double got = mmm_decay_constant(ell, sigma_q, f.sp, f.setup, 160.0);
      double want = reference_k(ell, sigma_q, f.sp, f.setup, 160.0);
      CHECK(got == doctest::Approx(want).epsilon(1e-7));
    }
  }
}

TEST_CASE("decay constants at reference spreads") {
  Fixture f;
  auto k1 = [&](double len) {
    return mmm_decay_constant(1, kc::hbar / len, f.sp, f.setup, 160.0);
  };
  CHECK(k1(0.1e-9) == doctest::Approx(60750507259.096489).epsilon(1e-7));
  CHECK(k1(1e-9) == doctest::Approx(44535491936696.094).epsilon(1e-7));
  CHECK(k1(10e-9) == doctest::Approx(960671110525579.5).epsilon(1e-7));
  CHECK(k1(100e-9) == doctest::Approx(195957585532982.59).epsilon(1e-7));
  CHECK(k1(1e-6) == doctest::Approx(2308101723599.7886).epsilon(1e-7));
  CHECK(k1(10e-6) == doctest::Approx(23120785296.721867).epsilon(1e-7));
  CHECK(mmm_decay_constant(2, kc::hbar / 10e-9, f.sp, f.setup, 160.0) ==
        doctest::Approx(1026753258111163.4).epsilon(1e-7));
  // The experiment is most sensitive near hbar/sigma_q = 10 nm.
  CHECK(k1(10e-9) > k1(1e-9));
  CHECK(k1(10e-9) > k1(100e-9));
}

TEST_CASE("reduction factor properties") {
  Fixture f;
  const double sigma_q = kc::hbar / 10e-9;
  MmmParams params{1e15, sigma_q, 0.0};
  CHECK(mmm_reduction_factor(0, params, f.sp, f.setup, 160.0) == 1.0);
  // Deep suppression underflows to an exact zero.
  CHECK(mmm_reduction_factor(1, {1e12, sigma_q, 0.0}, f.sp, f.setup, 160.0) ==
        0.0);
  // Monotone increasing in tau_e once above the underflow region.
  double prev = 0.0;
  for (double tau : {1e14, 1e15, 1e16, 1e17, 1e18}) {
    MmmParams p{tau, sigma_q, 0.0};
    double r = mmm_reduction_factor(1, p, f.sp, f.setup, 160.0);
    CHECK(r > prev);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    prev = r;
  }
  // R_1 -> 1 as tau -> infinity and as sigma_q -> 0.
  MmmParams late{1e30, sigma_q, 0.0};
  CHECK(std::abs(mmm_reduction_factor(1, late, f.sp, f.setup, 160.0) - 1.0) <
        1e-9);
  MmmParams soft{1.0, kc::hbar / 1e8, 0.0};
  CHECK(std::abs(mmm_reduction_factor(1, soft, f.sp, f.setup, 160.0) - 1.0) <
        1e-9);
  // Mirror symmetry in the order.
  MmmParams p{1e15, sigma_q, 0.0};
  CHECK(mmm_reduction_factor(-1, p, f.sp, f.setup, 160.0) ==
        doctest::Approx(mmm_reduction_factor(1, p, f.sp, f.setup, 160.0)));
}

TEST_CASE("modified signal rescales every order except the mean") {
  Fixture f;
  std::vector<std::complex<double>> s = {0.05, 0.2, 1.0, 0.2, 0.05};
  MmmParams params{1e15, kc::hbar / 10e-9, 0.0};
  auto out = modified_signal(s, params, f.sp, f.setup, 160.0);
  REQUIRE(out.size() == s.size());
  CHECK(out[2] == s[2]);
  for (int l = 1; l <= 2; ++l) {
    double r = mmm_reduction_factor(l, params, f.sp, f.setup, 160.0);
    CHECK(out[2 + l].real() == doctest::Approx(s[2 + l].real() * r));
    CHECK(out[2 - l].real() == doctest::Approx(s[2 - l].real() * r));
  }
}

TEST_CASE("posterior quantile interpolates the discrete CDF") {
  MacroPosterior post;
  post.log10_tau = Eigen::VectorXd::LinSpaced(4, 0.0, 3.0);
  post.weights = Eigen::VectorXd::Constant(4, 0.25);
  CHECK(posterior_quantile_log10(post, 0.05) == doctest::Approx(0.0));
  CHECK(posterior_quantile_log10(post, 0.30) ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(posterior_quantile_log10(post, 0.75) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(posterior_quantile_log10(post, 0.99) ==
        doctest::Approx(2.96).epsilon(1e-12));
  CHECK_THROWS_AS(posterior_quantile_log10(post, 1.0), ValidationError);
}

TEST_CASE("Gaussian posterior check vanishes for an exact Gaussian") {
  MacroPosterior post;
  int n = 2001;
  post.log10_tau = Eigen::VectorXd::LinSpaced(n, 0.0, 25.0);
  double mu = 14.0, sig = 0.8;
  post.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = (post.log10_tau[i] - mu) / sig;
    post.weights[i] = std::exp(-z * z / 2);
  }
  post.weights /= post.weights.sum();
  GaussianCheck check = gaussian_posterior_check(post);
  CHECK(check.kl_divergence < 1e-8);
  CHECK(check.mean_log10_tau == doctest::Approx(mu).epsilon(1e-10));
  CHECK(check.sigma_log10_tau == doctest::Approx(sig).epsilon(1e-6));
}

TEST_CASE("Bayesian update with no data returns the prior") {
  TauGridSpec grid;
  MacroPosterior post = bayesian_update({}, {}, 960671110525579.5,
                                        kc::hbar / 10e-9, grid);
  REQUIRE(post.log10_tau.size() == grid.points);
  CHECK(post.n_data_used == 0);
  double uniform = 1.0 / grid.points;
  for (int i = 0; i < post.weights.size(); i += 200)
    CHECK(post.weights[i] == doctest::Approx(uniform).epsilon(1e-12));
}

TEST_CASE("profiled scan likelihood prefers the generating visibility") {
  Fixture f;
  const double v_ideal = 0.14020999910117718;
  const double period = f.setup.period();
  FringeTruth truth{.visibility = 0.5 * v_ideal,
                    .rate0 = 120.0,
                    .dark_rate = 30.0,
                    .period = period,
                    .drift_rate = 0.0};
  ScanProtocol protocol;
  FringeScanRecord scan = synth_fringe_scan(truth, protocol,
                                            {62e-3, 15.2e-3, 68e-3},
                                            170.0 * kc::kDa, 4242);
  LikelihoodOptions opts;
  double at_truth = scan_log_likelihood(scan, truth.visibility, period, opts);
  double at_zero = scan_log_likelihood(scan, 1e-3, period, opts);
  double at_full = scan_log_likelihood(scan, v_ideal, period, opts);
  CHECK(at_truth > at_zero);
  CHECK(at_truth > at_full);

  ScanLikelihoodCurve curve =
      profile_scan_likelihood(scan, v_ideal, period, opts);
  REQUIRE(curve.v_grid.size() == opts.v_grid_points);
  CHECK(curve.v_grid[0] == doctest::Approx(0.0));
  CHECK(curve.v_grid[curve.v_grid.size() - 1] == doctest::Approx(v_ideal));
  for (int i = 0; i < curve.log_like.size(); ++i)
    CHECK(std::isfinite(curve.log_like[i]));
  // The interpolant agrees with the sampled nodes.
  CHECK(curve.interp(curve.v_grid[100]) ==
        doctest::Approx(curve.log_like[100]).epsilon(1e-12));
}

TEST_CASE("undamped fringes push the posterior to the prior boundary") {
  Fixture f;
  const double v_ideal = 0.14020999910117718;
  const double period = f.setup.period();
  FringeTruth truth{.visibility = v_ideal,
                    .rate0 = 120.0,
                    .dark_rate = 30.0,
                    .period = period,
                    .drift_rate = 0.0};
  ScanProtocol protocol;
  LikelihoodOptions opts;
  std::vector<ScanLikelihoodCurve> curves;
  std::vector<double> v_ideals;
  for (int i = 0; i < 6; ++i) {
    FringeScanRecord scan = synth_fringe_scan(truth, protocol,
                                              {62e-3, 15.2e-3, 68e-3},
                                              170.0 * kc::kDa, 100 + i);
    curves.push_back(profile_scan_likelihood(scan, v_ideal, period, opts));
    v_ideals.push_back(v_ideal);
  }
  TauGridSpec grid;
  MacroPosterior post = bayesian_update(curves, v_ideals, 960671110525579.5,
                                        kc::hbar / 10e-9, grid);
  CHECK(post.boundary_warning);
  CHECK(post.weights[post.weights.size() - 1] > 1e-8);

  // Damped fringes (V = R1 * v_ideal at tau ~ 1e15 s) keep the posterior
  // peak in the interior.
  double r1 = std::exp(-960671110525579.5 / 1e15);
  FringeTruth damped = truth;
  damped.visibility = r1 * v_ideal;
  curves.clear();
  v_ideals.clear();
  for (int i = 0; i < 6; ++i) {
    FringeScanRecord scan = synth_fringe_scan(damped, protocol,
                                              {62e-3, 15.2e-3, 68e-3},
                                              170.0 * kc::kDa, 200 + i);
    curves.push_back(profile_scan_likelihood(scan, v_ideal, period, opts));
    v_ideals.push_back(v_ideal);
  }
  MacroPosterior post2 = bayesian_update(curves, v_ideals, 960671110525579.5,
                                         kc::hbar / 10e-9, grid);
  int argmax = 0;
  post2.weights.maxCoeff(&argmax);
  CHECK(argmax > 0);
  CHECK(argmax < post2.weights.size() - 1);
  double q = posterior_quantile_log10(post2, 0.05);
  CHECK(q > grid.log10_min);
  CHECK(q < grid.log10_max);
}
