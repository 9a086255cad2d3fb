// End-to-end verification binary. Each numbered check prints one PASS/FAIL
// line with the measured quantities; the process exit code is the number of
// failed checks. Expected runtime: about two minutes, dominated by the
// mass/power visibility maps.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "tltk/analysis.hpp"
#include "tltk/config.hpp"
#include "tltk/constants.hpp"
#include "tltk/ensemble.hpp"
#include "tltk/mmm.hpp"
#include "tltk/physics.hpp"
#include "tltk/rng.hpp"
#include "tltk/synth.hpp"

using namespace tltk;
namespace kc = tltk::constants;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %d. %s  [%s]\n", pass ? "PASS" : "FAIL", index, name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

// Defining two-point correlation quadrature for the grating coefficient
// (4096-point periodic mean over one period, d = 1).
std::complex<double> quadrature_oracle(const GratingInteraction& g, int n,
                                       double xi) {
  const int m = 4096;
  const std::complex<double> expo(-g.n0 / 2.0, g.phi0);
  std::complex<double> acc = 0.0;
  for (int j = 0; j < m; ++j) {
    double x = (j + 0.5) / m;
    double cm = std::cos(M_PI * (x - xi / 2));
    double cp = std::cos(M_PI * (x + xi / 2));
    acc += std::exp(expo * (cm * cm)) * std::conj(std::exp(expo * (cp * cp))) *
           std::exp(std::complex<double>(0.0, 2 * M_PI * n * x));
  }
  return acc / static_cast<double>(m);
}

void criterion_1_bessel_oracle() {
  auto t0 = Clock::now();
  std::mt19937 rng(20260825);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    GratingInteraction g;
    g.n0 = 6.0 * u01(rng);
    g.phi0 = -6.0 + 12.0 * u01(rng);
    double xi = -2.0 + 4.0 * u01(rng);
    int n = static_cast<int>(rng() % 13) - 6;
    double err =
        std::abs(talbot_lau_coefficient(g, n, xi) - quadrature_oracle(g, n, xi));
    worst = std::max(worst, err);
  }
  double dt = seconds_since(t0);
  report(1, "coefficient closed form vs defining quadrature (200 draws)",
         worst < 1e-9 && dt < 10.0,
         fmt("max |error| = %.3g (tol 1e-9), %.2f s (limit 10 s)", worst, dt));
}

void criterion_2_classical_limit() {
  RunConfig cfg;
  SpeciesModel model = cfg.species_model();

  // (a) Deep near-classical propagation: scaling mass and velocity together
  // leaves the grating interaction essentially unchanged while xi ~ 1/s^2.
  double worst_a = 0.0, worst_xi = 0.0;
  for (double s : {9.0, 12.0, 20.0, 40.0}) {
    for (double p2 : {7.6e-3, 15.2e-3, 30.4e-3}) {
      InterferometerSetup su = cfg.setup();
      su.gratings[1].power = p2;
      ClusterSpecies sp = model.at_mass(172.0 * s * kc::kDa);
      double v = 160.0 * s;
      auto sq = fourier_signal(su, sp, v, Model::quantum, 2);
      auto sc = fourier_signal(su, sp, v, Model::classical, 2);
      double dv = std::abs(visibility_from_coefficients(sq) -
                           visibility_from_coefficients(sc));
      worst_a = std::max(worst_a, dv);
      worst_xi = std::max(worst_xi, su.separation /
                                        talbot_length(sp.mass, v, su.period()));
    }
  }
  bool pass_a = worst_a < 1e-3 && worst_xi <= 0.01;

  // (b, c) Mass/power maps at strong outer gratings.
  InterferometerSetup strong = cfg.setup();
  strong.gratings[0].power = 100e-3;
  strong.gratings[2].power = 100e-3;
  Eigen::VectorXd masses =
      Eigen::VectorXd::LinSpaced(50, 100.0 * kc::kDa, 2000.0 * kc::kDa);
  Eigen::VectorXd powers = Eigen::VectorXd::LinSpaced(50, 0.0, 50e-3);

  auto t0 = Clock::now();
  VisibilityMap mq160 =
      visibility_map(masses, powers, strong, model, cfg.beam(), Model::quantum);
  double map_seconds = seconds_since(t0);
  VisibilityMap mc160 = visibility_map(masses, powers, strong, model,
                                       cfg.beam(), Model::classical);
  double worst_b = 0.0;
  for (int i = 0; i < masses.size(); ++i) {
    if (masses[i] < 600.0 * kc::kDa) continue;
    for (int k = 0; k < powers.size(); ++k)
      worst_b = std::max(
          worst_b, std::abs(mq160.visibility(i, k) - mc160.visibility(i, k)));
  }
  bool pass_b = worst_b < 0.02 && map_seconds < 60.0;

  BeamEnsemble slow = cfg.beam();
  slow.v_mean = 25.0;
  slow.v_sigma = 10.0 * 25.0 / 160.0;  // same relative spread
  VisibilityMap mq25 =
      visibility_map(masses, powers, strong, model, slow, Model::quantum);
  VisibilityMap mc25 =
      visibility_map(masses, powers, strong, model, slow, Model::classical);
  double worst_c = 0.0;
  for (int i = 0; i < masses.size(); ++i) {
    if (masses[i] <= 1000.0 * kc::kDa) continue;
    for (int k = 0; k < powers.size(); ++k)
      worst_c = std::max(
          worst_c, std::abs(mq25.visibility(i, k) - mc25.visibility(i, k)));
  }
  bool pass_c = worst_c > 0.1;

  report(2, "classical limit: xi<=0.01 agreement, high-mass agreement, slow-beam divergence",
         pass_a && pass_b && pass_c,
         fmt("xi<=0.01: max|dV| = %.3g (tol 1e-3, max xi %.4f); "
             "fast beam m>=600 kDa: max|dV| = %.4f (tol 0.02, map %.1f s); "
             "slow beam m>1 MDa: max|dV| = %.4f (need > 0.1)",
             worst_a, worst_xi, worst_b, map_seconds, worst_c));
}

void criterion_3_operating_point() {
  RunConfig cfg;
  PredictionResult pred = averaged_prediction(cfg.setup(), cfg.species_model(),
                                              cfg.beam(), cfg.contrast,
                                              cfg.l_max);
  bool in_band = pred.v_quantum_scaled >= 0.08 && pred.v_quantum_scaled <= 0.12;
  double ratio = pred.v_quantum_scaled / pred.v_classical_scaled;
  report(3, "nominal operating point lands on the measured visibility",
         in_band && ratio >= 1.5,
         fmt("V_quantum = %.4f (band [0.08, 0.12]), quantum/classical = %.2f "
             "(need >= 1.5)",
             pred.v_quantum_scaled, ratio));
}

void criterion_4_transmission() {
  RunConfig cfg;
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(61, 0.0, 30e-3);
  Eigen::VectorXd tq = transmission_vs_power(cfg.setup(), cfg.species_model(),
                                             cfg.beam(), grid, Model::quantum);
  Eigen::VectorXd tc = transmission_vs_power(cfg.setup(), cfg.species_model(),
                                             cfg.beam(), grid,
                                             Model::classical);
  double worst = (tq - tc).cwiseAbs().maxCoeff();
  bool monotone = true;
  for (int i = 1; i < tq.size(); ++i)
    if (tq[i] > tq[i - 1] + 1e-12) monotone = false;
  report(4, "transmission is model-blind and monotone in grating power",
         worst < 1e-10 && monotone,
         fmt("max |quantum - classical| = %.3g (tol 1e-10), monotone: %s",
             worst, monotone ? "yes" : "no"));
}

void criterion_5_reduction_factors() {
  RunConfig cfg;
  InterferometerSetup setup = cfg.setup();
  ClusterSpecies sp =
      cfg.species_model().at_mass(cfg.beam().effective_mass_center());
  const double sigma_q = kc::hbar / 10e-9;
  bool r0_exact =
      mmm_reduction_factor(0, {1e12, sigma_q, 0.0}, sp, setup, 160.0) == 1.0;
  bool monotone = true;
  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    double tau = std::pow(10.0, 10.0 + 0.5 * i);
    double r = mmm_reduction_factor(1, {tau, sigma_q, 0.0}, sp, setup, 160.0);
    if (r < prev) monotone = false;
    prev = r;
  }
  double late =
      mmm_reduction_factor(1, {1e30, sigma_q, 0.0}, sp, setup, 160.0);
  double soft =
      mmm_reduction_factor(1, {1.0, kc::hbar / 1e8, 0.0}, sp, setup, 160.0);
  bool limits = std::abs(late - 1.0) < 1e-9 && std::abs(soft - 1.0) < 1e-9;
  report(5, "reduction factors: identity order, monotonicity, limits",
         r0_exact && monotone && limits,
         fmt("R_0 = 1: %s; monotone in tau: %s; 1-R_1(tau=1e30) = %.2g, "
             "1-R_1(sigma_q->0) = %.2g (tol 1e-9)",
             r0_exact ? "yes" : "no", monotone ? "yes" : "no",
             1.0 - late, 1.0 - soft));
}

void criterion_6_macroscopicity_round_trip() {
  auto t0 = Clock::now();
  RunConfig cfg;
  InterferometerSetup setup = cfg.setup();
  BeamEnsemble beam = cfg.beam();
  SpeciesModel model = cfg.species_model();
  PredictionResult pred =
      averaged_prediction(setup, model, beam, cfg.contrast, cfg.l_max);
  FringeTruth truth{.visibility = pred.v_quantum_scaled,
                    .rate0 = cfg.rate0,
                    .dark_rate = cfg.dark_rate,
                    .period = setup.period(),
                    .drift_rate = cfg.drift_rate};
  FringeDataset ds = synth_fringe_dataset(truth, cfg.protocol(),
                                          cfg.grating_power, cfg.mass_center,
                                          cfg.n_scans, cfg.total_points,
                                          cfg.seed);
  std::vector<double> v_ideal(ds.scans.size(), pred.v_quantum);
  ClusterSpecies sp = model.at_mass(beam.effective_mass_center());
  MacroReport rep = macroscopicity(ds.scans, v_ideal, sp, setup, beam.v_mean,
                                   cfg.macro_options());
  double dt = seconds_since(t0);
  double argmax_nm = rep.argmax_hbar_over_sigma_q / 1e-9;
  bool mu_ok = rep.mu >= 14.5 && rep.mu <= 16.5;
  bool argmax_ok = argmax_nm >= 10.0 / 3.0 && argmax_nm <= 30.0;
  bool ok = mu_ok && argmax_ok && rep.converged_3dp &&
            rep.gaussian.kl_divergence < 1e-2 && !rep.boundary_warning &&
            dt < 600.0;
  report(6, "macroscopicity pipeline round trip on the nominal dataset", ok,
         fmt("mu = %.4f (band 15.5 +- 1.0), argmax = %.2f nm (band [3.3, 30]), "
             "trace delta = %.2e (tol 5e-4 -> %s), KL = %.2e (tol 1e-2), %.1f s",
             rep.mu, argmax_nm, rep.convergence_delta,
             rep.converged_3dp ? "converged" : "NOT converged",
             rep.gaussian.kl_divergence, dt));
}

void criterion_7_analysis_round_trips() {
  // Fringe-fit Monte Carlo bias at the nominal operating point.
  FringeTruth truth{.visibility = 0.10,
                    .rate0 = 120.0,
                    .dark_rate = 30.0,
                    .period = 133e-9,
                    .drift_rate = 0.0};
  ScanProtocol protocol;
  double sum_v = 0.0;
  const int replicas = 500;
  for (int i = 0; i < replicas; ++i) {
    FringeScanRecord scan = synth_fringe_scan(
        truth, protocol, {62e-3, 15.2e-3, 68e-3}, 170.0 * kc::kDa,
        derive_seed(424242, static_cast<std::uint64_t>(i)));
    FringeFit fit = fit_fringe(scan, truth.period);
    sum_v += fit.amplitude / (fit.offset - truth.dark_rate);
  }
  double bias = sum_v / replicas - truth.visibility;

  TofTrace trace = synth_tof_trace(160.0, 10.0, 2.0, 5e-4, 100.0,
                                   170.0 * kc::kDa, 20000, 240, 20260825);
  VelocityEstimate est = fit_velocity(trace, trace.mass_setting);
  double dv = std::abs(est.v_mean - 160.0) / 160.0;
  double ds = std::abs(est.v_sigma - 10.0) / 10.0;
  bool tof_ok = dv < 0.02 && ds < 0.10 && est.rel_width > 0.05 &&
                est.rel_width < 0.07;
  report(7, "analysis round trips: fringe-fit bias and TOF recovery",
         std::abs(bias) < 0.005 && tof_ok,
         fmt("bias(V) = %+.4f over %d replicas (tol 0.005); v_mean off by "
             "%.2f%% (tol 2%%), v_sigma off by %.1f%% (tol 10%%), dv/v = "
             "%.3f (band [0.05, 0.07])",
             bias, replicas, 100 * dv, 100 * ds, est.rel_width));
}

void criterion_8_ionization_ladder() {
  RunConfig cfg;
  ClusterSpecies sp =
      cfg.species_model().at_mass(cfg.beam().effective_mass_center());
  sp.radius = 4e-9;  // reference sphere radius for the threshold ladder
  double e1 = ionization_threshold(sp, 0) / kc::eV;
  double e2 = ionization_threshold(sp, 1) / kc::eV;
  double e3 = ionization_threshold(sp, 2) / kc::eV;
  bool ok = std::abs(e1 - 2.53) <= 0.03 && std::abs(e2 - 2.88) <= 0.03 &&
            std::abs(e3 - 3.23) <= 0.03;
  report(8, "charged-sphere ionization ladder at R = 4 nm", ok,
         fmt("E = %.3f / %.3f / %.3f eV vs 2.53 / 2.88 / 3.23 (tol 0.03)", e1,
             e2, e3));
}

void criterion_9_determinism() {
  RunConfig cfg;
  InterferometerSetup setup = cfg.setup();
  BeamEnsemble beam = cfg.beam();
  SpeciesModel model = cfg.species_model();
  PredictionResult pred =
      averaged_prediction(setup, model, beam, cfg.contrast, cfg.l_max);
  FringeTruth truth{.visibility = pred.v_quantum_scaled,
                    .rate0 = cfg.rate0,
                    .dark_rate = cfg.dark_rate,
                    .period = setup.period(),
                    .drift_rate = cfg.drift_rate};
  FringeDataset d1 = synth_fringe_dataset(truth, cfg.protocol(),
                                          cfg.grating_power, cfg.mass_center,
                                          cfg.n_scans, cfg.total_points,
                                          cfg.seed);
  FringeDataset d2 = synth_fringe_dataset(truth, cfg.protocol(),
                                          cfg.grating_power, cfg.mass_center,
                                          cfg.n_scans, cfg.total_points,
                                          cfg.seed);
  bool synth_ok = to_json(d1) == to_json(d2);

  bool fits_ok = true;
  for (std::size_t i = 0; i < d1.scans.size(); i += 16) {
    FringeFit f1 = fit_fringe(d1.scans[i], setup.period());
    FringeFit f2 = fit_fringe(d2.scans[i], setup.period());
    fits_ok = fits_ok && f1.visibility == f2.visibility &&
              f1.amplitude == f2.amplitude && f1.phase == f2.phase;
  }

  std::vector<double> v_ideal(d1.scans.size(), pred.v_quantum);
  ClusterSpecies sp = model.at_mass(beam.effective_mass_center());
  MacroReport r1 = macroscopicity(d1.scans, v_ideal, sp, setup, beam.v_mean,
                                  cfg.macro_options());
  MacroReport r2 = macroscopicity(d2.scans, v_ideal, sp, setup, beam.v_mean,
                                  cfg.macro_options());
  bool macro_ok = r1.mu == r2.mu &&
                  (r1.posterior.weights.array() ==
                   r2.posterior.weights.array()).all() &&
                  (r1.log10_tau_m.array() == r2.log10_tau_m.array()).all();
  report(9, "same seed and config reproduce every report exactly",
         synth_ok && fits_ok && macro_ok,
         fmt("datasets identical: %s; fits identical: %s; reports identical: %s",
             synth_ok ? "yes" : "no", fits_ok ? "yes" : "no",
             macro_ok ? "yes" : "no"));
}

}  // namespace

int main() {
  std::printf("acceptance checks (library defaults, seed %llu)\n",
              static_cast<unsigned long long>(RunConfig().seed));
  criterion_1_bessel_oracle();
  criterion_2_classical_limit();
  criterion_3_operating_point();
  criterion_4_transmission();
  criterion_5_reduction_factors();
  criterion_6_macroscopicity_round_trip();
  criterion_7_analysis_round_trips();
  criterion_8_ionization_ladder();
  criterion_9_determinism();
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures;
}
