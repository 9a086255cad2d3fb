#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "tltk/physics.hpp"
#include "tltk/records.hpp"
#include "tltk/special.hpp"

// Macrorealism exclusion: reduction factors R_l for a minimal macrorealistic
// modification (MMM), Poisson scan likelihoods with profiled nuisance
// parameters, Bayesian updating over the classicalization time tau_e, and the
// macroscopicity mu extracted from posterior quantiles.

namespace tltk {

struct MmmParams {
  double tau_e = 0.0;   // classicalization time, s
  double sigma_q = 0.0; // momentum spread, kg m/s
  double sigma_s = 0.0; // spatial spread, m (carried, not used)
};

// tau-independent decay constant K_l (seconds): R_l = exp(-K_l / tau_e).
// K_0 = 0 exactly. Quadrature relative tolerance ~1e-8.
double mmm_decay_constant(int ell, double sigma_q, const ClusterSpecies& species,
                          const InterferometerSetup& setup, double v);

double mmm_reduction_factor(int ell, const MmmParams& params,
                            const ClusterSpecies& species,
                            const InterferometerSetup& setup, double v);

// Applies R_l to a coefficient list S_l, l = -l_max..l_max (S_0 unchanged).
std::vector<std::complex<double>> modified_signal(
    const std::vector<std::complex<double>>& s, const MmmParams& params,
    const ClusterSpecies& species, const InterferometerSetup& setup, double v);

struct LikelihoodOptions {
  int v_grid_points = 281;   // nodes of the per-scan profiled-likelihood curve
  int xbar_offsets = 64;     // fringe-phase profiling grid per period
  double dark_rate = 30.0;   // calibrated dark rate, counts/s (fixed by default)
  bool profile_dark = false; // profile r_dark instead of fixing it
  bool marginalize = false;  // marginalize nuisances instead of profiling
};

// Poisson log-likelihood of one scan at model visibility v_model, with the
// count-rate offset r0 and fringe phase profiled out (r_dark fixed unless
// opts.profile_dark). Includes the -log(c_i!) terms.
double scan_log_likelihood(const FringeScanRecord& scan, double v_model,
                           double period, const LikelihoodOptions& opts);

// Per-scan profiled log-likelihood sampled on a visibility grid
// [0, v_ideal], interpolated monotone-cubically when composed with
// V(tau) = R_1(tau) v_ideal.
struct ScanLikelihoodCurve {
  Eigen::VectorXd v_grid;
  Eigen::VectorXd log_like;
  special::PchipInterpolant interp;
  std::int64_t n_points = 0;
};

ScanLikelihoodCurve profile_scan_likelihood(const FringeScanRecord& scan,
                                            double v_ideal, double period,
                                            const LikelihoodOptions& opts);

struct TauGridSpec {
  double log10_min = 0.0;
  double log10_max = 25.0;
  int points = 2001;

  Eigen::VectorXd log10_grid() const;
};

struct MacroPosterior {
  Eigen::VectorXd log10_tau;  // grid, strictly increasing
  Eigen::VectorXd weights;    // normalized, nonnegative
  double sigma_q = 0.0;       // kg m/s
  std::int64_t n_data_used = 0;
  bool boundary_warning = false;
};

// Posterior over tau_e at fixed sigma_q from profiled scan curves, starting
// from a prior uniform in log10 tau. Curves enter through V(tau) = R_1(tau,
// sigma_q) * v_ideal per scan; k1 is the decay constant at this sigma_q.
MacroPosterior bayesian_update(const std::vector<ScanLikelihoodCurve>& curves,
                               const std::vector<double>& v_ideal, double k1,
                               double sigma_q, const TauGridSpec& grid);

// Lower quantile of the posterior in log10 tau via linear interpolation on
// the discrete CDF.
double posterior_quantile_log10(const MacroPosterior& posterior, double level);

struct GaussianCheck {
  double kl_divergence = 0.0;
  double mean_log10_tau = 0.0;
  double sigma_log10_tau = 0.0;
};

// KL(posterior || moment-matched Gaussian) over the grid.
GaussianCheck gaussian_posterior_check(const MacroPosterior& posterior);

struct MacroOptions {
  TauGridSpec tau_grid;
  double hbar_over_sigma_q_min = 0.1e-9;  // m
  double hbar_over_sigma_q_max = 10e-6;   // m
  int sigma_q_points = 41;
  double quantile_level = 0.05;
  double convergence_tail_fraction = 0.15;
  LikelihoodOptions likelihood;
};

struct MacroReport {
  double mu = 0.0;
  double argmax_hbar_over_sigma_q = 0.0;      // m
  Eigen::VectorXd hbar_over_sigma_q;          // grid, m
  Eigen::VectorXd log10_tau_m;                // 5% quantile per sigma_q
  MacroPosterior posterior;                   // at the argmax sigma_q
  GaussianCheck gaussian;
  std::vector<std::int64_t> checkpoint_points;  // cumulative counts per scan
  Eigen::VectorXd mu_trace;  // max_sigma_q quantile after each scan prefix
  bool converged_3dp = false;  // quantile at the 85% mark equals final to 3 dp
  double convergence_delta = 0.0;
  bool boundary_warning = false;
  std::int64_t n_points = 0;
  int n_scans = 0;
};

// Full pipeline: profiled curves -> posteriors over the sigma_q grid ->
// quantiles, mu, Gaussianity check, and the quantile-convergence trace.
// v_ideal holds the unscaled ideal-quantum visibility per scan.
MacroReport macroscopicity(const std::vector<FringeScanRecord>& scans,
                           const std::vector<double>& v_ideal,
                           const ClusterSpecies& species,
                           const InterferometerSetup& setup, double v_mean,
                           const MacroOptions& opts);

}  // namespace tltk
