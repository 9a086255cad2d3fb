#include "tltk/mmm.hpp"

#include <algorithm>
#include <cmath>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"

namespace tltk {

namespace con = constants;

double mmm_decay_constant(int ell, double sigma_q, const ClusterSpecies& species,
                          const InterferometerSetup& setup, double v) {
  if (!(sigma_q > 0.0))
    throw ValidationError("mmm_decay_constant: sigma_q must be > 0");
  if (!(v > 0.0)) throw ValidationError("mmm_decay_constant: v must be > 0");
  if (ell == 0) return 0.0;
  const double m = species.mass;
  const double r_cl = species.radius;
  const double d = setup.period();
  const double lt = talbot_length(m, v, d);
  const double a = r_cl * sigma_q / con::hbar;
  const double b =
      std::abs(ell) * d * sigma_q * setup.separation / (con::hbar * lt);
  const double amp = 3.0 * con::hbar * m / (r_cl * sigma_q * con::m_electron);
  const double pref = 2.0 * std::sqrt(2.0 / con::pi) * amp * amp *
                      (setup.separation / v);
  auto integrand = [a, b](double z) {
    const double j = special::spherical_j1(a * z);
    return std::exp(-0.5 * z * z) * j * j * special::one_minus_si_over_x(b * z);
  };
  // Gaussian weight < 1.3e-14 beyond z = 8. Fixed-grid probe sets the scale,
  // then the adaptive pass refines to ~1e-8 relative.
  const int probe_panels = 256;
  const double h = 8.0 / probe_panels;
  double probe = integrand(0.0) + integrand(8.0);
  for (int i = 1; i < probe_panels; ++i)
    probe += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  probe *= h / 3.0;
  const double tol = std::max(1e-8 * std::abs(probe), 1e-300);
  const double integral = special::adaptive_simpson(integrand, 0.0, 8.0, tol);
  return pref * integral;
}

double mmm_reduction_factor(int ell, const MmmParams& params,
                            const ClusterSpecies& species,
                            const InterferometerSetup& setup, double v) {
  if (!(params.tau_e > 0.0))
    throw ValidationError("mmm_reduction_factor: tau_e must be > 0");
  const double k = mmm_decay_constant(ell, params.sigma_q, species, setup, v);
  return std::exp(-k / params.tau_e);
}

std::vector<std::complex<double>> modified_signal(
    const std::vector<std::complex<double>>& s, const MmmParams& params,
    const ClusterSpecies& species, const InterferometerSetup& setup, double v) {
  if (s.empty() || s.size() % 2 == 0)
    throw ValidationError("modified_signal: need coefficients for l = -l_max..l_max");
  const int l_max = static_cast<int>(s.size() / 2);
  std::vector<std::complex<double>> out(s.size());
  out[l_max] = s[l_max];  // R_0 = 1 exactly
  for (int l = 1; l <= l_max; ++l) {
    const double r = mmm_reduction_factor(l, params, species, setup, v);
    out[l_max + l] = r * s[l_max + l];
    out[l_max - l] = r * s[l_max - l];
  }
  return out;
}

namespace {

struct ScanArrays {
  Eigen::ArrayXd x;      // positions
  Eigen::ArrayXd t;      // dwell times
  Eigen::ArrayXd cnt;    // counts as double
  double total_counts = 0.0;
  double total_dwell = 0.0;
  double log_fact = 0.0;  // sum log(c_i!)
};

ScanArrays prepare(const FringeScanRecord& scan) {
  scan.validate();
  ScanArrays a;
  const Eigen::Index n = scan.positions.size();
  a.x = scan.positions.array();
  a.t = scan.dwell_times.array();
  a.cnt.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.cnt(i) = static_cast<double>(scan.counts(i));
    a.log_fact += std::lgamma(static_cast<double>(scan.counts(i)) + 1.0);
  }
  a.total_counts = a.cnt.sum();
  a.total_dwell = a.t.sum();
  if (a.total_counts <= 0.0)
    throw NumericError("scan likelihood: all-zero counts, degenerate fit");
  return a;
}

// Profiles r0 (and optionally r_dark) by Newton ascent of the concave
// Poisson log-likelihood at fixed fringe shape g_i = 1 + V cos(...).
// Returns the profiled log-likelihood without the -sum log(c_i!) constant;
// optionally exports the curvature d2LL/dr0^2 at the optimum.
double profile_rates(const ScanArrays& a, const Eigen::ArrayXd& g,
                     double dark, bool profile_dark, double* curvature) {
  const Eigen::ArrayXd tg = a.t * g;
  double r0 = std::max(a.total_counts / a.total_dwell - dark, 1.0);
  double dk = dark;
  const int rounds = profile_dark ? 10 : 1;
  double f2 = -1.0;
  for (int round = 0; round < rounds; ++round) {
    for (int it = 0; it < 12; ++it) {
      const Eigen::ArrayXd lam = r0 * tg + dk * a.t;
      const Eigen::ArrayXd w = tg / lam;
      const double f1 = (a.cnt * w).sum() - tg.sum();
      f2 = -(a.cnt * w * w).sum();
      const double step = f1 / f2;
      r0 = std::max(r0 - step, 1e-6);
      if (std::abs(step) < 1e-10) break;
    }
    if (profile_dark) {
      for (int it = 0; it < 12; ++it) {
        const Eigen::ArrayXd lam = r0 * tg + dk * a.t;
        const Eigen::ArrayXd w = a.t / lam;
        const double f1 = (a.cnt * w).sum() - a.total_dwell;
        const double f2d = -(a.cnt * w * w).sum();
        const double step = f1 / f2d;
        dk = std::max(dk - step, 0.0);
        if (std::abs(step) < 1e-10) break;
      }
    }
  }
  const Eigen::ArrayXd lam = r0 * tg + dk * a.t;
  if (curvature) *curvature = f2;
  return (a.cnt * lam.log() - lam).sum();
}

// Profiled (or marginalized) log-likelihood at one model visibility,
// maximizing over the fringe-phase grid. Includes the -log c_i! constant.
double likelihood_at_v(const ScanArrays& a, double v_model, double period,
                       const LikelihoodOptions& opts) {
  const int nb = opts.xbar_offsets;
  Eigen::ArrayXd values(nb);
  Eigen::ArrayXd curvatures(nb);
  for (int k = 0; k < nb; ++k) {
    const double xbar = k * period / nb;
    const Eigen::ArrayXd g =
        1.0 + v_model * (2.0 * con::pi * (a.x - xbar) / period).cos();
    double curv = -1.0;
    values(k) = profile_rates(a, g, opts.dark_rate, opts.profile_dark, &curv);
    curvatures(k) = curv;
  }
  if (opts.marginalize) {
    // Uniform phase prior averaged on the grid; Laplace integral over r0.
    Eigen::ArrayXd lg =
        values + 0.5 * (2.0 * con::pi / (-curvatures)).log();
    const double m = lg.maxCoeff();
    return m + std::log((lg - m).exp().sum() / nb) - a.log_fact;
  }
  return values.maxCoeff() - a.log_fact;
}

}  // namespace

double scan_log_likelihood(const FringeScanRecord& scan, double v_model,
                           double period, const LikelihoodOptions& opts) {
  if (v_model < 0.0 || v_model >= 1.0)
    throw ValidationError("scan_log_likelihood: visibility must lie in [0, 1)");
  const ScanArrays a = prepare(scan);
  return likelihood_at_v(a, v_model, period, opts);
}

ScanLikelihoodCurve profile_scan_likelihood(const FringeScanRecord& scan,
                                            double v_ideal, double period,
                                            const LikelihoodOptions& opts) {
  if (!(v_ideal > 0.0) || v_ideal >= 1.0)
    throw ValidationError("profile_scan_likelihood: v_ideal must lie in (0, 1)");
  if (opts.v_grid_points < 8)
    throw ValidationError("profile_scan_likelihood: need >= 8 V-grid points");
  const ScanArrays a = prepare(scan);
  ScanLikelihoodCurve curve;
  curve.n_points = scan.positions.size();
  curve.v_grid = Eigen::VectorXd::LinSpaced(opts.v_grid_points, 0.0, v_ideal);
  curve.log_like.resize(opts.v_grid_points);
  for (int i = 0; i < opts.v_grid_points; ++i)
    curve.log_like(i) = likelihood_at_v(a, curve.v_grid(i), period, opts);
  curve.interp = special::PchipInterpolant(curve.v_grid, curve.log_like);
  return curve;
}

Eigen::VectorXd TauGridSpec::log10_grid() const {
  if (points < 2 || !(log10_max > log10_min))
    throw ValidationError("tau grid: need increasing bounds and >= 2 points");
  if (log10_max - log10_min < 20.0)
    throw ValidationError("tau grid: must cover at least 20 decades");
  return Eigen::VectorXd::LinSpaced(points, log10_min, log10_max);
}

namespace {

MacroPosterior posterior_from_loglike(const Eigen::VectorXd& lt,
                                      const Eigen::VectorXd& ll, double sigma_q,
                                      std::int64_t n_data) {
  MacroPosterior post;
  post.log10_tau = lt;
  post.sigma_q = sigma_q;
  post.n_data_used = n_data;
  const double m = ll.maxCoeff();
  Eigen::ArrayXd w = (ll.array() - m).exp();
  w /= w.sum();
  post.weights = w.matrix();
  const Eigen::Index n = w.size();
  post.boundary_warning = w(0) > 1e-8 || w(n - 1) > 1e-8;
  return post;
}

}  // namespace

MacroPosterior bayesian_update(const std::vector<ScanLikelihoodCurve>& curves,
                               const std::vector<double>& v_ideal, double k1,
                               double sigma_q, const TauGridSpec& grid) {
  if (curves.size() != v_ideal.size())
    throw ValidationError("bayesian_update: one v_ideal per scan required");
  const Eigen::VectorXd lt = grid.log10_grid();
  Eigen::VectorXd ll = Eigen::VectorXd::Zero(lt.size());
  std::int64_t n_data = 0;
  for (std::size_t s = 0; s < curves.size(); ++s) {
    n_data += curves[s].n_points;
    for (Eigen::Index i = 0; i < lt.size(); ++i) {
      const double tau = std::pow(10.0, lt(i));
      const double v = v_ideal[s] * std::exp(-k1 / tau);
      ll(i) += curves[s].interp(v);
    }
  }
  return posterior_from_loglike(lt, ll, sigma_q, n_data);
}

double posterior_quantile_log10(const MacroPosterior& posterior, double level) {
  if (!(level > 0.0) || !(level < 1.0))
    throw ValidationError("posterior quantile: level must lie in (0, 1)");
  const Eigen::VectorXd& w = posterior.weights;
  const Eigen::VectorXd& lt = posterior.log10_tau;
  double cdf = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double next = cdf + w(j);
    if (next >= level) {
      if (j == 0) return lt(0);
      const double frac = (level - cdf) / w(j);
      return lt(j - 1) + frac * (lt(j) - lt(j - 1));
    }
    cdf = next;
  }
  return lt(lt.size() - 1);
}

GaussianCheck gaussian_posterior_check(const MacroPosterior& posterior) {
  const Eigen::ArrayXd w = posterior.weights.array();
  const Eigen::ArrayXd x = posterior.log10_tau.array();
  GaussianCheck g;
  g.mean_log10_tau = (w * x).sum();
  const double var = (w * (x - g.mean_log10_tau).square()).sum();
  if (!(var > 0.0))
    throw NumericError("gaussian check: zero-variance posterior");
  g.sigma_log10_tau = std::sqrt(var);
  // Log of the grid-normalized Gaussian, computed analytically so that
  // far-tail cells do not underflow to -inf prematurely.
  Eigen::ArrayXd lnq = -(x - g.mean_log10_tau).square() / (2.0 * var);
  const double m = lnq.maxCoeff();
  lnq -= m + std::log((lnq - m).exp().sum());
  double kl = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) > 0.0) kl += w(i) * (std::log(w(i)) - lnq(i));
  g.kl_divergence = kl;
  return g;
}

MacroReport macroscopicity(const std::vector<FringeScanRecord>& scans,
                           const std::vector<double>& v_ideal,
                           const ClusterSpecies& species,
                           const InterferometerSetup& setup, double v_mean,
                           const MacroOptions& opts) {
  if (scans.empty()) throw ValidationError("macroscopicity: no scans given");
  if (scans.size() != v_ideal.size())
    throw ValidationError("macroscopicity: one v_ideal per scan required");
  if (opts.sigma_q_points < 2)
    throw ValidationError("macroscopicity: need >= 2 sigma_q grid points");

  const double period = setup.period();
  const int n_scans = static_cast<int>(scans.size());

  std::vector<ScanLikelihoodCurve> curves;
  curves.reserve(scans.size());
  for (std::size_t s = 0; s < scans.size(); ++s)
    curves.push_back(profile_scan_likelihood(scans[s], v_ideal[s], period,
                                             opts.likelihood));

  MacroReport rep;
  rep.n_scans = n_scans;
  rep.checkpoint_points.resize(n_scans);
  std::int64_t cum = 0;
  for (int s = 0; s < n_scans; ++s) {
    cum += curves[s].n_points;
    rep.checkpoint_points[s] = cum;
  }
  rep.n_points = cum;

  // sigma_q grid, log-spaced in hbar/sigma_q.
  const int nq = opts.sigma_q_points;
  rep.hbar_over_sigma_q.resize(nq);
  const double la = std::log10(opts.hbar_over_sigma_q_min);
  const double lb = std::log10(opts.hbar_over_sigma_q_max);
  for (int i = 0; i < nq; ++i)
    rep.hbar_over_sigma_q(i) = std::pow(10.0, la + (lb - la) * i / (nq - 1));

  const Eigen::VectorXd lt = opts.tau_grid.log10_grid();
  const Eigen::Index nt = lt.size();
  Eigen::VectorXd tau(nt);
  for (Eigen::Index i = 0; i < nt; ++i) tau(i) = std::pow(10.0, lt(i));

  // Quantile trace after each scan prefix, per sigma_q.
  Eigen::MatrixXd trace(n_scans, nq);
  rep.log10_tau_m.resize(nq);
  for (int iq = 0; iq < nq; ++iq) {
    const double sigma_q = con::hbar / rep.hbar_over_sigma_q(iq);
    const double k1 = mmm_decay_constant(1, sigma_q, species, setup, v_mean);
    Eigen::VectorXd r1(nt);
    for (Eigen::Index i = 0; i < nt; ++i) r1(i) = std::exp(-k1 / tau(i));
    Eigen::VectorXd running = Eigen::VectorXd::Zero(nt);
    MacroPosterior post;
    for (int s = 0; s < n_scans; ++s) {
      for (Eigen::Index i = 0; i < nt; ++i)
        running(i) += curves[s].interp(v_ideal[s] * r1(i));
      post = posterior_from_loglike(lt, running, sigma_q,
                                    rep.checkpoint_points[s]);
      trace(s, iq) = posterior_quantile_log10(post, opts.quantile_level);
    }
    rep.log10_tau_m(iq) = trace(n_scans - 1, iq);
    if (post.boundary_warning) rep.boundary_warning = true;
  }

  // mu and argmax; posterior recomputed at the argmax sigma_q.
  Eigen::Index imax = 0;
  rep.mu = rep.log10_tau_m.maxCoeff(&imax);
  rep.argmax_hbar_over_sigma_q = rep.hbar_over_sigma_q(imax);
  {
    const double sigma_q = con::hbar / rep.hbar_over_sigma_q(imax);
    const double k1 = mmm_decay_constant(1, sigma_q, species, setup, v_mean);
    rep.posterior = bayesian_update(curves, v_ideal, k1, sigma_q, opts.tau_grid);
    rep.gaussian = gaussian_posterior_check(rep.posterior);
  }

  rep.mu_trace = trace.rowwise().maxCoeff();

  // Stabilization check: the maximized quantile at the last checkpoint at or
  // before the (1 - tail_fraction) data mark must equal the final value to
  // three decimal places.
  const double thresh = (1.0 - opts.convergence_tail_fraction) * rep.n_points;
  int k85 = 0;
  for (int s = 0; s < n_scans; ++s)
    if (rep.checkpoint_points[s] <= thresh) k85 = s;
  rep.convergence_delta =
      std::abs(rep.mu_trace(k85) - rep.mu_trace(n_scans - 1));
  rep.converged_3dp = rep.convergence_delta < 5e-4;
  return rep;
}

}  // namespace tltk
