#include "tltk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"

namespace tltk {

namespace con = constants;

FringeFit fit_fringe(const FringeScanRecord& scan, double period) {
  scan.validate();
  if (!(period > 0.0)) throw ValidationError("fit_fringe: period must be > 0");
  const Eigen::Index n = scan.positions.size();
  if (n < 8) throw ValidationError("fit_fringe: need at least 8 points");
  const double span = scan.positions(n - 1) - scan.positions(0);
  if (span < period)
    throw ValidationError("fit_fringe: positions must span at least one period");
  if (scan.counts.maxCoeff() <= 0)
    throw NumericError("fit_fringe: all-zero counts, degenerate fit");

  const double k = 2.0 * con::pi / period;
  Eigen::MatrixXd xtwx = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd xtwy = Eigen::VectorXd::Zero(3);
  double chi2_base = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = scan.dwell_times(i);
    const double c = static_cast<double>(scan.counts(i));
    const double y = c / t;                     // rate
    const double w = t * t / std::max(c, 1.0);  // 1/Var(rate)
    const Eigen::Vector3d row(1.0, std::cos(k * scan.positions(i)),
                              std::sin(k * scan.positions(i)));
    xtwx += w * row * row.transpose();
    xtwy += w * row * y;
    chi2_base += w * y * y;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
  if (ldlt.info() != Eigen::Success)
    throw NumericError("fit_fringe: singular normal equations");
  const Eigen::Vector3d beta = ldlt.solve(xtwy);
  const Eigen::Matrix3d cov =
      ldlt.solve(Eigen::MatrixXd::Identity(3, 3));

  FringeFit fit;
  fit.offset = beta(0);
  const double a = beta(1), b = beta(2);
  fit.amplitude = std::hypot(a, b);
  fit.phase = std::atan2(-b, a);
  fit.dof = static_cast<int>(n) - 3;
  fit.chi2 = chi2_base - beta.dot(xtwy);
  if (!(fit.offset > 0.0))
    throw NumericError("fit_fringe: non-positive fitted offset");
  double amp = fit.amplitude;
  if (amp > fit.offset) amp = fit.offset;  // clip to the physical range
  fit.visibility = amp / fit.offset;

  // Delta-method 1-sigma on V = sqrt(A^2+B^2)/offset.
  if (fit.amplitude > 0.0) {
    const Eigen::Vector3d grad(-fit.amplitude / (fit.offset * fit.offset),
                               a / (fit.amplitude * fit.offset),
                               b / (fit.amplitude * fit.offset));
    fit.ci_visibility = std::sqrt(
        std::max(0.0, static_cast<double>(grad.transpose() * cov * grad)));
  } else {
    fit.ci_visibility =
        std::sqrt(std::max(0.0, cov(1, 1) + cov(2, 2))) / fit.offset;
  }
  return fit;
}

SmoothedTof denoise_tof(const TofTrace& trace, double min_width_bins) {
  trace.validate();
  const Eigen::Index n = trace.counts.size();
  if (n < 16) throw ValidationError("denoise_tof: need at least 16 bins");
  if (!(min_width_bins > 0.0))
    throw ValidationError("denoise_tof: minimum width must be > 0");

  // 90th-percentile (nearest-rank) target count.
  std::vector<double> sorted(n);
  for (Eigen::Index i = 0; i < n; ++i)
    sorted[i] = static_cast<double>(trace.counts(i));
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<Eigen::Index>(
      std::ceil(0.9 * static_cast<double>(n))) - 1;
  const double c_target = std::max(sorted[std::max<Eigen::Index>(rank, 0)], 1.0);

  SmoothedTof out;
  out.bin_centers.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.bin_centers(i) = 0.5 * (trace.bin_edges(i) + trace.bin_edges(i + 1));
  out.values = Eigen::VectorXd::Zero(n);

  // Reflecting index so constants and totals survive the boundaries.
  auto reflect = [n](Eigen::Index j) {
    while (j < 0 || j >= n) {
      if (j < 0) j = -1 - j;
      if (j >= n) j = 2 * n - 1 - j;
    }
    return j;
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = static_cast<double>(trace.counts(i));
    if (c == 0.0) continue;
    const double w =
        min_width_bins * std::max(1.0, std::sqrt(c_target / std::max(c, 1.0)));
    const auto reach = static_cast<Eigen::Index>(std::ceil(6.0 * w));
    double norm = 0.0;
    for (Eigen::Index o = -reach; o <= reach; ++o)
      norm += std::exp(-0.5 * (o / w) * (o / w));
    for (Eigen::Index o = -reach; o <= reach; ++o)
      out.values(reflect(i + o)) += c * std::exp(-0.5 * (o / w) * (o / w)) / norm;
  }
  return out;
}

namespace {

// Gaussian (x) rectangle model value at time t for params (amp, t0, sigma).
double conv_model(double t, double amp, double t0, double sigma, double chop) {
  const double s = std::max(sigma, 1e-12);
  if (chop <= 1e-12) {
    const double u = (t - t0) / s;
    return amp * std::exp(-0.5 * u * u);
  }
  const double inv = 1.0 / (s * std::sqrt(2.0));
  return amp * 0.5 *
         (std::erf((t - t0) * inv) - std::erf((t - t0 - chop) * inv));
}

}  // namespace

VelocityEstimate fit_velocity(const TofTrace& trace, double mass, int charge,
                              double min_width_bins) {
  if (!(mass > 0.0)) throw ValidationError("fit_velocity: mass must be > 0");
  if (charge < 0) throw ValidationError("fit_velocity: charge must be >= 0");
  const SmoothedTof sm = denoise_tof(trace, min_width_bins);
  const Eigen::Index n = sm.values.size();
  const double total = sm.values.sum();
  if (!(total > 0.0)) throw NumericError("fit_velocity: empty trace");

  const double chop = trace.chopper_open;
  // Moment-based starting point.
  const Eigen::ArrayXd t = sm.bin_centers.array();
  const Eigen::ArrayXd y = sm.values.array();
  const double mean_t = (y * t).sum() / total;
  const double var_t = (y * (t - mean_t).square()).sum() / total;
  const double bin_w = sm.bin_centers(1) - sm.bin_centers(0);
  Eigen::Vector3d theta;  // amp, t0, sigma
  theta(2) = std::sqrt(std::max(var_t - chop * chop / 12.0, 0.01 * bin_w * bin_w));
  theta(1) = mean_t - 0.5 * chop;
  theta(0) = y.maxCoeff();

  auto residuals = [&](const Eigen::Vector3d& p, Eigen::VectorXd& r) {
    r.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      r(i) = conv_model(sm.bin_centers(i), p(0), p(1), p(2), chop) - y(i);
  };

  // Levenberg-Marquardt with central-difference Jacobian.
  Eigen::VectorXd r;
  residuals(theta, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  for (; iter < 200; ++iter) {
    Eigen::MatrixXd jac(n, 3);
    for (int j = 0; j < 3; ++j) {
      const double h = std::max(1e-8 * std::abs(theta(j)), 1e-14);
      Eigen::Vector3d tp = theta, tm = theta;
      tp(j) += h;
      tm(j) -= h;
      Eigen::VectorXd rp, rm;
      residuals(tp, rp);
      residuals(tm, rm);
      jac.col(j) = (rp - rm) / (2.0 * h);
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * r;
    bool stepped = false;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal();
      const Eigen::Vector3d step = damped.ldlt().solve(-jtr);
      Eigen::Vector3d cand = theta + step;
      cand(2) = std::max(cand(2), 1e-2 * bin_w);
      Eigen::VectorXd rc;
      residuals(cand, rc);
      const double cc = rc.squaredNorm();
      if (cc < cost) {
        const double rel = step.norm() / (theta.norm() + 1e-300);
        theta = cand;
        r = rc;
        cost = cc;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel < 1e-10) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (converged || !stepped) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericError("fit_velocity: no convergence after 200 iterations");

  const double t0 = theta(1), sigma_t = theta(2);
  if (!(t0 > 0.0))
    throw NumericError("fit_velocity: non-physical drift time");
  const double boost =
      std::sqrt(2.0 * charge * con::e_charge * trace.entrance_voltage / mass);
  const double vp = trace.flight_path / t0;
  VelocityEstimate est;
  est.v_mean = vp - boost;
  est.v_sigma = sigma_t * vp * vp / trace.flight_path;
  est.rel_width = est.v_sigma / est.v_mean;
  est.iterations = iter;
  est.rms_residual = std::sqrt(cost / static_cast<double>(n));
  return est;
}

}  // namespace tltk
