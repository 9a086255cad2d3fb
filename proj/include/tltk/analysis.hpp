#pragma once

#include <Eigen/Dense>

#include "tltk/records.hpp"

// Parameter recovery from raw records: closed-form weighted sinusoid fits
// with confidence intervals, adaptive Gaussian smoothing of TOF traces, and
// the Gaussian (x) rectangle convolution fit for the velocity distribution.

namespace tltk {

struct FringeFit {
  double amplitude = 0.0;   // counts/s
  double offset = 0.0;      // counts/s
  double phase = 0.0;       // rad, model offset + amplitude cos(2 pi x/d + phase)
  double visibility = 0.0;  // amplitude/offset, clipped to [0, 1]
  double ci_visibility = 0.0;  // 1-sigma half-width
  double chi2 = 0.0;
  int dof = 0;
};

// Weighted least squares of offset + A cos(2 pi x/d) + B sin(2 pi x/d) with
// inverse-variance Poisson weights; fully linear, solved by normal equations.
FringeFit fit_fringe(const FringeScanRecord& scan, double period);

struct SmoothedTof {
  Eigen::VectorXd bin_centers;  // s
  Eigen::VectorXd values;       // smoothed counts per bin
};

// Adaptive Gaussian low-pass: kernel width (in bins) grows where local counts
// are low, w(i) = w_min max(1, sqrt(c_target/c_i)) with c_target the 90th
// percentile bin count. Reflecting boundaries; totals preserved.
SmoothedTof denoise_tof(const TofTrace& trace, double min_width_bins = 1.5);

struct VelocityEstimate {
  double v_mean = 0.0;     // m/s (chopper-to-detector, drift-corrected)
  double v_sigma = 0.0;    // m/s
  double rel_width = 0.0;  // v_sigma/v_mean
  int iterations = 0;
  double rms_residual = 0.0;
};

// Nonlinear least squares (Levenberg-Marquardt, finite-difference Jacobian)
// of the Gaussian-drift (x) rectangular-chopper convolution in the time
// domain, then conversion to velocity with the entrance-voltage correction
// v' = v + sqrt(2 q e U / m).
VelocityEstimate fit_velocity(const TofTrace& trace, double mass,
                              int charge = 1, double min_width_bins = 1.5);

}  // namespace tltk
