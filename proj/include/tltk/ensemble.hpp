#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tltk/physics.hpp"

// Beam-ensemble averaging: Gaussian velocity spread (Gauss-Hermite quadrature)
// and a rectangular mass-filter window weighted by the source mass
// distribution (log-normal), with the species' polarizability and ionization
// cross section re-evaluated at every mass node.

namespace tltk {

struct BeamEnsemble {
  double v_mean = 160.0;        // m/s
  double v_sigma = 10.0;        // m/s (Gaussian; 0 = monochromatic)
  double mass_center = 0.0;     // kg (mass-filter setting)
  double mass_rel_width = 0.32; // full relative width of the filter window
  double source_median = 0.0;   // kg (log-normal source weight median)
  double source_sigma_log = 0.5;  // log-normal shape parameter
  int v_nodes = 32;
  int mass_nodes = 64;

  void validate() const;

  // Source weight density at mass m (unnormalized).
  double source_weight(double m) const;

  // Weighted centroid of the mass window under the source weight.
  double effective_mass_center() const;
};

// Averaged Fourier coefficients <S_l>, l = 0..l_max (real; <S_-l> = <S_l>).
Eigen::VectorXd averaged_signal(const InterferometerSetup& setup,
                                const SpeciesModel& species_model,
                                const BeamEnsemble& ensemble, Model model,
                                int l_max = 5);

struct PredictionResult {
  double s0_mean = 0.0;        // averaged transmission <S_0>
  double v_quantum = 0.0;      // 2|<S_1>|/<S_0>, unscaled
  double v_classical = 0.0;    // same for the classical model
  double contrast_scale = 1.0; // empirical factor applied below
  double v_quantum_scaled = 0.0;
  double v_classical_scaled = 0.0;
};

PredictionResult averaged_prediction(const InterferometerSetup& setup,
                                     const SpeciesModel& species_model,
                                     const BeamEnsemble& ensemble,
                                     double contrast_scale, int l_max = 5);

struct PowerScanPoint {
  double p2 = 0.0;           // W
  double v_quantum = 0.0;    // scaled
  double v_classical = 0.0;  // scaled
  double transmission = 0.0; // <S_0>(P2)/<S_0>(0)
};

std::vector<PowerScanPoint> visibility_vs_power(
    const InterferometerSetup& setup_template,
    const SpeciesModel& species_model, const BeamEnsemble& ensemble,
    const Eigen::VectorXd& p2_grid, double contrast_scale);

// <S_0>(P2) normalized to its P2 = 0 value; identical for both models.
Eigen::VectorXd transmission_vs_power(const InterferometerSetup& setup_template,
                                      const SpeciesModel& species_model,
                                      const BeamEnsemble& ensemble,
                                      const Eigen::VectorXd& p2_grid,
                                      Model model = Model::quantum);

struct VisibilityMap {
  Eigen::VectorXd masses;        // kg (rows)
  Eigen::VectorXd powers;        // W, G2 power (columns)
  Eigen::MatrixXd visibility;    // unscaled V per (mass, power) cell
  Eigen::MatrixXi flagged;       // 1 where the species model is invalid
  double mass_talbot_eq_l = 0.0;   // mass with L_T = L at v_mean, kg
  double mass_talbot_eq_2l = 0.0;  // mass with L_T = 2L at v_mean, kg
};

// Visibility over a mass x G2-power grid. Each cell uses the ensemble
// template re-centered at the cell mass (same window, weights, velocity
// distribution). Values are unscaled model visibilities.
VisibilityMap visibility_map(const Eigen::VectorXd& mass_grid,
                             const Eigen::VectorXd& p2_grid,
                             const InterferometerSetup& setup_template,
                             const SpeciesModel& species_model,
                             const BeamEnsemble& ensemble_template, Model model);

}  // namespace tltk
