#pragma once

#include <complex>
#include <vector>

#include "tltk/setup.hpp"
#include "tltk/species.hpp"

// Single-particle Talbot-Lau signal model: grating interaction strengths,
// Talbot-Lau coefficients B_n in quantum and classical form, the Fourier
// coefficients S_l of the detected fringe signal, and the charged-sphere
// ionization threshold ladder.

namespace tltk {

enum class Model { quantum, classical };

// Interaction of one particle with one grating: mean absorbed photon number
// n0 at an antinode and peak dipole phase phi0 (signed; negative when the
// polarizability is negative).
struct GratingInteraction {
  double n0 = 0.0;    // dimensionless, >= 0
  double phi0 = 0.0;  // rad
};

double de_broglie_wavelength(double mass, double v);
double talbot_length(double mass, double v, double period);

GratingInteraction grating_interaction(const ClusterSpecies& species,
                                       const GratingSettings& grating, double v);

// Talbot-Lau coefficient B_n(xi). The quantum form uses
// zeta_coh = phi0 sin(pi xi), zeta_ion = (n0/2) cos(pi xi); the classical
// form uses zeta_coh = phi0 pi xi, zeta_ion = n0/2. Values are real for the
// photodepletion grating; returned as complex to match the signal algebra.
std::complex<double> talbot_lau_coefficient(const GratingInteraction& inter,
                                            int n, double xi);
std::complex<double> talbot_lau_coefficient_classical(
    const GratingInteraction& inter, int n, double xi);

// Real-valued core used by both public coefficient functions and by the
// ensemble averaging loops (avoids complex overhead in hot paths).
double tl_coefficient(const GratingInteraction& inter, int n, double xi,
                      Model model);

// Fourier coefficients S_l of the fringe signal, l = -l_max..l_max
// (index i corresponds to l = i - l_max). S_0 is the total transmission.
std::vector<std::complex<double>> fourier_signal(const InterferometerSetup& setup,
                                                 const ClusterSpecies& species,
                                                 double v, Model model,
                                                 int l_max = 5);

// Fringe visibility 2|S_1|/S_0 from a coefficient list as returned by
// fourier_signal. Throws NumericError when S_0 <= 0.
double visibility_from_coefficients(
    const std::vector<std::complex<double>>& s);

// Ionization threshold of a metallic sphere carrying charge q:
// E(q) = W + (q + 3/8) e^2 / (4 pi eps0 R_cl). Joules.
double ionization_threshold(const ClusterSpecies& species, int charge_state);

}  // namespace tltk
