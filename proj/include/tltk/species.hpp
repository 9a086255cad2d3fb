#pragma once

#include <string>

// Cluster species model: a spherical metal cluster characterized by its mass,
// UV polarizability (per atom, signed) and an affine ionization cross-section
// model valid over the source's mass range.

namespace tltk {

struct ClusterSpecies {
  std::string name = "sodium";
  double mass = 0.0;            // kg
  double n_atoms = 0.0;         // atom count (rounded to nearest integer)
  double radius = 0.0;          // geometric radius R_cl, m
  double alpha_per_atom = 0.0;  // optical polarizability per atom, C m^2/V (signed)
  double sigma_ion_slope = 0.0;      // m^2 per kDa of mass
  double sigma_ion_intercept = 0.0;  // m^2
  double work_function = 0.0;   // J

  // Total cluster polarizability, C m^2/V.
  double alpha_total() const { return n_atoms * alpha_per_atom; }

  // Ionization cross section at this species' mass, m^2. Throws
  // ValidationError if the affine model gives a non-positive value.
  double sigma_ion() const;
};

// Parameters of the affine cross-section model and bulk matter constants for
// building species at arbitrary mass (used by mass-window averaging).
struct SpeciesModel {
  std::string name = "sodium";
  double atomic_mass;           // kg
  double density;               // kg/m^3
  double alpha_per_atom;        // C m^2/V
  double sigma_ion_slope;       // m^2 per kDa
  double sigma_ion_intercept;   // m^2
  double work_function;         // J

  ClusterSpecies at_mass(double mass) const;
};

// Sodium defaults: polarizability volume -4.5 A^3 per atom at the grating
// wavelength, sigma_ion = (0.537 m/kDa - 1.5) x 10^-20 m^2, W = 2.4 eV.
SpeciesModel sodium_model();

// Convenience: sodium cluster of the given mass.
ClusterSpecies sodium_cluster(double mass);

}  // namespace tltk
