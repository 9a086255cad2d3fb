#include "tltk/species.hpp"

#include <cmath>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"

namespace tltk {

namespace con = constants;

double ClusterSpecies::sigma_ion() const {
  const double s = sigma_ion_slope * (mass / con::kDa) + sigma_ion_intercept;
  if (!(s > 0.0))
    throw ValidationError("sigma_ion: affine model non-positive at mass " +
                          std::to_string(mass / con::kDa) + " kDa");
  return s;
}

ClusterSpecies SpeciesModel::at_mass(double mass) const {
  if (!(mass > 0.0)) throw ValidationError("species mass must be positive");
  ClusterSpecies sp;
  sp.name = name;
  sp.mass = mass;
  sp.n_atoms = std::round(mass / atomic_mass);
  sp.radius = std::cbrt(3.0 * mass / (4.0 * con::pi * density));
  sp.alpha_per_atom = alpha_per_atom;
  sp.sigma_ion_slope = sigma_ion_slope;
  sp.sigma_ion_intercept = sigma_ion_intercept;
  sp.work_function = work_function;
  return sp;
}

SpeciesModel sodium_model() {
  SpeciesModel m;
  m.name = "sodium";
  m.atomic_mass = con::sodium_atom_mass;
  m.density = con::sodium_density;
  m.alpha_per_atom = -4.0 * con::pi * con::eps0 * 4.5 * con::angstrom3;
  m.sigma_ion_slope = 0.537e-20;
  m.sigma_ion_intercept = -1.5e-20;
  m.work_function = 2.4 * con::eV;
  return m;
}

ClusterSpecies sodium_cluster(double mass) { return sodium_model().at_mass(mass); }

}  // namespace tltk
