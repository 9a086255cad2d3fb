#include "tltk/ensemble.hpp"

#include <cmath>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"
#include "tltk/special.hpp"

namespace tltk {

namespace con = constants;

void BeamEnsemble::validate() const {
  if (!(v_mean > 0.0)) throw ValidationError("ensemble: v_mean must be > 0");
  if (v_sigma < 0.0) throw ValidationError("ensemble: v_sigma must be >= 0");
  if (v_sigma / v_mean > 0.2)
    throw ValidationError("ensemble: v_sigma/v_mean must not exceed 0.2");
  if (!(mass_center > 0.0))
    throw ValidationError("ensemble: mass_center must be > 0");
  if (mass_rel_width < 0.0 || mass_rel_width >= 1.0)
    throw ValidationError("ensemble: mass_rel_width must lie in [0, 1)");
  if (!(source_median > 0.0))
    throw ValidationError("ensemble: source_median must be > 0");
  if (!(source_sigma_log > 0.0))
    throw ValidationError("ensemble: source_sigma_log must be > 0");
  if (v_nodes < 8 || mass_nodes < 8)
    throw ValidationError("ensemble: need at least 8 quadrature nodes per axis");
}

double BeamEnsemble::source_weight(double m) const {
  const double u = std::log(m / source_median);
  return std::exp(-u * u / (2.0 * source_sigma_log * source_sigma_log)) / m;
}

double BeamEnsemble::effective_mass_center() const {
  if (mass_rel_width == 0.0) return mass_center;
  const double lo = mass_center * (1.0 - 0.5 * mass_rel_width);
  const double hi = mass_center * (1.0 + 0.5 * mass_rel_width);
  const double dm = (hi - lo) / mass_nodes;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < mass_nodes; ++i) {
    const double m = lo + (i + 0.5) * dm;
    const double w = source_weight(m);
    num += w * m;
    den += w;
  }
  if (!(den > 0.0)) throw ValidationError("ensemble: empty effective mass window");
  return num / den;
}

namespace {

// Accumulates <S_l> (l = 0..l_max) over the velocity x mass product grid.
Eigen::VectorXd averaged_core(const InterferometerSetup& setup,
                              const SpeciesModel& species_model,
                              const BeamEnsemble& ens, Model model, int l_max) {
  ens.validate();
  setup.validate();
  if (l_max < 1) throw ValidationError("averaged_signal: l_max must be >= 1");

  auto [vh, wh] = special::gauss_hermite(ens.v_nodes);

  Eigen::VectorXd masses, mass_w;
  if (ens.mass_rel_width > 0.0) {
    const double lo = ens.mass_center * (1.0 - 0.5 * ens.mass_rel_width);
    const double hi = ens.mass_center * (1.0 + 0.5 * ens.mass_rel_width);
    const double dm = (hi - lo) / ens.mass_nodes;
    masses.resize(ens.mass_nodes);
    mass_w.resize(ens.mass_nodes);
    for (int i = 0; i < ens.mass_nodes; ++i) {
      masses(i) = lo + (i + 0.5) * dm;
      mass_w(i) = ens.source_weight(masses(i));
    }
  } else {
    masses = Eigen::VectorXd::Constant(1, ens.mass_center);
    mass_w = Eigen::VectorXd::Constant(1, 1.0);
  }

  const double d = setup.period();
  const double ll = setup.separation;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(l_max + 1);
  double total_w = 0.0;
  for (int iv = 0; iv < ens.v_nodes; ++iv) {
    const double v = ens.v_mean + std::sqrt(2.0) * ens.v_sigma * vh(iv);
    if (v <= 0.0) continue;
    const double wv = wh(iv);
    for (Eigen::Index im = 0; im < masses.size(); ++im) {
      const ClusterSpecies sp = species_model.at_mass(masses(im));
      const double xi1 = ll / talbot_length(sp.mass, v, d);
      const GratingInteraction g1 =
          grating_interaction(sp, setup.gratings[0], v);
      const GratingInteraction g2 =
          grating_interaction(sp, setup.gratings[1], v);
      const GratingInteraction g3 =
          grating_interaction(sp, setup.gratings[2], v);
      const double w = wv * mass_w(im);
      total_w += w;
      for (int l = 0; l <= l_max; ++l) {
        const double sl = tl_coefficient(g1, -l, 0.0, model) *
                          tl_coefficient(g2, 2 * l, -l * xi1, model) *
                          tl_coefficient(g3, l, 0.0, model);
        acc(l) += w * sl;
      }
    }
  }
  if (!(total_w > 0.0))
    throw ValidationError("averaged_signal: empty effective mass window");
  return acc / total_w;
}

}  // namespace

Eigen::VectorXd averaged_signal(const InterferometerSetup& setup,
                                const SpeciesModel& species_model,
                                const BeamEnsemble& ensemble, Model model,
                                int l_max) {
  return averaged_core(setup, species_model, ensemble, model, l_max);
}

PredictionResult averaged_prediction(const InterferometerSetup& setup,
                                     const SpeciesModel& species_model,
                                     const BeamEnsemble& ensemble,
                                     double contrast_scale, int l_max) {
  if (!(contrast_scale > 0.0) || contrast_scale > 1.0)
    throw ValidationError("contrast_scale must lie in (0, 1]");
  const Eigen::VectorXd sq =
      averaged_core(setup, species_model, ensemble, Model::quantum, l_max);
  const Eigen::VectorXd sc =
      averaged_core(setup, species_model, ensemble, Model::classical, l_max);
  if (!(sq(0) > 0.0) || !(sc(0) > 0.0))
    throw NumericError("averaged_prediction: degenerate signal, <S_0> <= 0");
  PredictionResult r;
  r.s0_mean = sq(0);
  r.v_quantum = 2.0 * std::abs(sq(1)) / sq(0);
  r.v_classical = 2.0 * std::abs(sc(1)) / sc(0);
  r.contrast_scale = contrast_scale;
  r.v_quantum_scaled = contrast_scale * r.v_quantum;
  r.v_classical_scaled = contrast_scale * r.v_classical;
  return r;
}

std::vector<PowerScanPoint> visibility_vs_power(
    const InterferometerSetup& setup_template,
    const SpeciesModel& species_model, const BeamEnsemble& ensemble,
    const Eigen::VectorXd& p2_grid, double contrast_scale) {
  std::vector<PowerScanPoint> out;
  out.reserve(p2_grid.size());
  InterferometerSetup setup = setup_template;
  setup.gratings[1].power = 0.0;
  const double s0_ref =
      averaged_core(setup, species_model, ensemble, Model::quantum, 1)(0);
  for (Eigen::Index i = 0; i < p2_grid.size(); ++i) {
    if (p2_grid(i) < 0.0)
      throw ValidationError("visibility_vs_power: P2 must be >= 0");
    setup.gratings[1].power = p2_grid(i);
    const Eigen::VectorXd sq =
        averaged_core(setup, species_model, ensemble, Model::quantum, 1);
    const Eigen::VectorXd sc =
        averaged_core(setup, species_model, ensemble, Model::classical, 1);
    PowerScanPoint pt;
    pt.p2 = p2_grid(i);
    pt.v_quantum = contrast_scale * 2.0 * std::abs(sq(1)) / sq(0);
    pt.v_classical = contrast_scale * 2.0 * std::abs(sc(1)) / sc(0);
    pt.transmission = sq(0) / s0_ref;
    out.push_back(pt);
  }
  return out;
}

Eigen::VectorXd transmission_vs_power(const InterferometerSetup& setup_template,
                                      const SpeciesModel& species_model,
                                      const BeamEnsemble& ensemble,
                                      const Eigen::VectorXd& p2_grid,
                                      Model model) {
  InterferometerSetup setup = setup_template;
  setup.gratings[1].power = 0.0;
  const double s0_ref =
      averaged_core(setup, species_model, ensemble, model, 1)(0);
  Eigen::VectorXd out(p2_grid.size());
  for (Eigen::Index i = 0; i < p2_grid.size(); ++i) {
    if (p2_grid(i) < 0.0)
      throw ValidationError("transmission_vs_power: P2 must be >= 0");
    setup.gratings[1].power = p2_grid(i);
    out(i) = averaged_core(setup, species_model, ensemble, model, 1)(0) / s0_ref;
  }
  return out;
}

VisibilityMap visibility_map(const Eigen::VectorXd& mass_grid,
                             const Eigen::VectorXd& p2_grid,
                             const InterferometerSetup& setup_template,
                             const SpeciesModel& species_model,
                             const BeamEnsemble& ensemble_template,
                             Model model) {
  if (mass_grid.size() == 0 || p2_grid.size() == 0)
    throw ValidationError("visibility_map: grids must be nonempty");
  VisibilityMap map;
  map.masses = mass_grid;
  map.powers = p2_grid;
  map.visibility.resize(mass_grid.size(), p2_grid.size());
  map.flagged = Eigen::MatrixXi::Zero(mass_grid.size(), p2_grid.size());
  const double d = setup_template.period();
  map.mass_talbot_eq_l =
      con::h * setup_template.separation / (ensemble_template.v_mean * d * d);
  map.mass_talbot_eq_2l = 2.0 * map.mass_talbot_eq_l;

  InterferometerSetup setup = setup_template;
  BeamEnsemble ens = ensemble_template;
  for (Eigen::Index i = 0; i < mass_grid.size(); ++i) {
    ens.mass_center = mass_grid(i);
    for (Eigen::Index j = 0; j < p2_grid.size(); ++j) {
      setup.gratings[1].power = p2_grid(j);
      try {
        const Eigen::VectorXd s =
            averaged_core(setup, species_model, ens, model, 1);
        map.visibility(i, j) = 2.0 * std::abs(s(1)) / s(0);
      } catch (const ValidationError&) {
        map.visibility(i, j) = std::nan("");
        map.flagged(i, j) = 1;
      }
    }
  }
  return map;
}

}  // namespace tltk
