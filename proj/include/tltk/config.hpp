#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "tltk/ensemble.hpp"
#include "tltk/mmm.hpp"
#include "tltk/setup.hpp"
#include "tltk/species.hpp"
#include "tltk/synth.hpp"

// Run configuration: an INI-style document with explicit unit suffixes,
// normalized to SI on parse. The canonical serialization (SI units, fixed key
// order, shortest round-trip numbers) defines the config digest embedded in
// every output file.

namespace tltk {

struct RunConfig {
  // [species]
  std::string species_name = "sodium";
  double atom_mass = 0.0;            // kg (default set in constructor)
  double density = 968.0;            // kg/m^3
  double alpha_volume = -4.5e-30;    // m^3, signed polarizability volume/atom
  double sigma_ion_slope = 0.537e-20;      // m^2 per kDa
  double sigma_ion_intercept = -1.5e-20;   // m^2
  double work_function = 0.0;        // J (default set in constructor)

  // [setup]
  double wavelength = 266e-9;  // m
  double separation = 0.983;   // m
  std::array<double, 3> grating_power = {62e-3, 15.2e-3, 68e-3};  // W
  std::array<double, 3> grating_waist = {620e-6, 575e-6, 575e-6}; // m

  // [beam]
  double v_mean = 160.0;        // m/s
  double v_sigma = 10.0;        // m/s
  double mass_center = 0.0;     // kg (default set in constructor)
  double mass_rel_width = 0.32;
  double source_median = 0.0;   // kg (default set in constructor)
  double source_sigma_log = 0.5;
  int v_nodes = 32;
  int mass_nodes = 64;

  // [scan]
  int scan_points = 60;
  double scan_step = 15e-9;   // m
  double dwell = 4.0;         // s
  double rate0 = 120.0;       // counts/s
  double dark_rate = 30.0;    // counts/s
  double drift_rate = 0.0;    // m/s
  int n_scans = 65;
  std::int64_t total_points = 3895;

  // [tof]
  double tof_flight_path = 2.0;     // m
  double tof_chopper_open = 5e-4;   // s
  double tof_voltage = 100.0;       // V
  std::int64_t tof_counts = 20000;
  int tof_bins = 240;

  // [macro]
  double tau_min = 1.0;     // s
  double tau_max = 1e25;    // s
  int tau_points = 2001;
  double sigma_len_min = 0.1e-9;  // m, hbar/sigma_q lower edge
  double sigma_len_max = 10e-6;   // m, hbar/sigma_q upper edge
  int sigma_points = 41;
  double quantile_level = 0.05;
  int v_grid_points = 281;
  int xbar_offsets = 64;
  bool profile_dark = false;
  bool marginalize = false;
  double tail_fraction = 0.15;
  double sigma_s = 0.0;  // m (carried through, no effect at this setup)

  // [run]
  std::uint64_t seed = 20260885;
  int l_max = 5;
  double contrast = 0.78;
  double charge_factor = 1.0;

  // True when [run] seed appeared in the parsed document (synthesis refuses
  // to draw entropy implicitly). Not part of the canonical serialization.
  bool seed_given = false;

  RunConfig();

  void validate() const;

  // Views into the module types.
  SpeciesModel species_model() const;
  InterferometerSetup setup() const;
  BeamEnsemble beam() const;
  ScanProtocol protocol() const;
  MacroOptions macro_options() const;
};

// Parses an INI document (sections, key = value pairs, '#'/';' comments).
// Dimensioned values require a unit suffix; unknown keys, unknown units and
// dimension mismatches raise ValidationError with the line number and field.
RunConfig parse_run_config(const std::string& text);

RunConfig load_run_config(const std::filesystem::path& path);

// Canonical serialization: fixed order, SI units, shortest exact numbers.
// parse(canonical_config(c)) reproduces c bit for bit.
std::string canonical_config(const RunConfig& config);

// FNV-1a digest of the canonical serialization.
std::string config_digest(const RunConfig& config);

}  // namespace tltk
