// tlsim: command-line front end for the Talbot-Lau interferometry toolkit.
//
// Subcommands:
//   predict         fringe visibility, power scans, transmission, parameter maps
//   synthesize      synthetic raw datasets (fringe scans, power scans, TOF traces)
//   analyze         fringe fits and time-of-flight velocity fits on raw data
//   macroscopicity  Bayesian macrorealism-exclusion report from fringe datasets
//   constants       physical constants and derived cluster quantities
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
// failure, 3 malformed file format.
//
// Output files go to --output-dir when given, else to $TLSIM_OUTPUT_DIR, else
// to the current directory. All writes are atomic; every artifact embeds the
// config digest of the run that produced it.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tltk/analysis.hpp"
#include "tltk/config.hpp"
#include "tltk/constants.hpp"
#include "tltk/ensemble.hpp"
#include "tltk/errors.hpp"
#include "tltk/mmm.hpp"
#include "tltk/physics.hpp"
#include "tltk/records.hpp"
#include "tltk/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// CSV rendering with the config digest as a trailing column on every row.
std::string csv_with_digest(std::vector<std::string> header,
                            const std::vector<std::vector<double>>& rows,
                            const std::string& digest) {
  header.push_back("config_digest");
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (double v : row) {
      out += fmt_num(v);
      out += ',';
    }
    out += digest;
    out += '\n';
  }
  return out;
}

tltk::RunConfig load_config(const std::string& path) {
  if (path.empty()) return tltk::RunConfig{};
  return tltk::load_run_config(path);
}

// Resolution order for the output directory: explicit flag, then the
// TLSIM_OUTPUT_DIR environment variable, then the working directory.
fs::path resolve_output(const std::string& dir_flag, const std::string& name_flag,
                        const std::string& default_name) {
  fs::path name = name_flag.empty() ? fs::path(default_name) : fs::path(name_flag);
  if (name.is_absolute()) {
    fs::create_directories(name.parent_path());
    return name;
  }
  fs::path dir = ".";
  if (!dir_flag.empty()) {
    dir = dir_flag;
  } else if (const char* env = std::getenv("TLSIM_OUTPUT_DIR");
             env != nullptr && *env != '\0') {
    dir = env;
  }
  fs::create_directories(dir);
  return dir / name;
}

json grating_interactions_json(const tltk::ClusterSpecies& sp,
                               const tltk::InterferometerSetup& setup, double v) {
  json arr = json::array();
  for (const auto& grating : setup.gratings) {
    tltk::GratingInteraction gi = tltk::grating_interaction(sp, grating, v);
    json g;
    g["n0"] = gi.n0;
    g["phi0_rad"] = gi.phi0;
    arr.push_back(g);
  }
  return arr;
}

json cluster_json(const tltk::ClusterSpecies& sp,
                  const tltk::InterferometerSetup& setup, double v) {
  namespace kc = tltk::constants;
  json j;
  j["name"] = sp.name;
  j["mass_kg"] = sp.mass;
  j["mass_kda"] = sp.mass / kc::kDa;
  j["n_atoms"] = sp.n_atoms;
  j["radius_m"] = sp.radius;
  j["alpha_total_si"] = sp.alpha_total();
  j["sigma_ion_m2"] = sp.sigma_ion();
  // Thresholds for producing charge states 1+, 2+, 3+: the sphere carries
  // charge q = 0, 1, 2 while the electron is removed.
  j["ionization_thresholds_ev"] =
      json::array({tltk::ionization_threshold(sp, 0) / kc::eV,
                   tltk::ionization_threshold(sp, 1) / kc::eV,
                   tltk::ionization_threshold(sp, 2) / kc::eV});
  j["v_m_per_s"] = v;
  j["de_broglie_wavelength_m"] = tltk::de_broglie_wavelength(sp.mass, v);
  double lt = tltk::talbot_length(sp.mass, v, setup.period());
  j["talbot_length_m"] = lt;
  j["xi"] = setup.separation / lt;
  j["gratings"] = grating_interactions_json(sp, setup, v);
  return j;
}

// Shared digest policy for commands that consume recorded data: inputs must
// agree among themselves, and with the analysis config when one was named.
void check_digests(const std::set<std::string>& data_digests,
                   const std::string& cfg_digest, bool config_named, bool force) {
  if (force) return;
  if (data_digests.size() > 1) {
    std::string list;
    for (const auto& d : data_digests) {
      if (!list.empty()) list += ", ";
      list += d;
    }
    throw tltk::ValidationError(
        "inputs carry " + std::to_string(data_digests.size()) +
        " distinct config digests (" + list + "); pass --force to combine them");
  }
  if (config_named && !data_digests.empty() &&
      data_digests.count(cfg_digest) == 0) {
    throw tltk::ValidationError("config digest " + cfg_digest +
                                " does not match data digest " +
                                *data_digests.begin() +
                                "; pass --force to override");
  }
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string config_path;
  std::string output_dir;
  std::string output_name;
  std::string mode = "visibility";
  double p2_max_mw = 30.0;
  int p2_points = 61;
  double mass_min_kda = 100.0;
  double mass_max_kda = 2000.0;
  int mass_points = 50;
  double map_p2_max_mw = 50.0;
  int map_p2_points = 50;
};

int cmd_predict(const PredictArgs& args) {
  namespace kc = tltk::constants;
  tltk::RunConfig cfg = load_config(args.config_path);
  const std::string digest = tltk::config_digest(cfg);
  tltk::InterferometerSetup setup = cfg.setup();
  tltk::SpeciesModel model = cfg.species_model();
  tltk::BeamEnsemble beam = cfg.beam();

  if (args.mode == "visibility") {
    tltk::PredictionResult pred =
        tltk::averaged_prediction(setup, model, beam, cfg.contrast, cfg.l_max);
    double meff = beam.effective_mass_center();
    tltk::ClusterSpecies sp = model.at_mass(meff);

    json j;
    j["type"] = "prediction";
    j["config_digest"] = digest;
    json& in = j["inputs"];
    in["v_mean_m_per_s"] = beam.v_mean;
    in["v_sigma_m_per_s"] = beam.v_sigma;
    in["mass_center_kg"] = beam.mass_center;
    in["effective_mass_kg"] = meff;
    in["effective_mass_kda"] = meff / kc::kDa;
    in["powers_w"] = json::array(
        {cfg.grating_power[0], cfg.grating_power[1], cfg.grating_power[2]});
    in["contrast"] = cfg.contrast;
    in["l_max"] = cfg.l_max;
    j["single_particle"] = cluster_json(sp, setup, beam.v_mean);
    json& r = j["result"];
    r["s0_mean"] = pred.s0_mean;
    r["v_quantum"] = pred.v_quantum;
    r["v_classical"] = pred.v_classical;
    r["v_quantum_scaled"] = pred.v_quantum_scaled;
    r["v_classical_scaled"] = pred.v_classical_scaled;

    fs::path out = resolve_output(args.output_dir, args.output_name,
                                  "predict_visibility.json");
    tltk::write_file_atomic(out, j.dump(2) + "\n");
    std::cout << "visibility: quantum " << pred.v_quantum_scaled
              << ", classical " << pred.v_classical_scaled << " (scaled by "
              << cfg.contrast << "); transmission " << pred.s0_mean << "\n"
              << "wrote " << out.string() << "\n";
    return 0;
  }

  if (args.mode == "power-scan" || args.mode == "transmission") {
    if (args.p2_points < 2)
      throw tltk::ValidationError("--p2-points must be at least 2");
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(args.p2_points, 0.0,
                                                      args.p2_max_mw * 1e-3);
    std::vector<std::vector<double>> rows;
    fs::path out;
    if (args.mode == "power-scan") {
      std::vector<tltk::PowerScanPoint> pts =
          tltk::visibility_vs_power(setup, model, beam, grid, cfg.contrast);
      for (const auto& p : pts)
        rows.push_back({p.p2 * 1e3, p.v_quantum, p.v_classical, p.transmission});
      out = resolve_output(args.output_dir, args.output_name, "power_scan.csv");
      tltk::write_file_atomic(
          out, csv_with_digest({"p2_mw", "v_quantum", "v_classical",
                                "transmission"},
                               rows, digest));
    } else {
      Eigen::VectorXd tr = tltk::transmission_vs_power(setup, model, beam, grid);
      for (int i = 0; i < grid.size(); ++i)
        rows.push_back({grid[i] * 1e3, tr[i]});
      out = resolve_output(args.output_dir, args.output_name, "transmission.csv");
      tltk::write_file_atomic(
          out, csv_with_digest({"p2_mw", "transmission"}, rows, digest));
    }
    std::cout << rows.size() << " grid points\nwrote " << out.string() << "\n";
    return 0;
  }

  if (args.mode == "map") {
    if (args.mass_points < 2 || args.map_p2_points < 2)
      throw tltk::ValidationError("map grids need at least 2 points per axis");
    if (args.mass_min_kda <= 0.0 || args.mass_max_kda <= args.mass_min_kda)
      throw tltk::ValidationError("map mass range must satisfy 0 < min < max");
    Eigen::VectorXd masses = Eigen::VectorXd::LinSpaced(
        args.mass_points, args.mass_min_kda * kc::kDa,
        args.mass_max_kda * kc::kDa);
    Eigen::VectorXd powers = Eigen::VectorXd::LinSpaced(
        args.map_p2_points, 0.0, args.map_p2_max_mw * 1e-3);
    tltk::VisibilityMap mq = tltk::visibility_map(masses, powers, setup, model,
                                                  beam, tltk::Model::quantum);
    tltk::VisibilityMap mc = tltk::visibility_map(masses, powers, setup, model,
                                                  beam, tltk::Model::classical);
    std::vector<std::vector<double>> rows;
    int n_flagged = 0;
    for (int i = 0; i < masses.size(); ++i)
      for (int k = 0; k < powers.size(); ++k) {
        int flag = std::max(mq.flagged(i, k), mc.flagged(i, k));
        n_flagged += flag;
        rows.push_back({masses[i] / kc::kDa, powers[k] * 1e3,
                        mq.visibility(i, k), mc.visibility(i, k),
                        static_cast<double>(flag)});
      }
    fs::path out =
        resolve_output(args.output_dir, args.output_name, "visibility_map.csv");
    tltk::write_file_atomic(
        out, csv_with_digest(
                 {"mass_kda", "p2_mw", "v_quantum", "v_classical", "flagged"},
                 rows, digest));

    json meta;
    meta["type"] = "visibility_map_meta";
    meta["config_digest"] = digest;
    meta["v_mean_m_per_s"] = beam.v_mean;
    meta["mass_grid_kda"] = {{"min", args.mass_min_kda},
                             {"max", args.mass_max_kda},
                             {"points", args.mass_points}};
    meta["p2_grid_mw"] = {{"min", 0.0},
                          {"max", args.map_p2_max_mw},
                          {"points", args.map_p2_points}};
    meta["mass_talbot_eq_l_kg"] = mq.mass_talbot_eq_l;
    meta["mass_talbot_eq_l_kda"] = mq.mass_talbot_eq_l / kc::kDa;
    meta["mass_talbot_eq_2l_kg"] = mq.mass_talbot_eq_2l;
    meta["mass_talbot_eq_2l_kda"] = mq.mass_talbot_eq_2l / kc::kDa;
    meta["n_flagged"] = n_flagged;
    fs::path meta_path = out;
    meta_path.replace_extension(".json");
    tltk::write_file_atomic(meta_path, meta.dump(2) + "\n");
    std::cout << rows.size() << " map cells (" << n_flagged
              << " flagged)\nwrote " << out.string() << "\nwrote "
              << meta_path.string() << "\n";
    return 0;
  }

  throw tltk::ValidationError("unknown predict mode: " + args.mode);
}

// ---------------------------------------------------------------------------
// synthesize

struct SynthArgs {
  std::string config_path;
  std::string output_dir;
  std::string output_name;
  std::string what = "fringe";
  std::uint64_t seed = 0;
  bool seed_given = false;
  double p2_max_mw = 30.0;
  int p2_points = 16;
  int replicas = 3;
};

int cmd_synthesize(const SynthArgs& args) {
  tltk::RunConfig cfg = load_config(args.config_path);
  const std::string digest = tltk::config_digest(cfg);
  std::uint64_t seed = 0;
  if (args.seed_given) {
    seed = args.seed;
  } else if (cfg.seed_given) {
    seed = cfg.seed;
  } else {
    throw tltk::ValidationError(
        "synthesize requires an explicit seed: pass --seed or set [run] seed "
        "in the config file");
  }

  tltk::InterferometerSetup setup = cfg.setup();
  tltk::SpeciesModel model = cfg.species_model();
  tltk::BeamEnsemble beam = cfg.beam();

  if (args.what == "fringe") {
    tltk::PredictionResult pred =
        tltk::averaged_prediction(setup, model, beam, cfg.contrast, cfg.l_max);
    tltk::FringeTruth truth{.visibility = pred.v_quantum_scaled,
                            .rate0 = cfg.rate0,
                            .dark_rate = cfg.dark_rate,
                            .period = setup.period(),
                            .drift_rate = cfg.drift_rate};
    tltk::FringeDataset ds = tltk::synth_fringe_dataset(
        truth, cfg.protocol(), cfg.grating_power, cfg.mass_center, cfg.n_scans,
        cfg.total_points, seed);
    ds.config_digest = digest;
    for (auto& scan : ds.scans) scan.config_digest = digest;
    fs::path out =
        resolve_output(args.output_dir, args.output_name, "fringe_data.json");
    tltk::write_file_atomic(out, tltk::to_json(ds));
    std::int64_t n_points = 0;
    for (const auto& scan : ds.scans) n_points += scan.counts.size();
    std::cout << ds.scans.size() << " scans, " << n_points
              << " points, truth visibility " << truth.visibility << ", seed "
              << seed << "\nwrote " << out.string() << "\n";
    return 0;
  }

  if (args.what == "power-scan") {
    if (args.p2_points < 2)
      throw tltk::ValidationError("--p2-points must be at least 2");
    if (args.replicas < 1)
      throw tltk::ValidationError("--replicas must be at least 1");
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(args.p2_points, 0.0,
                                                      args.p2_max_mw * 1e-3);
    std::vector<tltk::PowerScanPoint> pts =
        tltk::visibility_vs_power(setup, model, beam, grid, cfg.contrast);
    std::vector<tltk::PowerScanTruthPoint> truth;
    truth.reserve(pts.size());
    for (const auto& p : pts)
      truth.push_back({p.p2, p.v_quantum, cfg.rate0 * p.transmission});
    tltk::FringeTruth base{.visibility = 0.0,
                           .rate0 = cfg.rate0,
                           .dark_rate = cfg.dark_rate,
                           .period = setup.period(),
                           .drift_rate = cfg.drift_rate};
    tltk::FringeDataset ds = tltk::synth_power_scan(
        truth, base, cfg.protocol(), cfg.grating_power, cfg.mass_center,
        args.replicas, seed);
    ds.config_digest = digest;
    for (auto& scan : ds.scans) scan.config_digest = digest;
    fs::path out = resolve_output(args.output_dir, args.output_name,
                                  "power_scan_data.json");
    tltk::write_file_atomic(out, tltk::to_json(ds));
    std::cout << ds.scans.size() << " scans over " << args.p2_points
              << " powers x " << args.replicas << " replicas, seed " << seed
              << "\nwrote " << out.string() << "\n";
    return 0;
  }

  if (args.what == "tof") {
    int charge = static_cast<int>(std::llround(cfg.charge_factor));
    tltk::TofTrace trace = tltk::synth_tof_trace(
        cfg.v_mean, cfg.v_sigma, cfg.tof_flight_path, cfg.tof_chopper_open,
        cfg.tof_voltage, cfg.mass_center, cfg.tof_counts, cfg.tof_bins, seed,
        charge);
    trace.config_digest = digest;
    fs::path out =
        resolve_output(args.output_dir, args.output_name, "tof_data.json");
    tltk::write_file_atomic(out, tltk::to_json(trace));
    std::cout << trace.counts.sum() << " counts in " << trace.counts.size()
              << " bins, seed " << seed << "\nwrote " << out.string() << "\n";
    return 0;
  }

  throw tltk::ValidationError("unknown synthesize target: " + args.what);
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string config_path;
  bool config_named = false;
  std::string output_dir;
  std::string output_name;
  std::string task;
  std::vector<std::string> inputs;
  bool keep_going = false;
  bool force = false;
};

int cmd_analyze(const AnalyzeArgs& args) {
  namespace kc = tltk::constants;
  tltk::RunConfig cfg = load_config(args.config_path);
  const std::string digest = tltk::config_digest(cfg);
  json rows = json::array();
  std::set<std::string> data_digests;
  int n_errors = 0;

  if (args.task == "fringe-fit") {
    const double period = cfg.setup().period();
    struct Item {
      std::string file;
      int index;
      tltk::FringeScanRecord scan;
    };
    std::vector<Item> items;
    for (const std::string& file : args.inputs) {
      tltk::FringeDataset ds =
          tltk::fringe_dataset_from_json(tltk::read_file(file));
      if (!ds.config_digest.empty()) data_digests.insert(ds.config_digest);
      int index = 0;
      for (auto& scan : ds.scans) {
        if (!scan.config_digest.empty()) data_digests.insert(scan.config_digest);
        items.push_back({file, index++, std::move(scan)});
      }
    }
    check_digests(data_digests, digest, args.config_named, args.force);
    for (const Item& item : items) {
      json row;
      row["file"] = item.file;
      row["scan_index"] = item.index;
      row["n_points"] = item.scan.counts.size();
      row["seed"] = item.scan.seed;
      row["mass_setting_kda"] = item.scan.mass_setting / kc::kDa;
      row["p2_mw"] = item.scan.powers[1] * 1e3;
      try {
        tltk::FringeFit fit = tltk::fit_fringe(item.scan, period);
        row["amplitude_hz"] = fit.amplitude;
        row["offset_hz"] = fit.offset;
        row["phase_rad"] = fit.phase;
        row["visibility"] = fit.visibility;
        row["visibility_ci"] = fit.ci_visibility;
        row["chi2"] = fit.chi2;
        row["dof"] = fit.dof;
      } catch (const std::exception& e) {
        if (!args.keep_going) throw;
        ++n_errors;
        row["error"] = e.what();
      }
      rows.push_back(row);
    }
  } else if (args.task == "tof-fit") {
    int charge = static_cast<int>(std::llround(cfg.charge_factor));
    for (const std::string& file : args.inputs) {
      tltk::TofTrace trace = tltk::tof_trace_from_json(tltk::read_file(file));
      if (!trace.config_digest.empty()) data_digests.insert(trace.config_digest);
      json row;
      row["file"] = file;
      row["n_bins"] = trace.counts.size();
      row["counts_total"] = trace.counts.sum();
      row["mass_setting_kda"] = trace.mass_setting / kc::kDa;
      row["seed"] = trace.seed;
      try {
        tltk::VelocityEstimate est =
            tltk::fit_velocity(trace, trace.mass_setting, charge);
        row["v_mean_m_per_s"] = est.v_mean;
        row["v_sigma_m_per_s"] = est.v_sigma;
        row["rel_width"] = est.rel_width;
        row["iterations"] = est.iterations;
        row["rms_residual"] = est.rms_residual;
      } catch (const std::exception& e) {
        if (!args.keep_going) throw;
        ++n_errors;
        row["error"] = e.what();
      }
      rows.push_back(row);
    }
    check_digests(data_digests, digest, args.config_named, args.force);
  } else {
    throw tltk::ValidationError("unknown analyze task: " + args.task);
  }

  json j;
  j["type"] = args.task == "fringe-fit" ? "fringe_fit_report" : "tof_fit_report";
  j["config_digest"] = digest;
  j["data_digests"] = json::array();
  for (const auto& d : data_digests) j["data_digests"].push_back(d);
  if (args.task == "fringe-fit") j["period_m"] = cfg.setup().period();
  j["n_rows"] = rows.size();
  j["n_errors"] = n_errors;
  j["rows"] = rows;

  fs::path out = resolve_output(
      args.output_dir, args.output_name,
      args.task == "fringe-fit" ? "fringe_fits.json" : "tof_fits.json");
  tltk::write_file_atomic(out, j.dump(2) + "\n");
  std::cout << rows.size() << " rows, " << n_errors << " errors\nwrote "
            << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// macroscopicity

struct MacroArgs {
  std::string config_path;
  bool config_named = false;
  std::string output_dir;
  std::string output_name;
  std::vector<std::string> inputs;
  bool allow_boundary = false;
  bool force = false;
};

int cmd_macroscopicity(const MacroArgs& args) {
  namespace kc = tltk::constants;
  tltk::RunConfig cfg = load_config(args.config_path);
  const std::string digest = tltk::config_digest(cfg);
  tltk::InterferometerSetup setup = cfg.setup();
  tltk::SpeciesModel model = cfg.species_model();
  tltk::BeamEnsemble beam = cfg.beam();

  std::vector<tltk::FringeScanRecord> scans;
  std::set<std::string> data_digests;
  json inputs_meta = json::array();
  for (const std::string& file : args.inputs) {
    tltk::FringeDataset ds =
        tltk::fringe_dataset_from_json(tltk::read_file(file));
    if (!ds.config_digest.empty()) data_digests.insert(ds.config_digest);
    std::int64_t points = 0;
    for (auto& scan : ds.scans) {
      if (!scan.config_digest.empty()) data_digests.insert(scan.config_digest);
      points += scan.counts.size();
      scans.push_back(std::move(scan));
    }
    json meta;
    meta["file"] = file;
    meta["digest"] = ds.config_digest;
    meta["seed"] = ds.seed;
    meta["scans"] = ds.scans.size();
    meta["points"] = points;
    inputs_meta.push_back(meta);
  }
  check_digests(data_digests, digest, args.config_named, args.force);
  if (scans.empty())
    throw tltk::ValidationError("no scans found in the input files");

  // The ideal visibility entering the likelihood is the unscaled quantum
  // prediction for the power triple of each scan; the empirical contrast is
  // absorbed by the profiled fringe amplitude.
  std::map<std::array<double, 3>, double> videal_by_powers;
  std::vector<double> v_ideal;
  v_ideal.reserve(scans.size());
  for (const auto& scan : scans) {
    auto it = videal_by_powers.find(scan.powers);
    if (it == videal_by_powers.end()) {
      tltk::InterferometerSetup su = setup;
      for (int k = 0; k < 3; ++k) su.gratings[k].power = scan.powers[k];
      tltk::PredictionResult pred =
          tltk::averaged_prediction(su, model, beam, cfg.contrast, cfg.l_max);
      it = videal_by_powers.emplace(scan.powers, pred.v_quantum).first;
    }
    v_ideal.push_back(it->second);
  }

  tltk::ClusterSpecies sp = model.at_mass(beam.effective_mass_center());
  tltk::MacroOptions opts = cfg.macro_options();
  tltk::MacroReport report =
      tltk::macroscopicity(scans, v_ideal, sp, setup, beam.v_mean, opts);

  json j;
  j["type"] = "macro_report";
  j["config_digest"] = digest;
  j["inputs"] = inputs_meta;
  j["prior"] = {{"log10_tau_min", opts.tau_grid.log10_min},
                {"log10_tau_max", opts.tau_grid.log10_max},
                {"points", opts.tau_grid.points}};
  j["sigma_q_grid"] = {{"hbar_over_sigma_q_min_m", opts.hbar_over_sigma_q_min},
                       {"hbar_over_sigma_q_max_m", opts.hbar_over_sigma_q_max},
                       {"points", opts.sigma_q_points}};
  j["quantile_level"] = opts.quantile_level;
  json& lk = j["likelihood"];
  lk["v_grid_points"] = opts.likelihood.v_grid_points;
  lk["xbar_offsets"] = opts.likelihood.xbar_offsets;
  lk["dark_rate_hz"] = opts.likelihood.dark_rate;
  lk["profile_dark"] = opts.likelihood.profile_dark;
  lk["marginalize"] = opts.likelihood.marginalize;
  lk["note"] =
      "ideal visibility per scan is the unscaled quantum prediction; the "
      "empirical contrast factor is absorbed into the profiled count rate "
      "and fringe amplitude";
  json& r = j["result"];
  r["mu"] = report.mu;
  r["argmax_hbar_over_sigma_q_m"] = report.argmax_hbar_over_sigma_q;
  json table = json::array();
  for (int i = 0; i < report.hbar_over_sigma_q.size(); ++i)
    table.push_back({{"hbar_over_sigma_q_m", report.hbar_over_sigma_q[i]},
                     {"log10_tau_m", report.log10_tau_m[i]}});
  r["log10_tau_table"] = table;
  json& post = r["posterior_at_argmax"];
  post["sigma_q_kg_m_per_s"] = report.posterior.sigma_q;
  post["log10_tau"] = to_vec(report.posterior.log10_tau);
  post["weights"] = to_vec(report.posterior.weights);
  post["n_data_used"] = report.posterior.n_data_used;
  r["gaussian_check"] = {{"kl_divergence", report.gaussian.kl_divergence},
                         {"mean_log10_tau", report.gaussian.mean_log10_tau},
                         {"sigma_log10_tau", report.gaussian.sigma_log10_tau}};
  json& conv = r["convergence"];
  conv["checkpoint_points"] = report.checkpoint_points;
  conv["mu_trace"] = to_vec(report.mu_trace);
  conv["tail_fraction"] = opts.convergence_tail_fraction;
  conv["delta"] = report.convergence_delta;
  conv["converged_3dp"] = report.converged_3dp;
  r["boundary_warning"] = report.boundary_warning;
  r["n_points"] = report.n_points;
  r["n_scans"] = report.n_scans;

  fs::path out =
      resolve_output(args.output_dir, args.output_name, "macro_report.json");
  tltk::write_file_atomic(out, j.dump(2) + "\n");
  std::cout << "mu = " << report.mu << " (argmax hbar/sigma_q = "
            << report.argmax_hbar_over_sigma_q / 1e-9 << " nm, "
            << report.n_scans << " scans, " << report.n_points
            << " points)\nconvergence delta " << report.convergence_delta
            << (report.converged_3dp ? " (converged to 3 decimals)"
                                     : " (NOT converged to 3 decimals)")
            << ", KL " << report.gaussian.kl_divergence << "\nwrote "
            << out.string() << "\n";
  if (report.boundary_warning && !args.allow_boundary) {
    std::cerr << "tlsim: posterior weight touches the tau prior boundary; "
                 "rerun with --allow-boundary to accept the report\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// constants

int cmd_constants(const std::string& config_path, const std::string& output_dir,
                  const std::string& output_name) {
  namespace kc = tltk::constants;
  tltk::RunConfig cfg = load_config(config_path);
  tltk::InterferometerSetup setup = cfg.setup();
  tltk::SpeciesModel model = cfg.species_model();
  tltk::BeamEnsemble beam = cfg.beam();

  json j;
  j["type"] = "constants";
  j["config_digest"] = tltk::config_digest(cfg);
  json& cd = j["codata"];
  cd["h_j_s"] = kc::h;
  cd["hbar_j_s"] = kc::hbar;
  cd["c_m_per_s"] = kc::c;
  cd["eps0_f_per_m"] = kc::eps0;
  cd["e_c"] = kc::e_charge;
  cd["m_electron_kg"] = kc::m_electron;
  cd["dalton_kg"] = kc::dalton;
  json& sm = j["species"];
  sm["name"] = cfg.species_name;
  sm["atom_mass_kg"] = cfg.atom_mass;
  sm["density_kg_m3"] = cfg.density;
  sm["alpha_volume_m3"] = cfg.alpha_volume;
  sm["sigma_ion_slope_m2_per_kda"] = cfg.sigma_ion_slope;
  sm["sigma_ion_intercept_m2"] = cfg.sigma_ion_intercept;
  sm["work_function_ev"] = cfg.work_function / kc::eV;
  j["setup"] = {{"wavelength_m", setup.gratings[0].wavelength},
                {"period_m", setup.period()},
                {"separation_m", setup.separation}};
  j["cluster_at_mass_center"] =
      cluster_json(model.at_mass(beam.mass_center), setup, beam.v_mean);
  j["cluster_at_effective_mass"] =
      cluster_json(model.at_mass(beam.effective_mass_center()), setup,
                   beam.v_mean);

  std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!output_name.empty()) {
    fs::path out = resolve_output(output_dir, output_name, "constants.json");
    tltk::write_file_atomic(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Talbot-Lau interferometry toolkit for nanoparticle beams"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tlsim 1.0.0");

  PredictArgs pargs;
  CLI::App* predict = app.add_subcommand(
      "predict", "Model predictions: visibility, power scans, parameter maps");
  predict->add_option("--config", pargs.config_path, "Run configuration file")
      ->check(CLI::ExistingFile);
  predict->add_option("--output-dir", pargs.output_dir, "Output directory");
  predict->add_option("--output", pargs.output_name, "Output file name");
  predict
      ->add_option("--mode", pargs.mode,
                   "visibility | power-scan | transmission | map")
      ->check(CLI::IsMember(
          {"visibility", "power-scan", "transmission", "map"}));
  predict->add_option("--p2-max-mw", pargs.p2_max_mw,
                      "Upper end of the G2 power grid, mW");
  predict->add_option("--p2-points", pargs.p2_points, "Power grid points");
  predict->add_option("--mass-min-kda", pargs.mass_min_kda,
                      "Map mass grid lower edge, kDa");
  predict->add_option("--mass-max-kda", pargs.mass_max_kda,
                      "Map mass grid upper edge, kDa");
  predict->add_option("--mass-points", pargs.mass_points,
                      "Map mass grid points");
  predict->add_option("--map-p2-max-mw", pargs.map_p2_max_mw,
                      "Map G2 power grid upper edge, mW");
  predict->add_option("--map-p2-points", pargs.map_p2_points,
                      "Map G2 power grid points");

  SynthArgs sargs;
  CLI::App* synth = app.add_subcommand(
      "synthesize", "Generate synthetic raw datasets (Poisson counting noise)");
  synth->add_option("--config", sargs.config_path, "Run configuration file")
      ->check(CLI::ExistingFile);
  synth->add_option("--output-dir", sargs.output_dir, "Output directory");
  synth->add_option("--output", sargs.output_name, "Output file name");
  synth->add_option("--what", sargs.what, "fringe | power-scan | tof")
      ->check(CLI::IsMember({"fringe", "power-scan", "tof"}));
  CLI::Option* seed_opt =
      synth->add_option("--seed", sargs.seed, "Dataset seed (64-bit)");
  synth->add_option("--p2-max-mw", sargs.p2_max_mw,
                    "Power-scan grid upper edge, mW");
  synth->add_option("--p2-points", sargs.p2_points, "Power-scan grid points");
  synth->add_option("--replicas", sargs.replicas,
                    "Scans per power-scan grid point");

  AnalyzeArgs aargs;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Fit fringe scans or TOF traces");
  CLI::Option* a_cfg =
      analyze->add_option("--config", aargs.config_path, "Run configuration file")
          ->check(CLI::ExistingFile);
  analyze->add_option("--output-dir", aargs.output_dir, "Output directory");
  analyze->add_option("--output", aargs.output_name, "Output file name");
  analyze->add_option("--task", aargs.task, "fringe-fit | tof-fit")
      ->required()
      ->check(CLI::IsMember({"fringe-fit", "tof-fit"}));
  analyze->add_option("inputs", aargs.inputs, "Input data files")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_flag("--keep-going", aargs.keep_going,
                    "Record fit errors as rows instead of aborting");
  analyze->add_flag("--force", aargs.force,
                    "Accept inputs with mismatched config digests");

  MacroArgs margs;
  CLI::App* macro = app.add_subcommand(
      "macroscopicity", "Bayesian macrorealism-exclusion report");
  CLI::Option* m_cfg =
      macro->add_option("--config", margs.config_path, "Run configuration file")
          ->check(CLI::ExistingFile);
  macro->add_option("--output-dir", margs.output_dir, "Output directory");
  macro->add_option("--output", margs.output_name, "Output file name");
  macro->add_option("inputs", margs.inputs, "Fringe dataset files")
      ->required()
      ->check(CLI::ExistingFile);
  macro->add_flag("--allow-boundary", margs.allow_boundary,
                  "Accept posteriors with weight at the tau prior boundary");
  macro->add_flag("--force", margs.force,
                  "Accept inputs with mismatched config digests");

  std::string c_config, c_outdir, c_output;
  CLI::App* consts = app.add_subcommand(
      "constants", "Print physical constants and derived cluster quantities");
  consts->add_option("--config", c_config, "Run configuration file")
      ->check(CLI::ExistingFile);
  consts->add_option("--output-dir", c_outdir, "Output directory");
  consts->add_option("--output", c_output,
                     "Also write the JSON to this file name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (predict->parsed()) return cmd_predict(pargs);
    if (synth->parsed()) {
      sargs.seed_given = seed_opt->count() > 0;
      return cmd_synthesize(sargs);
    }
    if (analyze->parsed()) {
      aargs.config_named = a_cfg->count() > 0;
      return cmd_analyze(aargs);
    }
    if (macro->parsed()) {
      margs.config_named = m_cfg->count() > 0;
      return cmd_macroscopicity(margs);
    }
    if (consts->parsed()) return cmd_constants(c_config, c_outdir, c_output);
  } catch (const tltk::ValidationError& e) {
    std::cerr << "tlsim: " << e.what() << "\n";
    return 1;
  } catch (const tltk::FormatError& e) {
    std::cerr << "tlsim: " << e.what() << "\n";
    return 3;
  } catch (const tltk::NumericError& e) {
    std::cerr << "tlsim: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tlsim: internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
