#include "tltk/config.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>
#include <vector>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"
#include "tltk/records.hpp"

namespace tltk {

namespace {

namespace cn = constants;

enum class Dim {
  none,
  length,
  power,
  mass,
  time,
  speed,
  rate,
  energy,
  density,
  area,
  volume,
  voltage
};

const char* dim_name(Dim d) {
  switch (d) {
    case Dim::none: return "dimensionless";
    case Dim::length: return "length";
    case Dim::power: return "power";
    case Dim::mass: return "mass";
    case Dim::time: return "time";
    case Dim::speed: return "speed";
    case Dim::rate: return "rate";
    case Dim::energy: return "energy";
    case Dim::density: return "density";
    case Dim::area: return "area";
    case Dim::volume: return "volume";
    case Dim::voltage: return "voltage";
  }
  return "?";
}

struct Unit {
  const char* name;
  Dim dim;
  double factor;
};

const Unit kUnits[] = {
    {"m", Dim::length, 1.0},
    {"cm", Dim::length, 1e-2},
    {"mm", Dim::length, 1e-3},
    {"um", Dim::length, 1e-6},
    {"µm", Dim::length, 1e-6},
    {"nm", Dim::length, 1e-9},
    {"pm", Dim::length, 1e-12},
    {"W", Dim::power, 1.0},
    {"kW", Dim::power, 1e3},
    {"mW", Dim::power, 1e-3},
    {"uW", Dim::power, 1e-6},
    {"µW", Dim::power, 1e-6},
    {"kg", Dim::mass, 1.0},
    {"g", Dim::mass, 1e-3},
    {"MDa", Dim::mass, 1e6 * cn::dalton},
    {"kDa", Dim::mass, 1e3 * cn::dalton},
    {"Da", Dim::mass, cn::dalton},
    {"h", Dim::time, 3600.0},
    {"min", Dim::time, 60.0},
    {"s", Dim::time, 1.0},
    {"ms", Dim::time, 1e-3},
    {"us", Dim::time, 1e-6},
    {"µs", Dim::time, 1e-6},
    {"ns", Dim::time, 1e-9},
    {"km/s", Dim::speed, 1e3},
    {"m/s", Dim::speed, 1.0},
    {"mm/s", Dim::speed, 1e-3},
    {"um/s", Dim::speed, 1e-6},
    {"µm/s", Dim::speed, 1e-6},
    {"nm/s", Dim::speed, 1e-9},
    {"nm/h", Dim::speed, 1e-9 / 3600.0},
    {"um/h", Dim::speed, 1e-6 / 3600.0},
    {"µm/h", Dim::speed, 1e-6 / 3600.0},
    {"1/s", Dim::rate, 1.0},
    {"Hz", Dim::rate, 1.0},
    {"kHz", Dim::rate, 1e3},
    {"1/min", Dim::rate, 1.0 / 60.0},
    {"J", Dim::energy, 1.0},
    {"eV", Dim::energy, cn::eV},
    {"meV", Dim::energy, 1e-3 * cn::eV},
    {"kg/m^3", Dim::density, 1.0},
    {"g/cm^3", Dim::density, 1e3},
    {"m^2", Dim::area, 1.0},
    {"cm^2", Dim::area, 1e-4},
    {"mm^2", Dim::area, 1e-6},
    {"um^2", Dim::area, 1e-12},
    {"nm^2", Dim::area, 1e-18},
    {"m^3", Dim::volume, 1.0},
    {"cm^3", Dim::volume, 1e-6},
    {"nm^3", Dim::volume, 1e-27},
    {"angstrom^3", Dim::volume, 1e-30},
    {"A^3", Dim::volume, 1e-30},
    {"kV", Dim::voltage, 1e3},
    {"V", Dim::voltage, 1.0},
    {"mV", Dim::voltage, 1e-3},
};

const Unit* find_unit(const std::string& name) {
  for (const Unit& u : kUnits)
    if (name == u.name) return &u;
  return nullptr;
}

struct Field {
  const char* section;
  const char* key;
  char type;  // d: double, i: int, l: int64, u: uint64, b: bool, s: string
  Dim dim;
  const char* unit;  // canonical unit (factor 1) for doubles
  std::function<void*(RunConfig&)> ptr;
};

template <typename T>
std::function<void*(RunConfig&)> member(T RunConfig::* m) {
  return [m](RunConfig& c) -> void* { return &(c.*m); };
}

std::function<void*(RunConfig&)> element(std::array<double, 3> RunConfig::* m,
                                         int i) {
  return [m, i](RunConfig& c) -> void* { return &(c.*m)[i]; };
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"species", "name", 's', Dim::none, "", member(&RunConfig::species_name)},
      {"species", "atom_mass", 'd', Dim::mass, "kg",
       member(&RunConfig::atom_mass)},
      {"species", "density", 'd', Dim::density, "kg/m^3",
       member(&RunConfig::density)},
      {"species", "alpha_volume", 'd', Dim::volume, "m^3",
       member(&RunConfig::alpha_volume)},
      {"species", "sigma_ion_slope", 'd', Dim::area, "m^2",
       member(&RunConfig::sigma_ion_slope)},
      {"species", "sigma_ion_intercept", 'd', Dim::area, "m^2",
       member(&RunConfig::sigma_ion_intercept)},
      {"species", "work_function", 'd', Dim::energy, "J",
       member(&RunConfig::work_function)},
      {"setup", "wavelength", 'd', Dim::length, "m",
       member(&RunConfig::wavelength)},
      {"setup", "separation", 'd', Dim::length, "m",
       member(&RunConfig::separation)},
      {"setup", "p1", 'd', Dim::power, "W", element(&RunConfig::grating_power, 0)},
      {"setup", "p2", 'd', Dim::power, "W", element(&RunConfig::grating_power, 1)},
      {"setup", "p3", 'd', Dim::power, "W", element(&RunConfig::grating_power, 2)},
      {"setup", "w1", 'd', Dim::length, "m", element(&RunConfig::grating_waist, 0)},
      {"setup", "w2", 'd', Dim::length, "m", element(&RunConfig::grating_waist, 1)},
      {"setup", "w3", 'd', Dim::length, "m", element(&RunConfig::grating_waist, 2)},
      {"beam", "v_mean", 'd', Dim::speed, "m/s", member(&RunConfig::v_mean)},
      {"beam", "v_sigma", 'd', Dim::speed, "m/s", member(&RunConfig::v_sigma)},
      {"beam", "mass_center", 'd', Dim::mass, "kg",
       member(&RunConfig::mass_center)},
      {"beam", "mass_rel_width", 'd', Dim::none, "",
       member(&RunConfig::mass_rel_width)},
      {"beam", "source_median", 'd', Dim::mass, "kg",
       member(&RunConfig::source_median)},
      {"beam", "source_sigma_log", 'd', Dim::none, "",
       member(&RunConfig::source_sigma_log)},
      {"beam", "v_nodes", 'i', Dim::none, "", member(&RunConfig::v_nodes)},
      {"beam", "mass_nodes", 'i', Dim::none, "", member(&RunConfig::mass_nodes)},
      {"scan", "points", 'i', Dim::none, "", member(&RunConfig::scan_points)},
      {"scan", "step", 'd', Dim::length, "m", member(&RunConfig::scan_step)},
      {"scan", "dwell", 'd', Dim::time, "s", member(&RunConfig::dwell)},
      {"scan", "rate0", 'd', Dim::rate, "1/s", member(&RunConfig::rate0)},
      {"scan", "dark_rate", 'd', Dim::rate, "1/s", member(&RunConfig::dark_rate)},
      {"scan", "drift", 'd', Dim::speed, "m/s", member(&RunConfig::drift_rate)},
      {"scan", "scans", 'i', Dim::none, "", member(&RunConfig::n_scans)},
      {"scan", "total_points", 'l', Dim::none, "",
       member(&RunConfig::total_points)},
      {"tof", "flight_path", 'd', Dim::length, "m",
       member(&RunConfig::tof_flight_path)},
      {"tof", "chopper_open", 'd', Dim::time, "s",
       member(&RunConfig::tof_chopper_open)},
      {"tof", "voltage", 'd', Dim::voltage, "V", member(&RunConfig::tof_voltage)},
      {"tof", "counts", 'l', Dim::none, "", member(&RunConfig::tof_counts)},
      {"tof", "bins", 'i', Dim::none, "", member(&RunConfig::tof_bins)},
      {"macro", "tau_min", 'd', Dim::time, "s", member(&RunConfig::tau_min)},
      {"macro", "tau_max", 'd', Dim::time, "s", member(&RunConfig::tau_max)},
      {"macro", "tau_points", 'i', Dim::none, "", member(&RunConfig::tau_points)},
      {"macro", "sigma_min", 'd', Dim::length, "m",
       member(&RunConfig::sigma_len_min)},
      {"macro", "sigma_max", 'd', Dim::length, "m",
       member(&RunConfig::sigma_len_max)},
      {"macro", "sigma_points", 'i', Dim::none, "",
       member(&RunConfig::sigma_points)},
      {"macro", "quantile", 'd', Dim::none, "",
       member(&RunConfig::quantile_level)},
      {"macro", "v_grid_points", 'i', Dim::none, "",
       member(&RunConfig::v_grid_points)},
      {"macro", "xbar_offsets", 'i', Dim::none, "",
       member(&RunConfig::xbar_offsets)},
      {"macro", "profile_dark", 'b', Dim::none, "",
       member(&RunConfig::profile_dark)},
      {"macro", "marginalize", 'b', Dim::none, "",
       member(&RunConfig::marginalize)},
      {"macro", "tail_fraction", 'd', Dim::none, "",
       member(&RunConfig::tail_fraction)},
      {"macro", "sigma_s", 'd', Dim::length, "m", member(&RunConfig::sigma_s)},
      {"run", "seed", 'u', Dim::none, "", member(&RunConfig::seed)},
      {"run", "lmax", 'i', Dim::none, "", member(&RunConfig::l_max)},
      {"run", "contrast", 'd', Dim::none, "", member(&RunConfig::contrast)},
      {"run", "charge_factor", 'd', Dim::none, "",
       member(&RunConfig::charge_factor)},
  };
  return table;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& where,
                       const std::string& what) {
  throw ValidationError("config line " + std::to_string(line) + ": " + where +
                        ": " + what);
}

double parse_double_token(const std::string& tok, int line,
                          const std::string& where) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    fail(line, where, "cannot parse number '" + tok + "'");
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void assign(const Field& f, RunConfig& cfg, const std::string& value, int line) {
  const std::string where =
      "[" + std::string(f.section) + "] " + std::string(f.key);
  void* dst = f.ptr(cfg);
  switch (f.type) {
    case 'd': {
      std::string num = value, unit;
      const std::size_t sp = value.find_first_of(" \t");
      if (sp != std::string::npos) {
        num = trim(value.substr(0, sp));
        unit = trim(value.substr(sp));
      }
      double x = parse_double_token(num, line, where);
      if (f.dim == Dim::none) {
        if (!unit.empty()) fail(line, where, "unexpected unit '" + unit + "'");
      } else {
        if (unit.empty())
          fail(line, where,
               std::string("missing unit (expected a ") + dim_name(f.dim) +
                   " unit such as '" + f.unit + "')");
        const Unit* u = find_unit(unit);
        if (u == nullptr) fail(line, where, "unknown unit '" + unit + "'");
        if (u->dim != f.dim)
          fail(line, where, "unit '" + unit + "' is not a " + dim_name(f.dim) +
                                " unit");
        x *= u->factor;
      }
      *static_cast<double*>(dst) = x;
      break;
    }
    case 'i': {
      int x = 0;
      auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), x);
      if (ec != std::errc() || ptr != value.data() + value.size())
        fail(line, where, "cannot parse integer '" + value + "'");
      *static_cast<int*>(dst) = x;
      break;
    }
    case 'l': {
      std::int64_t x = 0;
      auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), x);
      if (ec != std::errc() || ptr != value.data() + value.size())
        fail(line, where, "cannot parse integer '" + value + "'");
      *static_cast<std::int64_t*>(dst) = x;
      break;
    }
    case 'u': {
      std::uint64_t x = 0;
      auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), x);
      if (ec != std::errc() || ptr != value.data() + value.size())
        fail(line, where, "cannot parse unsigned integer '" + value + "'");
      *static_cast<std::uint64_t*>(dst) = x;
      break;
    }
    case 'b': {
      if (value == "true")
        *static_cast<bool*>(dst) = true;
      else if (value == "false")
        *static_cast<bool*>(dst) = false;
      else
        fail(line, where, "expected 'true' or 'false', got '" + value + "'");
      break;
    }
    case 's':
      if (value.empty()) fail(line, where, "empty value");
      *static_cast<std::string*>(dst) = value;
      break;
  }
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw ValidationError("config: " + field + ": " + what);
}

}  // namespace

RunConfig::RunConfig() {
  atom_mass = cn::sodium_atom_mass;
  work_function = 2.4 * cn::eV;
  mass_center = 170.0 * cn::kDa;
  source_median = 307.5388477893228 * cn::kDa;
}

void RunConfig::validate() const {
  if (species_name != "sodium")
    invalid("[species] name", "only 'sodium' is available");
  if (!(atom_mass > 0)) invalid("[species] atom_mass", "must be > 0");
  if (!(density > 0)) invalid("[species] density", "must be > 0");
  if (!(work_function > 0)) invalid("[species] work_function", "must be > 0");
  if (!(wavelength > 0)) invalid("[setup] wavelength", "must be > 0");
  if (!(separation > 0)) invalid("[setup] separation", "must be > 0");
  for (int i = 0; i < 3; ++i) {
    const std::string tag = std::to_string(i + 1);
    if (grating_power[i] < 0) invalid("[setup] p" + tag, "must be >= 0");
    if (!(grating_waist[i] > 0)) invalid("[setup] w" + tag, "must be > 0");
  }
  if (!(v_mean > 0)) invalid("[beam] v_mean", "must be > 0");
  if (v_sigma < 0) invalid("[beam] v_sigma", "must be >= 0");
  if (v_sigma > 0.2 * v_mean)
    invalid("[beam] v_sigma", "must be <= 0.2 v_mean (quadrature validity)");
  if (!(mass_center > 0)) invalid("[beam] mass_center", "must be > 0");
  if (mass_rel_width < 0 || mass_rel_width >= 1)
    invalid("[beam] mass_rel_width", "must lie in [0, 1)");
  if (!(source_median > 0)) invalid("[beam] source_median", "must be > 0");
  if (!(source_sigma_log > 0)) invalid("[beam] source_sigma_log", "must be > 0");
  if (v_nodes < 8) invalid("[beam] v_nodes", "must be >= 8");
  if (mass_nodes < 8) invalid("[beam] mass_nodes", "must be >= 8");
  if (scan_points < 1) invalid("[scan] points", "must be >= 1");
  if (!(scan_step > 0)) invalid("[scan] step", "must be > 0");
  if (!(dwell > 0)) invalid("[scan] dwell", "must be > 0");
  if (rate0 < 0) invalid("[scan] rate0", "must be >= 0");
  if (dark_rate < 0) invalid("[scan] dark_rate", "must be >= 0");
  if (n_scans < 1) invalid("[scan] scans", "must be >= 1");
  if (total_points < 1) invalid("[scan] total_points", "must be >= 1");
  if (total_points > static_cast<std::int64_t>(n_scans) * scan_points)
    invalid("[scan] total_points", "exceeds scans x points");
  if (!(tof_flight_path > 0)) invalid("[tof] flight_path", "must be > 0");
  if (tof_chopper_open < 0) invalid("[tof] chopper_open", "must be >= 0");
  if (tof_voltage < 0) invalid("[tof] voltage", "must be >= 0");
  if (tof_counts < 1) invalid("[tof] counts", "must be >= 1");
  if (tof_bins < 8) invalid("[tof] bins", "must be >= 8");
  if (!(tau_min > 0)) invalid("[macro] tau_min", "must be > 0");
  if (!(tau_max > tau_min)) invalid("[macro] tau_max", "must exceed tau_min");
  if (tau_points < 2) invalid("[macro] tau_points", "must be >= 2");
  if (!(sigma_len_min > 0)) invalid("[macro] sigma_min", "must be > 0");
  if (!(sigma_len_max > sigma_len_min))
    invalid("[macro] sigma_max", "must exceed sigma_min");
  if (sigma_points < 2) invalid("[macro] sigma_points", "must be >= 2");
  if (!(quantile_level > 0 && quantile_level < 1))
    invalid("[macro] quantile", "must lie in (0, 1)");
  if (v_grid_points < 2) invalid("[macro] v_grid_points", "must be >= 2");
  if (xbar_offsets < 1) invalid("[macro] xbar_offsets", "must be >= 1");
  if (!(tail_fraction > 0 && tail_fraction < 1))
    invalid("[macro] tail_fraction", "must lie in (0, 1)");
  if (sigma_s < 0) invalid("[macro] sigma_s", "must be >= 0");
  if (l_max < 1) invalid("[run] lmax", "must be >= 1");
  if (!(contrast > 0 && contrast <= 1))
    invalid("[run] contrast", "must lie in (0, 1]");
  if (charge_factor < 0) invalid("[run] charge_factor", "must be >= 0");
}

SpeciesModel RunConfig::species_model() const {
  SpeciesModel m;
  m.name = species_name;
  m.atomic_mass = atom_mass;
  m.density = density;
  m.alpha_per_atom = 4.0 * cn::pi * cn::eps0 * alpha_volume;
  m.sigma_ion_slope = sigma_ion_slope;
  m.sigma_ion_intercept = sigma_ion_intercept;
  m.work_function = work_function;
  return m;
}

InterferometerSetup RunConfig::setup() const {
  InterferometerSetup s;
  for (int i = 0; i < 3; ++i) {
    s.gratings[i].power = grating_power[i];
    s.gratings[i].waist_y = grating_waist[i];
    s.gratings[i].wavelength = wavelength;
  }
  s.separation = separation;
  return s;
}

BeamEnsemble RunConfig::beam() const {
  BeamEnsemble b;
  b.v_mean = v_mean;
  b.v_sigma = v_sigma;
  b.mass_center = mass_center;
  b.mass_rel_width = mass_rel_width;
  b.source_median = source_median;
  b.source_sigma_log = source_sigma_log;
  b.v_nodes = v_nodes;
  b.mass_nodes = mass_nodes;
  return b;
}

ScanProtocol RunConfig::protocol() const {
  ScanProtocol p;
  p.points = scan_points;
  p.step = scan_step;
  p.dwell = dwell;
  p.x_start = 0.0;
  return p;
}

MacroOptions RunConfig::macro_options() const {
  MacroOptions o;
  o.tau_grid.log10_min = std::log10(tau_min);
  o.tau_grid.log10_max = std::log10(tau_max);
  o.tau_grid.points = tau_points;
  o.hbar_over_sigma_q_min = sigma_len_min;
  o.hbar_over_sigma_q_max = sigma_len_max;
  o.sigma_q_points = sigma_points;
  o.quantile_level = quantile_level;
  o.convergence_tail_fraction = tail_fraction;
  o.likelihood.v_grid_points = v_grid_points;
  o.likelihood.xbar_offsets = xbar_offsets;
  o.likelihood.dark_rate = dark_rate;
  o.likelihood.profile_dark = profile_dark;
  o.likelihood.marginalize = marginalize;
  return o;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::vector<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        fail(line, "section header", "missing closing ']'");
      section = trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const Field& f : fields())
        if (section == f.section) known = true;
      if (!known) fail(line, "section header", "unknown section '" + section + "'");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(line, "entry", "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(line, key, "entry before any [section]");
    const Field* match = nullptr;
    for (const Field& f : fields())
      if (section == f.section && key == f.key) match = &f;
    if (match == nullptr)
      fail(line, "[" + section + "] " + key, "unknown key");
    const std::string id = section + "." + key;
    for (const std::string& prev : seen)
      if (prev == id) fail(line, "[" + section + "] " + key, "duplicate key");
    seen.push_back(id);
    assign(*match, cfg, value, line);
    if (section == "run" && key == "seed") cfg.seed_given = true;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

std::string canonical_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  RunConfig& cfg = const_cast<RunConfig&>(config);
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = ";
    void* p = f.ptr(cfg);
    switch (f.type) {
      case 'd':
        out << format_double(*static_cast<double*>(p));
        if (f.dim != Dim::none) out << ' ' << f.unit;
        break;
      case 'i': out << *static_cast<int*>(p); break;
      case 'l': out << *static_cast<std::int64_t*>(p); break;
      case 'u': out << *static_cast<std::uint64_t*>(p); break;
      case 'b': out << (*static_cast<bool*>(p) ? "true" : "false"); break;
      case 's': out << *static_cast<std::string*>(p); break;
    }
    out << '\n';
  }
  return out.str();
}

std::string config_digest(const RunConfig& config) {
  return fnv1a_hex(canonical_config(config));
}

}  // namespace tltk
