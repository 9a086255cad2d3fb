#include "tltk/records.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tltk/errors.hpp"

namespace tltk {

using nlohmann::json;

void FringeScanRecord::validate() const {
  const Eigen::Index n = positions.size();
  if (n < 1) throw ValidationError("fringe scan: empty record");
  if (dwell_times.size() != n || counts.size() != n ||
      timestamp_offsets.size() != n)
    throw ValidationError("fringe scan: field lengths differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dwell_times(i) > 0.0))
      throw ValidationError("fringe scan: dwell times must be > 0");
    if (counts(i) < 0)
      throw ValidationError("fringe scan: counts must be >= 0");
  }
  if (n >= 2) {
    const double step = positions(1) - positions(0);
    if (!(step > 0.0))
      throw ValidationError("fringe scan: positions must strictly increase");
    for (Eigen::Index i = 1; i < n; ++i) {
      const double s = positions(i) - positions(i - 1);
      if (std::abs(s - step) > 1e-6 * step)
        throw ValidationError("fringe scan: positions must be uniformly spaced");
    }
  }
}

void TofTrace::validate() const {
  const Eigen::Index nb = counts.size();
  if (nb < 1) throw ValidationError("tof trace: empty trace");
  if (bin_edges.size() != nb + 1)
    throw ValidationError("tof trace: need one more edge than bins");
  for (Eigen::Index i = 1; i < bin_edges.size(); ++i)
    if (!(bin_edges(i) > bin_edges(i - 1)))
      throw ValidationError("tof trace: bin edges must strictly increase");
  for (Eigen::Index i = 0; i < nb; ++i)
    if (counts(i) < 0) throw ValidationError("tof trace: counts must be >= 0");
  if (chopper_open < 0.0)
    throw ValidationError("tof trace: chopper opening must be >= 0");
  if (!(flight_path > 0.0))
    throw ValidationError("tof trace: flight path must be > 0");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open for writing: " + tmp.string());
    f.write(contents.data(),
            static_cast<std::streamsize>(contents.size()));
    if (!f) throw FormatError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json vector_to_json(const Eigen::VectorX<std::int64_t>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& a, const char* field) {
  if (!a.is_array()) throw FormatError(std::string(field) + ": expected array");
  Eigen::VectorXd v(a.size());
  Eigen::Index i = 0;
  for (const auto& x : a) {
    if (!x.is_number())
      throw FormatError(std::string(field) + ": expected numeric entries");
    v(i++) = x.get<double>();
  }
  return v;
}

Eigen::VectorX<std::int64_t> ivector_from_json(const json& a,
                                               const char* field) {
  if (!a.is_array()) throw FormatError(std::string(field) + ": expected array");
  Eigen::VectorX<std::int64_t> v(a.size());
  Eigen::Index i = 0;
  for (const auto& x : a) {
    if (!x.is_number_integer())
      throw FormatError(std::string(field) + ": expected integer entries");
    v(i++) = x.get<std::int64_t>();
  }
  return v;
}

json scan_to_json(const FringeScanRecord& rec) {
  json j;
  j["seed"] = rec.seed;
  j["mass_setting_kg"] = rec.mass_setting;
  j["powers_w"] = {rec.powers[0], rec.powers[1], rec.powers[2]};
  j["positions_m"] = vector_to_json(rec.positions);
  j["dwell_s"] = vector_to_json(rec.dwell_times);
  j["counts"] = vector_to_json(rec.counts);
  j["timestamp_offsets_s"] = vector_to_json(rec.timestamp_offsets);
  return j;
}

FringeScanRecord scan_from_json(const json& j) {
  FringeScanRecord rec;
  try {
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.mass_setting = j.at("mass_setting_kg").get<double>();
    const auto& pw = j.at("powers_w");
    if (!pw.is_array() || pw.size() != 3)
      throw FormatError("powers_w: expected three entries");
    for (int i = 0; i < 3; ++i) rec.powers[i] = pw[i].get<double>();
    rec.positions = vector_from_json(j.at("positions_m"), "positions_m");
    rec.dwell_times = vector_from_json(j.at("dwell_s"), "dwell_s");
    rec.counts = ivector_from_json(j.at("counts"), "counts");
    rec.timestamp_offsets =
        vector_from_json(j.at("timestamp_offsets_s"), "timestamp_offsets_s");
  } catch (const json::exception& e) {
    throw FormatError(std::string("fringe scan record: ") + e.what());
  }
  rec.validate();
  return rec;
}

}  // namespace

std::string to_json(const FringeDataset& ds) {
  json j;
  j["type"] = "fringe_dataset";
  j["seed"] = ds.seed;
  j["config_digest"] = ds.config_digest;
  json scans = json::array();
  for (const auto& rec : ds.scans) {
    json s = scan_to_json(rec);
    s["config_digest"] = rec.config_digest;
    scans.push_back(std::move(s));
  }
  j["scans"] = std::move(scans);
  return j.dump(2) + "\n";
}

FringeDataset fringe_dataset_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("JSON parse error at byte ") +
                      std::to_string(e.byte) + ": " + e.what());
  }
  FringeDataset ds;
  try {
    if (j.at("type").get<std::string>() != "fringe_dataset")
      throw FormatError("expected a fringe_dataset document");
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.config_digest = j.value("config_digest", std::string());
    for (const auto& s : j.at("scans")) {
      FringeScanRecord rec = scan_from_json(s);
      rec.config_digest = s.value("config_digest", std::string());
      ds.scans.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("fringe dataset: ") + e.what());
  }
  return ds;
}

std::string to_json(const TofTrace& trace) {
  json j;
  j["type"] = "tof_trace";
  j["seed"] = trace.seed;
  j["config_digest"] = trace.config_digest;
  j["bin_edges_s"] = vector_to_json(trace.bin_edges);
  j["counts"] = vector_to_json(trace.counts);
  j["chopper_open_s"] = trace.chopper_open;
  j["flight_path_m"] = trace.flight_path;
  j["entrance_voltage_v"] = trace.entrance_voltage;
  j["mass_setting_kg"] = trace.mass_setting;
  return j.dump(2) + "\n";
}

TofTrace tof_trace_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("JSON parse error at byte ") +
                      std::to_string(e.byte) + ": " + e.what());
  }
  TofTrace trace;
  try {
    if (j.at("type").get<std::string>() != "tof_trace")
      throw FormatError("expected a tof_trace document");
    trace.seed = j.at("seed").get<std::uint64_t>();
    trace.config_digest = j.value("config_digest", std::string());
    trace.bin_edges = vector_from_json(j.at("bin_edges_s"), "bin_edges_s");
    trace.counts = ivector_from_json(j.at("counts"), "counts");
    trace.chopper_open = j.at("chopper_open_s").get<double>();
    trace.flight_path = j.at("flight_path_m").get<double>();
    trace.entrance_voltage = j.at("entrance_voltage_v").get<double>();
    trace.mass_setting = j.at("mass_setting_kg").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("tof trace: ") + e.what());
  }
  trace.validate();
  return trace;
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ValidationError("csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace tltk
