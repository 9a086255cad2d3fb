#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Raw data records and their serialized forms. Datasets are JSON documents
// (schema documented in FORMATS.md); tabular curves are RFC-4180 CSV. All
// file writes are atomic (temp file + rename).

namespace tltk {

struct FringeScanRecord {
  Eigen::VectorXd positions;          // x3 stage positions, m
  Eigen::VectorXd dwell_times;        // s
  Eigen::VectorX<std::int64_t> counts;
  std::array<double, 3> powers{};     // grating powers P1..P3, W
  double mass_setting = 0.0;          // kg
  Eigen::VectorXd timestamp_offsets;  // s from scan start
  std::uint64_t seed = 0;
  std::string config_digest;

  void validate() const;  // equal lengths, uniform increasing steps, counts >= 0
};

struct TofTrace {
  Eigen::VectorXd bin_edges;           // s, size n_bins + 1, increasing
  Eigen::VectorX<std::int64_t> counts; // size n_bins
  double chopper_open = 0.0;           // s
  double flight_path = 0.0;            // m
  double entrance_voltage = 0.0;       // V
  double mass_setting = 0.0;           // kg
  std::uint64_t seed = 0;
  std::string config_digest;

  void validate() const;
};

struct FringeDataset {
  std::vector<FringeScanRecord> scans;
  std::string config_digest;
  std::uint64_t seed = 0;
};

// FNV-1a 64-bit digest of a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// Atomic text-file write: writes to "<path>.tmp" then renames.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

std::string read_file(const std::filesystem::path& path);

// JSON (de)serialization. Throws FormatError on malformed input with a byte
// offset where available.
std::string to_json(const FringeDataset& ds);
FringeDataset fringe_dataset_from_json(const std::string& text);
std::string to_json(const TofTrace& trace);
TofTrace tof_trace_from_json(const std::string& text);

// CSV writing: header row plus rows of numeric cells, dot decimal separator,
// CRLF-free line endings, values at full double precision.
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);

}  // namespace tltk
