#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tltk/records.hpp"

// Synthetic raw-data generators. Each record carries its own seed; the
// derived per-record streams make datasets reproducible bit-for-bit within
// this implementation.

namespace tltk {

struct ScanProtocol {
  int points = 60;
  double step = 15e-9;   // m
  double dwell = 4.0;    // s per point
  double x_start = 0.0;  // m
};

struct FringeTruth {
  double visibility = 0.0;  // ground-truth fringe visibility
  double rate0 = 120.0;     // modulated rate r0, counts/s
  double dark_rate = 30.0;  // counts/s
  double period = 133e-9;   // m
  double drift_rate = 0.0;  // fringe drift, m/s (configured in nm/h)
};

// Derives the seed of sub-stream `index` from a dataset seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// One fringe scan: counts ~ Poisson(T (r0 [1 + V cos(2 pi (x - xbar -
// drift t)/d)] + dark)). The fringe phase xbar is drawn uniformly over one
// period from the record's stream (first variate), then one Poisson variate
// per point in position order.
FringeScanRecord synth_fringe_scan(const FringeTruth& truth,
                                   const ScanProtocol& protocol,
                                   const std::array<double, 3>& powers,
                                   double mass_setting, std::uint64_t seed);

// Dataset of n_scans scans with derived per-record seeds; if total_points is
// positive the last scan is truncated so the dataset holds exactly that many
// points.
FringeDataset synth_fringe_dataset(const FringeTruth& truth,
                                   const ScanProtocol& protocol,
                                   const std::array<double, 3>& powers,
                                   double mass_setting, int n_scans,
                                   std::int64_t total_points,
                                   std::uint64_t seed);

struct PowerScanTruthPoint {
  double p2 = 0.0;          // W
  double visibility = 0.0;  // model visibility at this power
  double rate0 = 0.0;       // transmission-scaled rate, counts/s
};

// One scan record per grid point (replicas > 1 repeats the grid), seeds
// derived per record in emission order.
FringeDataset synth_power_scan(const std::vector<PowerScanTruthPoint>& truth,
                               const FringeTruth& base,
                               const ScanProtocol& protocol,
                               const std::array<double, 3>& base_powers,
                               double mass_setting, int replicas,
                               std::uint64_t seed);

// Time-of-flight trace: per count, v ~ N(v_mean, v_sigma), accelerated to
// v' = v + sqrt(2 q e U / m), arrival = path/v' + uniform chopper offset,
// binned over [path/(v'+8 sigma), path/(v'-8 sigma) + chopper_open].
TofTrace synth_tof_trace(double v_mean, double v_sigma, double flight_path,
                         double chopper_open, double voltage, double mass,
                         std::int64_t counts_total, int n_bins,
                         std::uint64_t seed, int charge = 1);

}  // namespace tltk
