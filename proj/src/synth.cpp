#include "tltk/synth.hpp"

#include <cmath>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"
#include "tltk/rng.hpp"

namespace tltk {

namespace con = constants;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // Distinct odd multiplier keeps sub-streams disjoint from in-stream counters.
  return mix64(base + (index + 1) * 0xD1342543DE82EF95ull);
}

FringeScanRecord synth_fringe_scan(const FringeTruth& truth,
                                   const ScanProtocol& protocol,
                                   const std::array<double, 3>& powers,
                                   double mass_setting, std::uint64_t seed) {
  if (protocol.points < 1)
    throw ValidationError("synth_fringe_scan: need at least one point");
  if (!(protocol.step > 0.0) || !(protocol.dwell > 0.0))
    throw ValidationError("synth_fringe_scan: step and dwell must be > 0");
  if (truth.visibility < 0.0 || truth.visibility > 1.0)
    throw ValidationError("synth_fringe_scan: visibility must lie in [0, 1]");
  if (truth.rate0 < 0.0 || truth.dark_rate < 0.0)
    throw ValidationError("synth_fringe_scan: rates must be >= 0");

  RandomStream rng(seed);
  FringeScanRecord rec;
  const int n = protocol.points;
  rec.positions.resize(n);
  rec.dwell_times.resize(n);
  rec.counts.resize(n);
  rec.timestamp_offsets.resize(n);
  rec.powers = powers;
  rec.mass_setting = mass_setting;
  rec.seed = seed;

  const double d = truth.period;
  const double xbar = rng.next_unit() * d;
  for (int i = 0; i < n; ++i) {
    const double x = protocol.x_start + i * protocol.step;
    const double t = i * protocol.dwell;
    const double phase =
        2.0 * con::pi * (x - xbar - truth.drift_rate * t) / d;
    const double rate =
        truth.rate0 * (1.0 + truth.visibility * std::cos(phase)) +
        truth.dark_rate;
    rec.positions(i) = x;
    rec.dwell_times(i) = protocol.dwell;
    rec.timestamp_offsets(i) = t;
    rec.counts(i) = rng.next_poisson(protocol.dwell * rate);
  }
  return rec;
}

FringeDataset synth_fringe_dataset(const FringeTruth& truth,
                                   const ScanProtocol& protocol,
                                   const std::array<double, 3>& powers,
                                   double mass_setting, int n_scans,
                                   std::int64_t total_points,
                                   std::uint64_t seed) {
  if (n_scans < 1)
    throw ValidationError("synth_fringe_dataset: need at least one scan");
  const std::int64_t full =
      static_cast<std::int64_t>(n_scans) * protocol.points;
  if (total_points <= 0) total_points = full;
  if (total_points > full || total_points <= full - protocol.points)
    throw ValidationError(
        "synth_fringe_dataset: total_points must trim only the last scan");
  FringeDataset ds;
  ds.seed = seed;
  ds.scans.reserve(n_scans);
  std::int64_t remaining = total_points;
  for (int s = 0; s < n_scans; ++s) {
    ScanProtocol p = protocol;
    p.points = static_cast<int>(
        std::min<std::int64_t>(protocol.points, remaining));
    remaining -= p.points;
    ds.scans.push_back(synth_fringe_scan(truth, p, powers, mass_setting,
                                         derive_seed(seed, s)));
  }
  return ds;
}

FringeDataset synth_power_scan(const std::vector<PowerScanTruthPoint>& truth,
                               const FringeTruth& base,
                               const ScanProtocol& protocol,
                               const std::array<double, 3>& base_powers,
                               double mass_setting, int replicas,
                               std::uint64_t seed) {
  if (truth.empty())
    throw ValidationError("synth_power_scan: empty power grid");
  if (replicas < 1)
    throw ValidationError("synth_power_scan: replicas must be >= 1");
  FringeDataset ds;
  ds.seed = seed;
  std::uint64_t index = 0;
  for (int r = 0; r < replicas; ++r) {
    for (const auto& pt : truth) {
      FringeTruth t = base;
      t.visibility = pt.visibility;
      t.rate0 = pt.rate0;
      std::array<double, 3> powers = base_powers;
      powers[1] = pt.p2;
      ds.scans.push_back(synth_fringe_scan(t, protocol, powers, mass_setting,
                                           derive_seed(seed, index++)));
    }
  }
  return ds;
}

TofTrace synth_tof_trace(double v_mean, double v_sigma, double flight_path,
                         double chopper_open, double voltage, double mass,
                         std::int64_t counts_total, int n_bins,
                         std::uint64_t seed, int charge) {
  if (!(v_mean > 0.0) || v_sigma < 0.0)
    throw ValidationError("synth_tof_trace: need v_mean > 0, v_sigma >= 0");
  if (!(flight_path > 0.0) || chopper_open < 0.0 || voltage < 0.0)
    throw ValidationError("synth_tof_trace: non-physical geometry");
  if (!(mass > 0.0) || counts_total < 0 || n_bins < 2 || charge < 0)
    throw ValidationError("synth_tof_trace: non-physical sampling parameters");

  const double boost =
      std::sqrt(2.0 * charge * con::e_charge * voltage / mass);
  const double vp = v_mean + boost;
  const double spread = std::max(v_sigma, 1e-12 * v_mean);
  double t_lo = flight_path / (vp + 8.0 * spread);
  double t_hi = flight_path / std::max(vp - 8.0 * spread, 0.1 * vp) +
                chopper_open;
  if (!(t_hi > t_lo)) {
    t_lo *= 0.99;
    t_hi = t_lo / 0.99 * 1.01;
  }

  TofTrace trace;
  trace.bin_edges = Eigen::VectorXd::LinSpaced(n_bins + 1, t_lo, t_hi);
  trace.counts = Eigen::VectorX<std::int64_t>::Zero(n_bins);
  trace.chopper_open = chopper_open;
  trace.flight_path = flight_path;
  trace.entrance_voltage = voltage;
  trace.mass_setting = mass;
  trace.seed = seed;

  RandomStream rng(seed);
  const double bin_w = (t_hi - t_lo) / n_bins;
  for (std::int64_t i = 0; i < counts_total; ++i) {
    double v = v_mean + v_sigma * rng.next_normal();
    while (v <= 0.0) v = v_mean + v_sigma * rng.next_normal();
    double t = flight_path / (v + boost);
    if (chopper_open > 0.0) t += rng.next_unit() * chopper_open;
    const int j = static_cast<int>(std::floor((t - t_lo) / bin_w));
    if (j >= 0 && j < n_bins) ++trace.counts(j);
  }
  return trace;
}

}  // namespace tltk
