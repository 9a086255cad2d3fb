#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>

#include "tltk/analysis.hpp"
#include "tltk/constants.hpp"
#include "tltk/rng.hpp"
#include "tltk/synth.hpp"

using namespace tltk;
namespace kc = tltk::constants;

TEST_CASE("counter stream reproduces the splitmix64 reference sequence") {
  // Published splitmix64 outputs for the given seeds.
  const std::uint64_t want0[4] = {0xe220a8397b1dcdafULL, 0x6e789e6aa1b965f4ULL,
                                  0x06c45d188009454fULL, 0xf88bb8a8724c81ecULL};
  const std::uint64_t want1[4] = {0x599ed017fb08fc85ULL, 0x2c73f08458540fa5ULL,
                                  0x883ebce5a3f27c77ULL, 0x3fbef740e9177b3fULL};
  RandomStream s0(0), s1(1234567);
  for (int i = 0; i < 4; ++i) {
    CHECK(s0.next_u64() == want0[i]);
    CHECK(s1.next_u64() == want1[i]);
  }
}

TEST_CASE("unit variates live in (0, 1] and have the right mean") {
  RandomStream s(77);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = s.next_unit();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal variates match Gaussian moments") {
  RandomStream s(91);
  const int n = 100000;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = s.next_normal();
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  CHECK(std::abs(m1) < 0.02);
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(m3) < 0.06);
}

TEST_CASE("Poisson variates match moments in both sampler branches") {
  for (double lambda : {4.5, 120.0}) {
    RandomStream s(lambda < 30 ? 11 : 13);
    const int n = 100000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
      std::int64_t k = s.next_poisson(lambda);
      CHECK(k >= 0);
      m1 += static_cast<double>(k);
      m2 += static_cast<double>(k) * static_cast<double>(k);
    }
    m1 /= n;
    m2 = m2 / n - m1 * m1;
    CHECK(m1 == doctest::Approx(lambda).epsilon(0.02));
    CHECK(m2 == doctest::Approx(lambda).epsilon(0.05));
  }
  RandomStream s(5);
  CHECK(s.next_poisson(0.0) == 0);
}

TEST_CASE("fringe scans are deterministic and carry the protocol") {
  FringeTruth truth{.visibility = 0.11,
                    .rate0 = 120.0,
                    .dark_rate = 30.0,
                    .period = 133e-9,
                    .drift_rate = 0.0};
  ScanProtocol protocol;
  FringeScanRecord a = synth_fringe_scan(truth, protocol, {1e-3, 2e-3, 3e-3},
                                         170.0 * kc::kDa, 555);
  FringeScanRecord b = synth_fringe_scan(truth, protocol, {1e-3, 2e-3, 3e-3},
                                         170.0 * kc::kDa, 555);
  FringeScanRecord c = synth_fringe_scan(truth, protocol, {1e-3, 2e-3, 3e-3},
                                         170.0 * kc::kDa, 556);
  REQUIRE(a.counts.size() == protocol.points);
  CHECK((a.counts.array() == b.counts.array()).all());
  CHECK_FALSE((a.counts.array() == c.counts.array()).all());
  a.validate();
  CHECK(a.positions[0] == doctest::Approx(0.0));
  CHECK(a.positions[1] - a.positions[0] == doctest::Approx(15e-9));
  CHECK(a.dwell_times.minCoeff() == doctest::Approx(4.0));
  CHECK(a.seed == 555);
  CHECK(a.powers[1] == doctest::Approx(2e-3));
  for (int i = 0; i < a.counts.size(); ++i) CHECK(a.counts[i] >= 0);
}

TEST_CASE("high-count fringe scans reproduce the generating visibility") {
  FringeTruth truth{.visibility = 0.11,
                    .rate0 = 2e5,
                    .dark_rate = 0.0,
                    .period = 133e-9,
                    .drift_rate = 0.0};
  ScanProtocol protocol;
  protocol.dwell = 1.0;
  FringeScanRecord scan =
      synth_fringe_scan(truth, protocol, {0, 0, 0}, 170.0 * kc::kDa, 321);
  FringeFit fit = fit_fringe(scan, truth.period);
  CHECK(fit.visibility == doctest::Approx(0.11).epsilon(0.01));
  CHECK(fit.offset == doctest::Approx(2e5).epsilon(0.01));
}

TEST_CASE("datasets split the requested points across derived seeds") {
  FringeTruth truth{.visibility = 0.10,
                    .rate0 = 120.0,
                    .dark_rate = 30.0,
                    .period = 133e-9,
                    .drift_rate = 0.0};
  ScanProtocol protocol;
  FringeDataset ds = synth_fringe_dataset(truth, protocol, {0, 0, 0},
                                          170.0 * kc::kDa, 65, 3895, 99);
  REQUIRE(ds.scans.size() == 65);
  std::int64_t total = 0;
  std::set<std::uint64_t> seeds;
  for (const auto& scan : ds.scans) {
    total += scan.counts.size();
    seeds.insert(scan.seed);
    scan.validate();
  }
  CHECK(total == 3895);
  CHECK(ds.scans.back().counts.size() == 55);
  CHECK(seeds.size() == 65);  // distinct per-record streams
  CHECK(ds.seed == 99);
  // Derived seeds are reproducible.
  CHECK(ds.scans[3].seed == derive_seed(99, 3));
}

TEST_CASE("power scans vary only the central grating power") {
  std::vector<PowerScanTruthPoint> truth = {
      {0.0, 0.0, 120.0}, {10e-3, 0.08, 100.0}, {20e-3, 0.05, 80.0}};
  FringeTruth base{.visibility = 0.0,
                   .rate0 = 120.0,
                   .dark_rate = 30.0,
                   .period = 133e-9,
                   .drift_rate = 0.0};
  ScanProtocol protocol;
  FringeDataset ds = synth_power_scan(truth, base, protocol,
                                      {62e-3, 15.2e-3, 68e-3},
                                      170.0 * kc::kDa, 2, 4321);
  REQUIRE(ds.scans.size() == 6);
  for (std::size_t i = 0; i < ds.scans.size(); ++i) {
    const auto& scan = ds.scans[i];
    CHECK(scan.powers[0] == doctest::Approx(62e-3));
    CHECK(scan.powers[2] == doctest::Approx(68e-3));
    CHECK(scan.powers[1] == doctest::Approx(truth[i % truth.size()].p2));
  }
}

TEST_CASE("time-of-flight traces bin every count and stay reproducible") {
  TofTrace a = synth_tof_trace(160.0, 10.0, 2.0, 5e-4, 100.0, 170.0 * kc::kDa,
                               20000, 240, 31);
  TofTrace b = synth_tof_trace(160.0, 10.0, 2.0, 5e-4, 100.0, 170.0 * kc::kDa,
                               20000, 240, 31);
  a.validate();
  REQUIRE(a.counts.size() == 240);
  REQUIRE(a.bin_edges.size() == 241);
  CHECK(a.counts.sum() == 20000);
  CHECK((a.counts.array() == b.counts.array()).all());
  for (int i = 1; i < a.bin_edges.size(); ++i)
    CHECK(a.bin_edges[i] > a.bin_edges[i - 1]);
  // The acceleration stage shifts arrivals to earlier times than path/v.
  double t_peak = 0.0;
  std::int64_t best = -1;
  for (int i = 0; i < a.counts.size(); ++i)
    if (a.counts[i] > best) {
      best = a.counts[i];
      t_peak = 0.5 * (a.bin_edges[i] + a.bin_edges[i + 1]);
    }
  CHECK(t_peak < 2.0 / 160.0);
  // Expected arrival: flight path over the boosted speed, plus half the
  // chopper window for the uniform emission offset.
  double v_boost = std::sqrt(2.0 * kc::e_charge * 100.0 / (170.0 * kc::kDa));
  double expected = 2.0 / (160.0 + v_boost) + 0.5 * 5e-4;
  CHECK(t_peak == doctest::Approx(expected).epsilon(0.05));
}
