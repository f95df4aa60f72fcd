#pragma once

#include <array>
#include <cstddef>

#include "ztn/rng.hpp"

namespace ztn::radio {

inline constexpr int kNumMcs = 12;
inline constexpr std::array<int, 8> kRepetitionOptions = {1, 2, 3, 4,
                                                          6, 8, 16, 32};
inline constexpr int kNumRepetition =
    static_cast<int>(kRepetitionOptions.size());
inline constexpr int kNumHarq = 6;  // harq_max_retx in [0, 5]
inline constexpr int kNumJointActions = kNumMcs * kNumRepetition * kNumHarq;
static_assert(kNumJointActions == 576);

struct Pose {
  double x = 0.0;       // m
  double y = 0.0;       // m
  double heading = 0.0; // rad, [0, 2*pi)
  double speed = 0.0;   // m/s
};

struct FieldRect {
  double width = 50.0;  // m
  double height = 50.0; // m
  double diagonal() const;
};

// One transmitter configuration; repetition is stored as an index into
// kRepetitionOptions so the joint action space is a dense 12 x 8 x 6 grid.
struct TxConfig {
  int mcs = 0;            // [0, 11]
  int repetition_idx = 0; // [0, 7]
  int harq_max_retx = 0;  // [0, 5]

  int repetition() const { return kRepetitionOptions[repetition_idx]; }
  friend bool operator==(const TxConfig&, const TxConfig&) = default;
};

// Periodic per-link report.
struct LinkKpi {
  double snr_db = 0.0;
  double bler = 0.0;           // [0, 1]
  double latency_ms = 0.0;     // >= 0
  double throughput_kbps = 0.0;// >= 0
};

// Logistic link abstraction: per-MCS SNR threshold at which BLER = 0.5,
// common slope, AR(1) log-normal shadowing.
struct BlerModel {
  double slope = 1.0; // 1/dB, > 0
  std::array<double, kNumMcs> thresholds = default_thresholds();
  double shadowing_sigma = 3.0; // dB
  double shadowing_rho = 0.95;  // [0, 1)

  static std::array<double, kNumMcs> default_thresholds(); // -5 + 2m dB
  bool valid() const;
};

// 25*(m+1) kbps per PRB.
std::array<double, kNumMcs> default_rate_table();

// PL = 40 + 30*log10(max(d, 1 m)).
double path_loss_db(double distance_m);

double snr_db(double tx_power_dbm, double path_loss_db, double shadow_db,
              double noise_floor_dbm);

// Ideal repetition combining gain: snr + 10*log10(r).
double effective_snr_db(double snr_db, int repetition);

// Per-attempt block error probability, strictly decreasing in eff_snr,
// non-decreasing in mcs.
double bler(double eff_snr_db, int mcs, const BlerModel& model);

struct HarqStats {
  double expected_transmissions = 1.0;
  double residual_bler = 0.0;
};

// Closed form for i.i.d. attempts with per-attempt failure p and at most
// max_retx retransmissions (max_retx+1 attempts total).
HarqStats harq_stats(double p, int max_retx);

double link_throughput_kbps(int mcs, int repetition, double residual_bler,
                            int prbs,
                            const std::array<double, kNumMcs>& rate_table);

// Random-direction mobility: advance along heading, reflect at the field
// boundary, resample heading with probability turn_rate*dt.
Pose step_pose(const Pose& pose, double dt, const FieldRect& field,
               double turn_rate_per_s, Rng& rng);

// AR(1) shadowing step with stationary std sigma.
double sample_shadowing(double prev_db, const BlerModel& model, Rng& rng);

}  // namespace ztn::radio
