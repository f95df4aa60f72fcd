#pragma once

#include <string>
#include <vector>

#include "ztn/radio.hpp"
#include "ztn/rng.hpp"

namespace ztn::rl {

inline constexpr int kSnrBins = 16;
inline constexpr int kBlerBins = 8;
inline constexpr int kLatencyBins = 8;
inline constexpr int kThroughputBins = 8;

// Discretized KPI report.  Bin index = number of edges <= value
// (half-open intervals, values on an edge fall to the right).
struct StateBin {
  int snr = 0;        // [0, 15]
  int bler = 0;       // [0, 7]
  int latency = 0;    // [0, 7]
  int throughput = 0; // [0, 7]
  friend bool operator==(const StateBin&, const StateBin&) = default;
};

struct BinEdges {
  std::vector<double> snr;        // 15 edges, strictly increasing
  std::vector<double> bler;       // 7 edges
  std::vector<double> latency;    // 7 edges, ms
  std::vector<double> throughput; // 7 edges, kbps
  static BinEdges defaults();
  bool valid() const;
};

int bin_index(double value, const std::vector<double>& edges);

StateBin quantize(const radio::LinkKpi& kpi, const BinEdges& edges);

// Three independent action heads sharing one scalar reward.  The MCS and
// repetition heads condition on (SNR, BLER); the HARQ head conditions on
// (BLER, latency, throughput).
struct FactoredPolicy {
  double epsilon = 0.05;
  double alpha = 0.1;
  double gamma = 0.9;
  std::vector<double> q_mcs;  // [kSnrBins*kBlerBins] x kNumMcs
  std::vector<double> q_rep;  // [kSnrBins*kBlerBins] x kNumRepetition
  std::vector<double> q_harq; // [kBlerBins*kLatencyBins*kThroughputBins] x kNumHarq

  static FactoredPolicy make(double epsilon, double alpha, double gamma);

  static int mcs_state(const StateBin& s) { return s.snr * kBlerBins + s.bler; }
  static int harq_state(const StateBin& s) {
    return (s.bler * kLatencyBins + s.latency) * kThroughputBins + s.throughput;
  }

  bool valid() const;
};

enum class PolicyKind { Learned, LookupTable, Random };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& s);

// Per-head epsilon-greedy; greedy ties break to the lowest action index.
// Draw order per head: explore coin, then (only when exploring) the
// uniform action.  Heads are drawn mcs, repetition, harq.
radio::TxConfig select_action(const FactoredPolicy& policy,
                              const StateBin& state, Rng& rng);

// select_action with epsilon = 0; pure function of (policy, state).
radio::TxConfig greedy_action(const FactoredPolicy& policy,
                              const StateBin& state);

struct RewardWeights {
  double bler = 1.0;       // penalty weight on BLER
  double latency = 0.0;    // penalty weight on normalized latency
  double throughput = 0.0; // bonus weight on normalized throughput
};

struct KpiNorms {
  double latency_ms = 10.0;
  double throughput_kbps = 300.0;
};

// r = -w_b*bler - w_l*norm_latency + w_t*norm_throughput, with the
// normalized terms already in [0, 1].
double reward_normalized(double bler, double norm_latency,
                         double norm_throughput, const RewardWeights& w);

// Normalizes the KPI against the configured scales (clamped to [0, 1]).
double reward(const radio::LinkKpi& kpi, const RewardWeights& w,
              const KpiNorms& norms);

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)), applied to each
// head independently with the shared scalar reward.
void q_update(FactoredPolicy& policy, const StateBin& state,
              const radio::TxConfig& action, double r,
              const StateBin& next_state);

// SNR thresholds (dB) per MCS; entry m is the lowest SNR at which the
// table selects MCS m.
using LookupTable = std::array<double, radio::kNumMcs>;

LookupTable default_lookup_table(double margin_db);

// Highest MCS whose threshold <= snr (MCS 0 when below all thresholds),
// repetition 1, harq_max_retx 5.
radio::TxConfig lookup_policy(double snr_db, const LookupTable& table);

// Uniform over the 576 joint actions.
radio::TxConfig random_policy(Rng& rng);

// Flat key-value serialization; zero entries are omitted and the encoding
// round-trips doubles bit-exactly.
std::string save_policy(const FactoredPolicy& policy);
FactoredPolicy load_policy(const std::string& text);
void save_policy_file(const FactoredPolicy& policy, const std::string& path);
FactoredPolicy load_policy_file(const std::string& path);

}  // namespace ztn::rl
