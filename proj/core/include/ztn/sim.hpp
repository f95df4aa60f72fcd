#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ztn/config.hpp"
#include "ztn/orchestrator.hpp"
#include "ztn/policy.hpp"
#include "ztn/radio.hpp"
#include "ztn/rng.hpp"
#include "ztn/traffic.hpp"

namespace ztn::sim {

// Classification + queueing + PRB scheduling over a fixed packet stream.
// Flows are (re)classified on each arrival from a sliding window of their
// recent packets; a flow with too little history queues as BulkTransfer
// until it can be classified.
class TrafficEngine {
 public:
  TrafficEngine() = default;
  TrafficEngine(std::vector<traffic::PacketEvent> packets,
                traffic::Centroids model, double window_s,
                traffic::SchedulerConfig scheduler, double tti_s);
  // Bypasses online classification with ground-truth labels.
  TrafficEngine(std::vector<traffic::PacketEvent> packets,
                std::map<std::uint32_t, traffic::ServiceClass> truth,
                traffic::SchedulerConfig scheduler, double tti_s);

  std::vector<traffic::PrbGrant> step(long tti);

  const std::vector<traffic::QueuedPacket>& enqueued() const {
    return enqueued_;
  }
  const std::vector<traffic::PrbGrant>& grants() const { return grants_; }
  size_t packets_total() const { return packets_.size(); }
  size_t queued_now() const { return queues_.total_size(); }
  traffic::LatencyReport report() const;

  void serialize(std::ostream& out) const;
  void restore(std::istream& in);

 private:
  // Fixed over a run (rebuilt on restore):
  std::vector<traffic::PacketEvent> packets_;
  traffic::Centroids model_;
  double window_s_ = 1.0;
  traffic::SchedulerConfig scheduler_;
  double tti_s_ = 1e-3;
  bool use_truth_ = false;
  std::map<std::uint32_t, traffic::ServiceClass> truth_;
  // Dynamic:
  size_t next_idx_ = 0;
  traffic::ClassQueues queues_;
  std::vector<traffic::QueuedPacket> enqueued_;
  std::vector<traffic::PrbGrant> grants_;
  std::map<std::uint32_t, std::deque<traffic::PacketEvent>> windows_;
  std::map<std::uint32_t, traffic::ServiceClass> flow_class_;
};

struct UeSummary {
  double mean_snr_db = 0.0;
  double mean_bler = 0.0;
  double mean_latency_ms = 0.0;
  double mean_throughput_kbps = 0.0;
  long blocks_delivered = 0;
  long blocks_attempted = 0;
  double mean_reward = 0.0;
};

struct ScenarioSummary {
  std::vector<UeSummary> per_ue;
  traffic::LatencyReport traffic_latency{};
  long total_grants = 0;
  long total_packets = 0;
  // Across-UE means of the per-UE means.
  double mean_bler = 0.0;
  double mean_throughput_kbps = 0.0;
  double mean_latency_ms = 0.0;
};

// Deterministic TTI-stepped world.  Per step, in order: mobility,
// shadowing, traffic arrivals + PRB scheduling, per-link transmission
// outcomes, KPI accumulation, and on each report boundary the agent
// action refresh (the in-simulator E2 exchange: KPI report up, TxConfig
// down).
class World {
 public:
  explicit World(const ScenarioConfig& cfg,
                 std::vector<rl::FactoredPolicy> policies = {});

  struct Report {
    long tti = 0;
    std::vector<radio::LinkKpi> kpi;
    std::vector<rl::StateBin> state;
    std::vector<double> reward;
    std::vector<radio::TxConfig> action;
    std::array<traffic::ClassLatencyStats, traffic::kNumClasses>
        period_traffic{};
    long period_grants = 0;
  };

  // Advances one TTI; returns the KPI report on period boundaries.
  std::optional<Report> step_tti();

  // In training mode the report boundary also applies the Q update and
  // epsilon-greedy action selection; evaluation is greedy and read-only.
  void set_training(bool on) { training_ = on; }

  long tti() const { return tti_; }
  int n_ue() const { return cfg_.n_ue; }
  const ScenarioConfig& config() const { return cfg_; }
  std::vector<rl::FactoredPolicy>& policies() { return policies_; }
  const radio::Pose& pose(int ue) const { return ues_[ue].pose; }
  double shadow_db(int ue) const { return ues_[ue].shadow_db; }
  const radio::TxConfig& action(int ue) const { return ues_[ue].action; }
  double link_snr_db(int ue) const;
  const TrafficEngine& traffic_engine() const { return traffic_; }
  const orch::Orchestrator& orchestrator() const { return orch_; }

  ScenarioSummary summary() const;

  // Dynamic state only; a checkpoint is valid for the (config, policies)
  // pair that produced it.
  std::string serialize() const;
  void restore(const std::string& checkpoint);
  std::uint64_t state_hash() const;

 private:
  struct UeState {
    radio::Pose pose;
    double shadow_db = 0.0;
    radio::TxConfig action;
    rl::StateBin last_state;
    bool has_state = false;
    // Period accumulators (reset each KPI report).
    double p_snr = 0, p_bler = 0, p_lat = 0, p_thr = 0;
    long p_n = 0;
    // Run accumulators.
    double r_snr = 0, r_bler = 0, r_lat = 0, r_thr = 0;
    long r_n = 0;
    long delivered = 0, attempted = 0;
    double sum_reward = 0;
    long n_reward = 0;
  };

  radio::Pose ap_position(int ue) const;
  Report make_report();

  ScenarioConfig cfg_;
  rl::BinEdges edges_ = rl::BinEdges::defaults();
  rl::LookupTable lookup_{};
  std::vector<rl::FactoredPolicy> policies_;
  bool training_ = false;

  Rng rng_mobility_, rng_shadowing_, rng_traffic_, rng_policy_, rng_harq_,
      rng_classifier_;
  long tti_ = 0;
  std::vector<UeState> ues_;
  TrafficEngine traffic_;
  size_t reported_grants_ = 0; // grants already covered by a report
  orch::Orchestrator orch_;
};

struct RunResult {
  std::vector<World::Report> frames;
  ScenarioSummary summary;
  std::uint64_t final_hash = 0;
};

RunResult run_scenario(const ScenarioConfig& cfg,
                       std::vector<rl::FactoredPolicy> policies = {});

struct ComparisonRow {
  rl::PolicyKind policy = rl::PolicyKind::Random;
  std::uint64_t seed = 0;
  double mean_bler = 0.0;
  double mean_throughput_kbps = 0.0;
  double mean_latency_ms = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  // policy -> seeds on which it strictly beat every other policy.
  std::map<rl::PolicyKind, int> wins_bler, wins_throughput, wins_latency;
};

// Runs every (policy, seed) pair on the base scenario.  Learned rows use
// the supplied per-UE policies.
ComparisonTable compare_policies(const ScenarioConfig& base,
                                 const std::vector<rl::PolicyKind>& kinds,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::vector<rl::FactoredPolicy>&
                                     learned = {});

// Steering-only harness over a packet stream (no radio loop).
struct SteerResult {
  traffic::LatencyReport report{};
  long grants = 0;
  long packets = 0;
};

SteerResult run_steering(const std::vector<traffic::PacketEvent>& packets,
                         const traffic::Centroids& model,
                         const traffic::SchedulerConfig& scheduler,
                         double window_s, double tti_s, long duration_ttis);

// Same loop with ground-truth flow labels instead of a classifier.
SteerResult run_steering_truth(
    const std::vector<traffic::PacketEvent>& packets,
    const std::map<std::uint32_t, traffic::ServiceClass>& truth,
    const traffic::SchedulerConfig& scheduler, double tti_s,
    long duration_ttis);

// Fits the classifier on synthetic labeled flows drawn from the given
// stream (train_flows flows per class, 2 s each).
traffic::Centroids fit_scenario_classifier(int train_flows_per_class,
                                           Rng& rng);

std::string link_metrics_csv(const std::vector<World::Report>& frames);
std::string traffic_metrics_csv(const std::vector<World::Report>& frames);
std::string summary_link_csv(const ScenarioSummary& summary);
std::string comparison_csv(const ComparisonTable& table);
std::string comparison_wins_csv(const ComparisonTable& table);

}  // namespace ztn::sim
