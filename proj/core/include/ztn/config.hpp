#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "ztn/orchestrator.hpp"
#include "ztn/policy.hpp"
#include "ztn/radio.hpp"
#include "ztn/traffic.hpp"

namespace ztn::sim {

struct RadioParams {
  radio::BlerModel bler;
  double tx_power_dbm = 0.0;
  double noise_floor_dbm = -82.0;
  std::array<double, radio::kNumMcs> rate_table = radio::default_rate_table();
  radio::FieldRect field;
  double ap_height_m = 0.0; // AP mount height above the UE plane
  double ue_speed_kmh = 3.0;
  double turn_rate_per_s = 0.2;
  int prbs_per_ue = 1;
  // When finite, bypasses geometry and pins every link's SNR (stationary
  // channel scenarios).
  double fixed_snr_db = std::numeric_limits<double>::quiet_NaN();

  double speed_m_s() const { return ue_speed_kmh / 3.6; }
  bool has_fixed_snr() const { return fixed_snr_db == fixed_snr_db; }
};

struct RlParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.8; // of episodes
  long episodes = 500;
  long episode_ttis = 1000;
  double lookup_margin_db = 2.0;
};

struct SteeringParams {
  traffic::SchedulerConfig scheduler;
  double classifier_window_s = 1.0;
  int classifier_train_flows = 50; // per class
};

struct TrafficParams {
  std::array<int, traffic::kNumClasses> flows = {4, 4, 3, 5};
  std::string trace_file; // when set, steer runs ingest this instead
};

struct OrchestratorParams {
  orch::OrchestratorConfig cfg;
  orch::ResourcePool pool;
  std::string fleet_file;
  std::string tasks_file;
};

struct SeedOverrides {
  std::optional<std::uint64_t> mobility, shadowing, traffic, policy, harq,
      classifier;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int n_ue = 5;
  int n_ap = 1;
  double tti_ms = 1.0;
  long duration_ttis = 60000;
  int kpi_report_period_ttis = 10;
  rl::PolicyKind policy = rl::PolicyKind::LookupTable;

  RadioParams radio;
  RlParams rl;
  rl::RewardWeights reward;
  rl::KpiNorms norms;
  SteeringParams steering;
  TrafficParams traffic;
  OrchestratorParams orchestrator;
  SeedOverrides seeds;

  double tti_s() const { return tti_ms / 1000.0; }
  std::uint64_t stream_seed(std::string_view tag,
                            std::optional<std::uint64_t> override_seed) const;
  // Throws ConfigError listing every violated field.
  void validate() const;
};

// Sectioned key = value text; unknown sections and keys are rejected with
// the offending key path.  Relative file paths resolve against base_dir.
ScenarioConfig parse_config(const std::string& text,
                            const std::string& base_dir = ".");
ScenarioConfig parse_config_file(const std::string& path);

}  // namespace ztn::sim
