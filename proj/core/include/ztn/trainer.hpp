#pragma once

#include <string>
#include <vector>

#include "ztn/config.hpp"
#include "ztn/policy.hpp"

namespace ztn::rl {

struct TrainResult {
  std::vector<FactoredPolicy> policies; // one per UE
  std::vector<double> episode_mean_reward;
  std::vector<double> episode_epsilon;
};

// Linear decay from epsilon_start to epsilon_end over the first
// epsilon_decay_fraction of episodes, then flat.
double epsilon_at(const sim::RlParams& rl, long episode);

// Runs rl.episodes episodes of rl.episode_ttis TTIs each against the
// scenario world; per-episode geometry and traffic are re-drawn from
// seeds derived from the scenario seed.  Throws ConfigError on a
// zero-episode schedule.
TrainResult train(const sim::ScenarioConfig& cfg);

std::string learning_curve_csv(const TrainResult& result);

}  // namespace ztn::rl
