#include "ztn/trainer.hpp"

#include <cmath>
#include <sstream>

#include "ztn/sim.hpp"
#include "ztn/util.hpp"

namespace ztn::rl {

double epsilon_at(const sim::RlParams& rl, long episode) {
  const long decay_episodes = std::max<long>(
      1, static_cast<long>(std::floor(rl.episodes *
                                      rl.epsilon_decay_fraction)));
  if (episode >= decay_episodes) return rl.epsilon_end;
  const double frac = static_cast<double>(episode) / decay_episodes;
  return rl.epsilon_start + (rl.epsilon_end - rl.epsilon_start) * frac;
}

namespace {

// Fresh tables carry a weak prior shaped like the incumbent lookup
// policy (matching MCS, repetition 1, full HARQ budget).  Without it the
// independent heads settle into a high-repetition local optimum: raising
// MCS and repetition together holds BLER constant while dividing
// throughput, and no single-head move escapes that basin.  The prior is
// small against the reward scale, so visited entries overwrite it within
// a few updates; unvisited states fall back to lookup-like behaviour.
FactoredPolicy make_warm_policy(const sim::ScenarioConfig& cfg) {
  auto p = FactoredPolicy::make(cfg.rl.epsilon_start, cfg.rl.alpha,
                                cfg.rl.gamma);
  const double scale = 0.02;
  const auto table = default_lookup_table(cfg.rl.lookup_margin_db);
  const auto edges = BinEdges::defaults();
  for (int sb = 0; sb < kSnrBins; ++sb) {
    // centre of the snr bin (open-ended bins use the adjacent edge +- 2)
    double centre;
    if (sb == 0) centre = edges.snr.front() - 2.0;
    else if (sb == kSnrBins - 1) centre = edges.snr.back() + 2.0;
    else centre = (edges.snr[sb - 1] + edges.snr[sb]) / 2.0;
    const int m0 = lookup_policy(centre, table).mcs;
    for (int bb = 0; bb < kBlerBins; ++bb) {
      const int state = sb * kBlerBins + bb;
      for (int m = 0; m < radio::kNumMcs; ++m)
        p.q_mcs[static_cast<size_t>(state) * radio::kNumMcs + m] =
            -scale * std::abs(m - m0);
      for (int r = 0; r < radio::kNumRepetition; ++r)
        p.q_rep[static_cast<size_t>(state) * radio::kNumRepetition + r] =
            -scale * r;
    }
  }
  const int harq_states = kBlerBins * kLatencyBins * kThroughputBins;
  for (int state = 0; state < harq_states; ++state)
    for (int k = 0; k < radio::kNumHarq; ++k)
      p.q_harq[static_cast<size_t>(state) * radio::kNumHarq + k] =
          -scale * (radio::kNumHarq - 1 - k);
  return p;
}

}  // namespace

TrainResult train(const sim::ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.rl.episodes == 0)
    throw ConfigError("rl.episodes: training schedule has zero episodes");

  TrainResult result;
  for (int i = 0; i < cfg.n_ue; ++i)
    result.policies.push_back(make_warm_policy(cfg));

  const std::uint64_t train_seed = derive_seed(cfg.seed, "train");
  for (long e = 0; e < cfg.rl.episodes; ++e) {
    const double eps = epsilon_at(cfg.rl, e);
    for (auto& p : result.policies) p.epsilon = eps;

    sim::ScenarioConfig ecfg = cfg;
    ecfg.policy = PolicyKind::Learned;
    ecfg.duration_ttis = cfg.rl.episode_ttis;
    ecfg.seed = splitmix64(train_seed + static_cast<std::uint64_t>(e));

    sim::World world(ecfg, std::move(result.policies));
    world.set_training(true);
    double sum_reward = 0.0;
    long n_reward = 0;
    for (long t = 0; t < ecfg.duration_ttis; ++t) {
      auto rep = world.step_tti();
      if (!rep) continue;
      for (double r : rep->reward) {
        sum_reward += r;
        ++n_reward;
      }
    }
    result.policies = std::move(world.policies());
    result.episode_mean_reward.push_back(
        n_reward > 0 ? sum_reward / n_reward : 0.0);
    result.episode_epsilon.push_back(eps);
  }
  for (auto& p : result.policies) p.epsilon = cfg.rl.epsilon_end;
  return result;
}

std::string learning_curve_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "episode,epsilon,mean_reward\n";
  for (size_t e = 0; e < result.episode_mean_reward.size(); ++e) {
    out << e << "," << format_double(result.episode_epsilon[e]) << ","
        << format_double(result.episode_mean_reward[e]) << "\n";
  }
  return out.str();
}

}  // namespace ztn::rl
