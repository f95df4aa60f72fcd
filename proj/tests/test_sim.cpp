#include "ztn/sim.hpp"

#include <cmath>

#include "doctest.h"
#include "ztn/trainer.hpp"
#include "ztn/util.hpp"

using namespace ztn;
using namespace ztn::sim;

namespace {
ScenarioConfig small_config() {
  ScenarioConfig cfg;
  cfg.seed = 42;
  cfg.n_ue = 3;
  cfg.duration_ttis = 400;
  cfg.traffic.flows = {1, 1, 0, 1};
  return cfg;
}
}  // namespace

TEST_CASE("config parsing: defaults from a minimal file") {
  const auto cfg = parse_config("[scenario]\nseed = 7\n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.n_ue == 5);
  CHECK(cfg.steering.scheduler.total_prbs == 3);
  CHECK(cfg.steering.scheduler.reserved_prbs == 2);
  CHECK(cfg.tti_ms == doctest::Approx(1.0));
  CHECK(cfg.kpi_report_period_ttis == 10);
  CHECK(cfg.policy == rl::PolicyKind::LookupTable);
  CHECK(cfg.radio.ue_speed_kmh == doctest::Approx(3.0));
  CHECK(cfg.reward.bler == doctest::Approx(1.0));
  CHECK(cfg.reward.throughput == doctest::Approx(0.0));
}

TEST_CASE("config parsing: errors name the key") {
  CHECK_THROWS_WITH_AS(parse_config("[radio]\nbogus = 1\n"),
                       doctest::Contains("radio.bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config("[steering]\ntotal_prbs = 3\nreserved_prbs = 4\n"),
      doctest::Contains("steering.reserved_prbs"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[scenario]\npolicy = sorcery\n"),
                       doctest::Contains("scenario.policy"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("orphan = 1\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[scenario]\nn_ue = five\n"),
                       doctest::Contains("scenario.n_ue"), ConfigError);
  // multiple violations listed together
  try {
    parse_config("[scenario]\nn_ue = 0\ntti_ms = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("scenario.n_ue") != std::string::npos);
    CHECK(msg.find("scenario.tti_ms") != std::string::npos);
  }
}

TEST_CASE("run_scenario: shape, duration 0, and determinism") {
  auto cfg = small_config();
  cfg.duration_ttis = 0;
  const auto empty = run_scenario(cfg);
  CHECK(empty.frames.empty());

  cfg.duration_ttis = 400;
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  CHECK(a.frames.size() == 40); // one frame per report period
  CHECK(a.summary.per_ue.size() == 3);
  CHECK(link_metrics_csv(a.frames) == link_metrics_csv(b.frames));
  CHECK(traffic_metrics_csv(a.frames) == traffic_metrics_csv(b.frames));
  CHECK(summary_link_csv(a.summary) == summary_link_csv(b.summary));
  CHECK(a.final_hash == b.final_hash);

  auto other_seed = cfg;
  other_seed.seed = 43;
  const auto c = run_scenario(other_seed);
  CHECK(a.final_hash != c.final_hash);
}

TEST_CASE("subsystem rng streams are independent") {
  auto cfg = small_config();
  World w1(cfg);
  auto heavier = cfg;
  heavier.traffic.flows = {4, 4, 3, 6};     // different traffic draws
  heavier.seeds.traffic = 999;              // and a different traffic seed
  World w2(heavier);
  for (int t = 0; t < 200; ++t) {
    w1.step_tti();
    w2.step_tti();
    for (int ue = 0; ue < cfg.n_ue; ++ue) {
      CHECK(w1.pose(ue).x == w2.pose(ue).x);
      CHECK(w1.pose(ue).y == w2.pose(ue).y);
      CHECK(w1.shadow_db(ue) == w2.shadow_db(ue));
    }
  }
}

TEST_CASE("speed 0 and zero shadowing freeze the snr trajectory") {
  auto cfg = small_config();
  cfg.radio.ue_speed_kmh = 0.0;
  cfg.radio.bler.shadowing_sigma = 0.0;
  World w(cfg);
  const double snr0 = w.link_snr_db(0);
  for (int t = 0; t < 50; ++t) {
    w.step_tti();
    CHECK(w.link_snr_db(0) == doctest::Approx(snr0));
  }
}

TEST_CASE("fixed snr pins every link") {
  auto cfg = small_config();
  cfg.radio.fixed_snr_db = 7.5;
  World w(cfg);
  w.step_tti();
  for (int ue = 0; ue < cfg.n_ue; ++ue)
    CHECK(w.link_snr_db(ue) == doctest::Approx(7.5));
}

TEST_CASE("checkpoint: restore equals straight-through run") {
  auto cfg = small_config();
  const long half = 200, full = 400;

  World straight(cfg);
  for (long t = 0; t < full; ++t) straight.step_tti();
  const auto straight_hash = straight.state_hash();

  World first(cfg);
  for (long t = 0; t < half; ++t) first.step_tti();
  const std::string checkpoint = first.serialize();

  World resumed(cfg);
  resumed.restore(checkpoint);
  CHECK(resumed.state_hash() == first.state_hash());
  for (long t = half; t < full; ++t) resumed.step_tti();
  CHECK(resumed.state_hash() == straight_hash);

  const auto s1 = straight.summary();
  const auto s2 = resumed.summary();
  CHECK(summary_link_csv(s1) == summary_link_csv(s2));
  CHECK(s1.total_grants == s2.total_grants);

  CHECK_THROWS_AS(resumed.restore("bogus\n"), std::runtime_error);
}

TEST_CASE("grant conservation: served packets equal grants") {
  auto cfg = small_config();
  cfg.traffic.flows = {2, 2, 1, 2};
  const auto r = run_scenario(cfg);
  long served = 0;
  for (const auto& cls : r.summary.traffic_latency) served += cls.served;
  CHECK(served == r.summary.total_grants);
  long backlog = 0;
  for (const auto& cls : r.summary.traffic_latency) backlog += cls.backlog;
  CHECK(served + backlog == r.summary.total_packets);
}

TEST_CASE("compare_policies: identical kinds, errors") {
  auto cfg = small_config();
  cfg.duration_ttis = 200;
  const auto table = compare_policies(
      cfg, {rl::PolicyKind::Random, rl::PolicyKind::Random}, {5});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].mean_bler == table.rows[1].mean_bler);
  CHECK(table.rows[0].mean_throughput_kbps ==
        table.rows[1].mean_throughput_kbps);
  // identical rows -> no strict winner
  CHECK(table.wins_bler.at(rl::PolicyKind::Random) == 0);

  CHECK_THROWS_AS(
      compare_policies(cfg, {rl::PolicyKind::Random}, {1}), ConfigError);
  CHECK_THROWS_AS(compare_policies(
                      cfg, {rl::PolicyKind::Random, rl::PolicyKind::LookupTable},
                      {}),
                  ConfigError);
  CHECK_THROWS_AS(
      compare_policies(
          cfg, {rl::PolicyKind::Learned, rl::PolicyKind::Random}, {1}, {}),
      ConfigError);
}

TEST_CASE("random policy never beats lookup on mean bler") {
  auto cfg = small_config();
  cfg.duration_ttis = 2000;
  cfg.n_ue = 2;
  for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
    cfg.seed = seed;
    auto lookup_cfg = cfg;
    lookup_cfg.policy = rl::PolicyKind::LookupTable;
    auto random_cfg = cfg;
    random_cfg.policy = rl::PolicyKind::Random;
    const auto lookup = run_scenario(lookup_cfg);
    const auto random = run_scenario(random_cfg);
    CHECK(random.summary.mean_bler >= lookup.summary.mean_bler);
  }
}

TEST_CASE("train: zero episodes rejected, curve reproducible") {
  auto cfg = small_config();
  cfg.rl.episodes = 0;
  CHECK_THROWS_AS(rl::train(cfg), ConfigError);

  cfg.rl.episodes = 5;
  cfg.rl.episode_ttis = 100;
  cfg.traffic.flows = {0, 0, 0, 0};
  const auto r1 = rl::train(cfg);
  const auto r2 = rl::train(cfg);
  CHECK(r1.episode_mean_reward == r2.episode_mean_reward);
  CHECK(r1.policies.size() == 3);
  CHECK(rl::save_policy(r1.policies[0]) == rl::save_policy(r2.policies[0]));
  CHECK(learning_curve_csv(r1) == learning_curve_csv(r2));
}

TEST_CASE("epsilon schedule: linear decay then flat") {
  RlParams rl;
  rl.episodes = 100;
  rl.epsilon_start = 1.0;
  rl.epsilon_end = 0.05;
  rl.epsilon_decay_fraction = 0.8;
  CHECK(rl::epsilon_at(rl, 0) == doctest::Approx(1.0));
  CHECK(rl::epsilon_at(rl, 40) == doctest::Approx(1.0 + (0.05 - 1.0) * 0.5));
  CHECK(rl::epsilon_at(rl, 80) == doctest::Approx(0.05));
  CHECK(rl::epsilon_at(rl, 99) == doctest::Approx(0.05));
  double prev = 2.0;
  for (long e = 0; e < 100; ++e) {
    const double eps = rl::epsilon_at(rl, e);
    CHECK(eps <= prev); // monotone decay
    prev = eps;
  }
}

TEST_CASE("train on a stationary channel beats the lookup baseline") {
  ScenarioConfig cfg;
  cfg.seed = 9;
  cfg.n_ue = 1;
  cfg.duration_ttis = 500;
  cfg.radio.fixed_snr_db = 3.0;
  cfg.radio.bler.shadowing_sigma = 0.0;
  cfg.radio.ue_speed_kmh = 0.0;
  cfg.traffic.flows = {0, 0, 0, 0};
  cfg.rl.episodes = 200;
  cfg.rl.episode_ttis = 200;
  cfg.rl.gamma = 0.0;
  const auto trained = rl::train(cfg);

  auto eval = cfg;
  eval.policy = rl::PolicyKind::Learned;
  const auto learned = run_scenario(eval, trained.policies);
  eval.policy = rl::PolicyKind::LookupTable;
  const auto lookup = run_scenario(eval);
  CHECK(learned.summary.mean_bler <= lookup.summary.mean_bler + 1e-12);
}
