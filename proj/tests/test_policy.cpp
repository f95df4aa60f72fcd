#include "ztn/policy.hpp"

#include <cmath>
#include <map>

#include "doctest.h"
#include "ztn/util.hpp"

using namespace ztn;
using namespace ztn::rl;

TEST_CASE("quantize: half-open bins, count of edges <= value") {
  const auto edges = BinEdges::defaults();
  radio::LinkKpi kpi;
  kpi.snr_db = -100.0;
  CHECK(quantize(kpi, edges).snr == 0); // below first edge
  kpi.snr_db = -16.0;                   // exactly on an edge -> right bin
  CHECK(quantize(kpi, edges).snr == 1);
  kpi.snr_db = 12.3; // edges every 4 dB starting at -16
  CHECK(quantize(kpi, edges).snr == 8);
  kpi.snr_db = 1000.0;
  CHECK(quantize(kpi, edges).snr == kSnrBins - 1);

  kpi.bler = 0.0;
  CHECK(quantize(kpi, edges).bler == 0);
  kpi.bler = 1.0;
  CHECK(quantize(kpi, edges).bler == kBlerBins - 1);
  kpi.bler = 0.125; // on edge
  CHECK(quantize(kpi, edges).bler == 1);
}

TEST_CASE("select_action: greedy argmax with lowest-index tie break") {
  auto p = FactoredPolicy::make(0.0, 0.1, 0.9);
  StateBin s{3, 2, 1, 4};
  // all-zero Q -> (0, 0, 0)
  const auto a0 = greedy_action(p, s);
  CHECK(a0.mcs == 0);
  CHECK(a0.repetition_idx == 0);
  CHECK(a0.harq_max_retx == 0);

  const int ms = FactoredPolicy::mcs_state(s);
  const int hs = FactoredPolicy::harq_state(s);
  p.q_mcs[ms * radio::kNumMcs + 7] = 1.0;
  p.q_rep[ms * radio::kNumRepetition + 3] = 2.0;
  p.q_harq[hs * radio::kNumHarq + 5] = 0.5;
  const auto a = greedy_action(p, s);
  CHECK(a.mcs == 7);
  CHECK(a.repetition_idx == 3);
  CHECK(a.harq_max_retx == 5);

  Rng rng(1);
  CHECK(select_action(p, s, rng) == a); // epsilon = 0 matches greedy

  // positive scaling of a head leaves the greedy action unchanged
  for (auto& v : p.q_mcs) v *= 42.5;
  CHECK(greedy_action(p, s).mcs == 7);
}

TEST_CASE("select_action: epsilon = 1 is uniform over the joint space") {
  auto p = FactoredPolicy::make(1.0, 0.1, 0.9);
  StateBin s{0, 0, 0, 0};
  Rng rng(123);
  std::map<int, long> joint_counts;
  std::array<long, radio::kNumMcs> mcs_counts{};
  const long n = 200000;
  for (long i = 0; i < n; ++i) {
    const auto a = select_action(p, s, rng);
    const int joint =
        (a.mcs * radio::kNumRepetition + a.repetition_idx) * radio::kNumHarq +
        a.harq_max_retx;
    joint_counts[joint]++;
    mcs_counts[a.mcs]++;
  }
  CHECK(joint_counts.size() == 576); // full support
  for (int m = 0; m < radio::kNumMcs; ++m) {
    const double freq = static_cast<double>(mcs_counts[m]) / n;
    CHECK(freq == doctest::Approx(1.0 / 12).epsilon(0.05));
  }
}

TEST_CASE("reward: default is -bler, composite formula") {
  RewardWeights defaults;
  CHECK(reward_normalized(0.0, 0.0, 0.0, defaults) == doctest::Approx(0.0));
  CHECK(reward_normalized(1.0, 0.9, 0.9, defaults) == doctest::Approx(-1.0));
  RewardWeights w{1.0, 0.5, 0.5};
  CHECK(reward_normalized(0.2, 0.5, 0.4, w) == doctest::Approx(-0.25));

  radio::LinkKpi kpi;
  kpi.bler = 0.2;
  kpi.latency_ms = 5.0;        // norm 10 -> 0.5
  kpi.throughput_kbps = 120.0; // norm 300 -> 0.4
  KpiNorms norms;
  CHECK(reward(kpi, w, norms) == doctest::Approx(-0.25));
  // normalized terms clamp at 1
  kpi.latency_ms = 1e9;
  CHECK(reward(kpi, w, norms) == doctest::Approx(-0.2 - 0.5 + 0.2));
}

TEST_CASE("q_update: TD step and single-entry change per head") {
  auto p = FactoredPolicy::make(0.1, 0.5, 0.9);
  StateBin s{1, 1, 1, 1};
  StateBin s2{2, 2, 2, 2};
  radio::TxConfig a{4, 2, 3};

  auto before = p;
  p.alpha = 0.0;
  q_update(p, s, a, 5.0, s2);
  CHECK(p.q_mcs == before.q_mcs); // alpha = 0 -> unchanged
  CHECK(p.q_rep == before.q_rep);
  CHECK(p.q_harq == before.q_harq);

  p.alpha = 0.5;
  q_update(p, s, a, 1.0, s2); // next-state maxima are all 0
  const int ms = FactoredPolicy::mcs_state(s);
  const int hs = FactoredPolicy::harq_state(s);
  CHECK(p.q_mcs[ms * radio::kNumMcs + 4] == doctest::Approx(0.5));
  CHECK(p.q_rep[ms * radio::kNumRepetition + 2] == doctest::Approx(0.5));
  CHECK(p.q_harq[hs * radio::kNumHarq + 3] == doctest::Approx(0.5));

  int mcs_changed = 0, rep_changed = 0, harq_changed = 0;
  for (size_t i = 0; i < p.q_mcs.size(); ++i)
    if (p.q_mcs[i] != before.q_mcs[i]) ++mcs_changed;
  for (size_t i = 0; i < p.q_rep.size(); ++i)
    if (p.q_rep[i] != before.q_rep[i]) ++rep_changed;
  for (size_t i = 0; i < p.q_harq.size(); ++i)
    if (p.q_harq[i] != before.q_harq[i]) ++harq_changed;
  CHECK(mcs_changed == 1);
  CHECK(rep_changed == 1);
  CHECK(harq_changed == 1);
}

TEST_CASE("q_update: gamma = 0 converges geometrically to r") {
  auto p = FactoredPolicy::make(0.0, 0.1, 0.0);
  StateBin s{0, 0, 0, 0};
  radio::TxConfig a{0, 0, 0};
  for (int i = 0; i < 500; ++i) q_update(p, s, a, -0.3, s);
  CHECK(p.q_mcs[0] == doctest::Approx(-0.3).epsilon(1e-6));
}

TEST_CASE("lookup policy: floor, ceiling, inclusive threshold") {
  const auto table = default_lookup_table(0.0); // thresholds -5 + 2m
  CHECK(lookup_policy(-100.0, table).mcs == 0);
  CHECK(lookup_policy(100.0, table).mcs == 11);
  CHECK(lookup_policy(3.0, table).mcs == 4); // exactly at threshold of MCS 4
  const auto a = lookup_policy(10.0, table);
  CHECK(a.repetition() == 1);
  CHECK(a.harq_max_retx == 5);
}

TEST_CASE("random policy: uniform marginals and reproducibility") {
  Rng rng(42);
  std::array<long, radio::kNumMcs> mcs{};
  std::array<long, radio::kNumRepetition> rep{};
  std::array<long, radio::kNumHarq> harq{};
  std::map<int, long> joint;
  const long n = 1'000'000;
  for (long i = 0; i < n; ++i) {
    const auto a = random_policy(rng);
    mcs[a.mcs]++;
    rep[a.repetition_idx]++;
    harq[a.harq_max_retx]++;
    joint[(a.mcs * 8 + a.repetition_idx) * 6 + a.harq_max_retx]++;
  }
  for (long c : mcs)
    CHECK(static_cast<double>(c) / n ==
          doctest::Approx(1.0 / 12).epsilon(0.01));
  for (long c : rep)
    CHECK(static_cast<double>(c) / n == doctest::Approx(1.0 / 8).epsilon(0.01));
  for (long c : harq)
    CHECK(static_cast<double>(c) / n == doctest::Approx(1.0 / 6).epsilon(0.01));
  CHECK(joint.size() == 576);

  Rng r1(7), r2(7);
  for (int i = 0; i < 100; ++i) CHECK(random_policy(r1) == random_policy(r2));
}

TEST_CASE("policy serialization: bit-exact round trip") {
  auto p = FactoredPolicy::make(0.137, 0.1, 0.9);
  Rng rng(3);
  for (auto& v : p.q_mcs)
    if (uniform01(rng) < 0.2) v = uniform(rng, -10.0, 10.0);
  for (auto& v : p.q_rep)
    if (uniform01(rng) < 0.2) v = uniform(rng, -1e-9, 1e-9);
  for (auto& v : p.q_harq)
    if (uniform01(rng) < 0.2) v = uniform(rng, -1e6, 1e6);
  const std::string text = save_policy(p);
  const auto q = load_policy(text);
  CHECK(q.epsilon == p.epsilon);
  CHECK(q.alpha == p.alpha);
  CHECK(q.gamma == p.gamma);
  CHECK(q.q_mcs == p.q_mcs);   // exact, not approximate
  CHECK(q.q_rep == p.q_rep);
  CHECK(q.q_harq == p.q_harq);
  CHECK(save_policy(q) == text);

  CHECK_THROWS_AS(load_policy("not a policy\n"), ParseError);
  CHECK_THROWS_AS(load_policy("ztn-policy v1\nq mcs 99999 0 1.0\n"),
                  ParseError);
}
