#pragma once

// Brute-force reference for schedule_tti, independent of the queue
// implementation: every PRB slot scans the whole flat set of queued
// packets for the eligible minimum under the rule's total order
// (arrival_time, class id, enqueue seq).

#include <algorithm>
#include <optional>
#include <vector>

#include "ztn/traffic.hpp"

namespace ztn::test {

struct OracleGrant {
  int prb = 0;
  std::uint64_t packet_seq = 0;
};

inline bool oracle_older(const traffic::QueuedPacket& a,
                         const traffic::QueuedPacket& b) {
  if (a.event.arrival_time != b.event.arrival_time)
    return a.event.arrival_time < b.event.arrival_time;
  if (a.service != b.service) return a.service < b.service;
  return a.seq < b.seq;
}

inline std::vector<OracleGrant> oracle_schedule(
    std::vector<traffic::QueuedPacket> queued,
    const traffic::SchedulerConfig& cfg) {
  bool any_target = false;
  for (const auto& q : queued)
    if (cfg.is_target(q.service)) any_target = true;
  // Reserved slots open up to every class only when no target packet was
  // queued at TTI start (work-conserving mode).
  const bool fall_through = cfg.work_conserving && !any_target;
  std::vector<OracleGrant> grants;
  for (int prb = 0; prb < cfg.total_prbs; ++prb) {
    const bool target_only = prb < cfg.reserved_prbs && !fall_through;
    std::optional<size_t> best;
    for (size_t i = 0; i < queued.size(); ++i) {
      if (target_only && !cfg.is_target(queued[i].service)) continue;
      if (!best || oracle_older(queued[i], queued[*best])) best = i;
    }
    if (!best) continue;
    grants.push_back({prb, queued[*best].seq});
    queued.erase(queued.begin() + static_cast<long>(*best));
  }
  return grants;
}

}  // namespace ztn::test
