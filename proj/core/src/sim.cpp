#include "ztn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ztn/util.hpp"

namespace ztn::sim {

namespace {

constexpr char kCheckpointHeader[] = "ztn-checkpoint v1";

void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  in >> got;
  if (got != want)
    throw std::runtime_error("checkpoint: expected '" + want + "', got '" +
                             got + "'");
}

void write_packet(std::ostream& out, const traffic::PacketEvent& p) {
  out << format_double(p.arrival_time) << " " << p.flow_id << " "
      << p.size_bytes << " " << (p.protocol == traffic::Protocol::UDP ? 1 : 0)
      << " " << p.dl_buffer_bytes;
}

traffic::PacketEvent read_packet(std::istream& in) {
  traffic::PacketEvent p;
  int proto = 0;
  in >> p.arrival_time >> p.flow_id >> p.size_bytes >> proto >>
      p.dl_buffer_bytes;
  p.protocol = proto ? traffic::Protocol::UDP : traffic::Protocol::TCP;
  return p;
}

std::array<traffic::ClassLatencyStats, traffic::kNumClasses> period_stats(
    const std::vector<traffic::PrbGrant>& grants, size_t from, size_t to,
    const std::vector<traffic::QueuedPacket>& enqueued, double tti_s) {
  std::array<std::vector<double>, traffic::kNumClasses> lat;
  for (size_t i = from; i < to; ++i) {
    const auto& g = grants[i];
    const double ms =
        ((g.tti + 1) * tti_s - enqueued[g.packet_seq].event.arrival_time) *
        1000.0;
    lat[static_cast<int>(g.service)].push_back(ms);
  }
  std::array<traffic::ClassLatencyStats, traffic::kNumClasses> out{};
  for (int c = 0; c < traffic::kNumClasses; ++c) {
    auto& v = lat[c];
    out[c].served = static_cast<long>(v.size());
    if (v.empty()) continue;
    double sum = 0.0;
    for (double x : v) sum += x;
    out[c].mean_ms = sum / v.size();
    std::sort(v.begin(), v.end());
    out[c].p95_ms = v[static_cast<size_t>(std::ceil(0.95 * v.size())) - 1];
  }
  return out;
}

}  // namespace

TrafficEngine::TrafficEngine(std::vector<traffic::PacketEvent> packets,
                             traffic::Centroids model, double window_s,
                             traffic::SchedulerConfig scheduler, double tti_s)
    : packets_(std::move(packets)),
      model_(model),
      window_s_(window_s),
      scheduler_(scheduler),
      tti_s_(tti_s) {}

TrafficEngine::TrafficEngine(
    std::vector<traffic::PacketEvent> packets,
    std::map<std::uint32_t, traffic::ServiceClass> truth,
    traffic::SchedulerConfig scheduler, double tti_s)
    : packets_(std::move(packets)),
      scheduler_(scheduler),
      tti_s_(tti_s),
      use_truth_(true),
      truth_(std::move(truth)) {}

std::vector<traffic::PrbGrant> TrafficEngine::step(long tti) {
  const double t_end = (tti + 1) * tti_s_;
  while (next_idx_ < packets_.size() &&
         packets_[next_idx_].arrival_time < t_end) {
    const auto& p = packets_[next_idx_];
    traffic::ServiceClass cls = traffic::ServiceClass::BulkTransfer;
    if (use_truth_) {
      auto it = truth_.find(p.flow_id);
      if (it == truth_.end())
        throw std::runtime_error("no truth label for flow " +
                                 std::to_string(p.flow_id));
      cls = it->second;
    } else {
      auto& window = windows_[p.flow_id];
      window.push_back(p);
      while (!window.empty() &&
             window.front().arrival_time < p.arrival_time - window_s_)
        window.pop_front();
      if (window.size() >= 2) {
        const std::vector<traffic::PacketEvent> w(window.begin(),
                                                  window.end());
        flow_class_[p.flow_id] =
            traffic::classify(traffic::extract_features(w), model_);
      }
      auto it = flow_class_.find(p.flow_id);
      if (it != flow_class_.end()) cls = it->second;
    }
    enqueued_.push_back(queues_.enqueue(p, cls));
    ++next_idx_;
  }
  auto grants = traffic::schedule_tti(queues_, scheduler_, tti);
  grants_.insert(grants_.end(), grants.begin(), grants.end());
  return grants;
}

traffic::LatencyReport TrafficEngine::report() const {
  return traffic::latency_report(grants_, enqueued_, tti_s_);
}

void TrafficEngine::serialize(std::ostream& out) const {
  out << "traffic " << next_idx_ << " " << queues_.next_seq() << "\n";
  out << "enqueued " << enqueued_.size() << "\n";
  for (const auto& q : enqueued_) {
    out << "qp ";
    write_packet(out, q.event);
    out << " " << static_cast<int>(q.service) << " " << q.seq << "\n";
  }
  for (int c = 0; c < traffic::kNumClasses; ++c) {
    const auto& q = queues_.queue(static_cast<traffic::ServiceClass>(c));
    out << "queue " << c << " " << q.size();
    for (const auto& qp : q) out << " " << qp.seq;
    out << "\n";
  }
  out << "grants " << grants_.size() << "\n";
  for (const auto& g : grants_) {
    out << "grant " << g.tti << " " << g.prb << " " << g.flow_id << " "
        << static_cast<int>(g.service) << " " << format_double(g.arrival_time)
        << " " << g.packet_seq << "\n";
  }
  out << "windows " << windows_.size() << "\n";
  for (const auto& [flow, window] : windows_) {
    out << "window " << flow << " " << window.size() << "\n";
    for (const auto& p : window) {
      out << "wp ";
      write_packet(out, p);
      out << "\n";
    }
  }
  out << "flowclasses " << flow_class_.size() << "\n";
  for (const auto& [flow, cls] : flow_class_)
    out << "fc " << flow << " " << static_cast<int>(cls) << "\n";
}

void TrafficEngine::restore(std::istream& in) {
  expect_token(in, "traffic");
  std::uint64_t next_seq = 0;
  in >> next_idx_ >> next_seq;
  expect_token(in, "enqueued");
  size_t n = 0;
  in >> n;
  enqueued_.clear();
  enqueued_.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    expect_token(in, "qp");
    traffic::QueuedPacket q;
    q.event = read_packet(in);
    int cls = 0;
    in >> cls >> q.seq;
    q.service = static_cast<traffic::ServiceClass>(cls);
    enqueued_.push_back(q);
  }
  queues_ = traffic::ClassQueues();
  // Queues store seq references into enqueued_.
  for (int c = 0; c < traffic::kNumClasses; ++c) {
    expect_token(in, "queue");
    int cc = 0;
    size_t qn = 0;
    in >> cc >> qn;
    for (size_t i = 0; i < qn; ++i) {
      std::uint64_t seq = 0;
      in >> seq;
      if (seq >= enqueued_.size())
        throw std::runtime_error("checkpoint: queued seq out of range");
      queues_.restore_queued(enqueued_[seq]);
    }
  }
  queues_.set_next_seq(next_seq);
  expect_token(in, "grants");
  in >> n;
  grants_.clear();
  grants_.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    expect_token(in, "grant");
    traffic::PrbGrant g;
    int cls = 0;
    in >> g.tti >> g.prb >> g.flow_id >> cls >> g.arrival_time >>
        g.packet_seq;
    g.service = static_cast<traffic::ServiceClass>(cls);
    grants_.push_back(g);
  }
  expect_token(in, "windows");
  in >> n;
  windows_.clear();
  for (size_t i = 0; i < n; ++i) {
    expect_token(in, "window");
    std::uint32_t flow = 0;
    size_t wn = 0;
    in >> flow >> wn;
    auto& window = windows_[flow];
    for (size_t k = 0; k < wn; ++k) {
      expect_token(in, "wp");
      window.push_back(read_packet(in));
    }
  }
  expect_token(in, "flowclasses");
  in >> n;
  flow_class_.clear();
  for (size_t i = 0; i < n; ++i) {
    expect_token(in, "fc");
    std::uint32_t flow = 0;
    int cls = 0;
    in >> flow >> cls;
    flow_class_[flow] = static_cast<traffic::ServiceClass>(cls);
  }
}

World::World(const ScenarioConfig& cfg, std::vector<rl::FactoredPolicy> pols)
    : cfg_(cfg),
      policies_(std::move(pols)),
      orch_(cfg.orchestrator.cfg, cfg.orchestrator.pool) {
  cfg_.validate();
  lookup_ = rl::default_lookup_table(cfg_.rl.lookup_margin_db);
  if (cfg_.policy == rl::PolicyKind::Learned && !policies_.empty() &&
      static_cast<int>(policies_.size()) != cfg_.n_ue)
    throw ConfigError("learned policy count does not match n_ue");
  if (cfg_.policy == rl::PolicyKind::Learned && policies_.empty()) {
    for (int i = 0; i < cfg_.n_ue; ++i)
      policies_.push_back(rl::FactoredPolicy::make(
          cfg_.rl.epsilon_start, cfg_.rl.alpha, cfg_.rl.gamma));
  }

  rng_mobility_ = Rng(cfg_.stream_seed("mobility", cfg_.seeds.mobility));
  rng_shadowing_ = Rng(cfg_.stream_seed("shadowing", cfg_.seeds.shadowing));
  rng_traffic_ = Rng(cfg_.stream_seed("traffic", cfg_.seeds.traffic));
  rng_policy_ = Rng(cfg_.stream_seed("policy", cfg_.seeds.policy));
  rng_harq_ = Rng(cfg_.stream_seed("harq", cfg_.seeds.harq));
  rng_classifier_ =
      Rng(cfg_.stream_seed("classifier", cfg_.seeds.classifier));

  ues_.resize(cfg_.n_ue);
  for (auto& ue : ues_) {
    ue.pose.x = uniform(rng_mobility_, 0.0, cfg_.radio.field.width);
    ue.pose.y = uniform(rng_mobility_, 0.0, cfg_.radio.field.height);
    ue.pose.heading = uniform(rng_mobility_, 0.0, 6.283185307179586);
    ue.pose.speed = cfg_.radio.speed_m_s();
  }
  for (auto& ue : ues_)
    ue.shadow_db = cfg_.radio.bler.shadowing_sigma * gaussian(rng_shadowing_);

  const double duration_s = cfg_.duration_ttis * cfg_.tti_s();
  auto trace =
      traffic::generate_mixed_trace(cfg_.traffic.flows, duration_s,
                                    rng_traffic_);
  auto model = fit_scenario_classifier(cfg_.steering.classifier_train_flows,
                                       rng_classifier_);
  traffic_ = TrafficEngine(std::move(trace.packets), model,
                           cfg_.steering.classifier_window_s,
                           cfg_.steering.scheduler, cfg_.tti_s());

  for (int i = 0; i < cfg_.n_ue; ++i)
    ues_[i].action = rl::lookup_policy(link_snr_db(i), lookup_);

  // Fleet registration is part of world construction so the registry view
  // is identical on resume.
  for (int i = 0; i < cfg_.n_ue; ++i) {
    orch::DeviceStatus d;
    d.device_id = "ue-" + std::to_string(i);
    d.kind = orch::DeviceKind::Robot;
    d.position = ues_[i].pose;
    d.capabilities = {"downlink"};
    orch_.register_device(d, 0.0);
  }
}

radio::Pose World::ap_position(int ue) const {
  // Single AP at the field centre; extra APs spread along the x axis.
  radio::Pose ap;
  const int k = cfg_.n_ap <= 1 ? 0 : ue % cfg_.n_ap;
  ap.x = cfg_.radio.field.width * (k + 1) / (cfg_.n_ap + 1.0);
  ap.y = cfg_.radio.field.height / 2.0;
  return ap;
}

double World::link_snr_db(int ue) const {
  if (cfg_.radio.has_fixed_snr()) return cfg_.radio.fixed_snr_db;
  const auto& pose = ues_[ue].pose;
  const auto ap = ap_position(ue);
  const double dx = pose.x - ap.x;
  const double dy = pose.y - ap.y;
  const double h = cfg_.radio.ap_height_m;
  const double dist = std::sqrt(dx * dx + dy * dy + h * h);
  return radio::snr_db(cfg_.radio.tx_power_dbm, radio::path_loss_db(dist),
                       ues_[ue].shadow_db, cfg_.radio.noise_floor_dbm);
}

std::optional<World::Report> World::step_tti() {
  const double dt = cfg_.tti_s();

  for (auto& ue : ues_)
    ue.pose = radio::step_pose(ue.pose, dt, cfg_.radio.field,
                               cfg_.radio.turn_rate_per_s, rng_mobility_);
  for (auto& ue : ues_)
    ue.shadow_db =
        radio::sample_shadowing(ue.shadow_db, cfg_.radio.bler, rng_shadowing_);

  const auto grants = traffic_.step(tti_);
  std::vector<double> qdelay_ms(cfg_.n_ue, 0.0);
  std::vector<int> qcount(cfg_.n_ue, 0);
  const double t_end = (tti_ + 1) * dt;
  for (const auto& g : grants) {
    const int ue = static_cast<int>(g.flow_id % cfg_.n_ue);
    qdelay_ms[ue] += (t_end - g.arrival_time) * 1000.0;
    qcount[ue] += 1;
  }

  for (int i = 0; i < cfg_.n_ue; ++i) {
    auto& ue = ues_[i];
    const double snr = link_snr_db(i);
    const double eff =
        radio::effective_snr_db(snr, ue.action.repetition());
    const double p = radio::bler(eff, ue.action.mcs, cfg_.radio.bler);
    const auto hs = radio::harq_stats(p, ue.action.harq_max_retx);
    const double thr = radio::link_throughput_kbps(
        ue.action.mcs, ue.action.repetition(), hs.residual_bler,
        cfg_.radio.prbs_per_ue, cfg_.radio.rate_table);
    const double queueing =
        qcount[i] > 0 ? qdelay_ms[i] / qcount[i] : 0.0;
    const double lat_ms =
        hs.expected_transmissions * cfg_.tti_ms + queueing;

    // The reported BLER KPI is the post-HARQ residual: the error rate the
    // link actually achieves with its retransmission budget, which is what
    // the HARQ action trades against latency.
    ue.p_snr += snr; ue.p_bler += hs.residual_bler; ue.p_lat += lat_ms;
    ue.p_thr += thr;
    ue.p_n += 1;
    ue.r_snr += snr; ue.r_bler += hs.residual_bler; ue.r_lat += lat_ms;
    ue.r_thr += thr;
    ue.r_n += 1;

    // Sampled HARQ outcome for the delivery counters.
    ue.attempted += 1;
    for (int a = 0; a <= ue.action.harq_max_retx; ++a) {
      if (uniform01(rng_harq_) >= p) {
        ue.delivered += 1;
        break;
      }
    }
  }

  std::optional<Report> report;
  if ((tti_ + 1) % cfg_.kpi_report_period_ttis == 0) report = make_report();
  ++tti_;
  return report;
}

World::Report World::make_report() {
  Report rep;
  rep.tti = tti_;
  rep.kpi.resize(cfg_.n_ue);
  rep.state.resize(cfg_.n_ue);
  rep.reward.resize(cfg_.n_ue);
  rep.action.resize(cfg_.n_ue);
  for (int i = 0; i < cfg_.n_ue; ++i) {
    auto& ue = ues_[i];
    radio::LinkKpi kpi;
    kpi.snr_db = ue.p_snr / ue.p_n;
    kpi.bler = ue.p_bler / ue.p_n;
    kpi.latency_ms = ue.p_lat / ue.p_n;
    kpi.throughput_kbps = ue.p_thr / ue.p_n;
    ue.p_snr = ue.p_bler = ue.p_lat = ue.p_thr = 0.0;
    ue.p_n = 0;

    const rl::StateBin state = rl::quantize(kpi, edges_);
    const double r = rl::reward(kpi, cfg_.reward, cfg_.norms);
    ue.sum_reward += r;
    ue.n_reward += 1;

    if (training_ && cfg_.policy == rl::PolicyKind::Learned && ue.has_state)
      rl::q_update(policies_[i], ue.last_state, ue.action, r, state);

    radio::TxConfig next_action;
    switch (cfg_.policy) {
      case rl::PolicyKind::Learned:
        next_action = training_
                          ? rl::select_action(policies_[i], state, rng_policy_)
                          : rl::greedy_action(policies_[i], state);
        break;
      case rl::PolicyKind::LookupTable:
        next_action = rl::lookup_policy(kpi.snr_db, lookup_);
        break;
      case rl::PolicyKind::Random:
        next_action = rl::random_policy(rng_policy_);
        break;
    }
    ue.last_state = state;
    ue.has_state = true;
    ue.action = next_action;

    rep.kpi[i] = kpi;
    rep.state[i] = state;
    rep.reward[i] = r;
    rep.action[i] = next_action;
  }
  const auto& grants = traffic_.grants();
  rep.period_traffic = period_stats(grants, reported_grants_, grants.size(),
                                    traffic_.enqueued(), cfg_.tti_s());
  rep.period_grants = static_cast<long>(grants.size() - reported_grants_);
  reported_grants_ = grants.size();
  return rep;
}

ScenarioSummary World::summary() const {
  ScenarioSummary s;
  s.per_ue.resize(cfg_.n_ue);
  for (int i = 0; i < cfg_.n_ue; ++i) {
    const auto& ue = ues_[i];
    auto& row = s.per_ue[i];
    if (ue.r_n > 0) {
      row.mean_snr_db = ue.r_snr / ue.r_n;
      row.mean_bler = ue.r_bler / ue.r_n;
      row.mean_latency_ms = ue.r_lat / ue.r_n;
      row.mean_throughput_kbps = ue.r_thr / ue.r_n;
    }
    row.blocks_delivered = ue.delivered;
    row.blocks_attempted = ue.attempted;
    row.mean_reward = ue.n_reward > 0 ? ue.sum_reward / ue.n_reward : 0.0;
    s.mean_bler += row.mean_bler;
    s.mean_throughput_kbps += row.mean_throughput_kbps;
    s.mean_latency_ms += row.mean_latency_ms;
  }
  s.mean_bler /= cfg_.n_ue;
  s.mean_throughput_kbps /= cfg_.n_ue;
  s.mean_latency_ms /= cfg_.n_ue;
  s.traffic_latency = traffic_.report();
  s.total_grants = static_cast<long>(traffic_.grants().size());
  s.total_packets = static_cast<long>(traffic_.enqueued().size());
  return s;
}

std::string World::serialize() const {
  std::ostringstream out;
  out << kCheckpointHeader << "\n";
  out << "tti " << tti_ << "\n";
  out << "rng_mobility " << rng_mobility_ << "\n";
  out << "rng_shadowing " << rng_shadowing_ << "\n";
  out << "rng_traffic " << rng_traffic_ << "\n";
  out << "rng_policy " << rng_policy_ << "\n";
  out << "rng_harq " << rng_harq_ << "\n";
  out << "reported_grants " << reported_grants_ << "\n";
  for (int i = 0; i < cfg_.n_ue; ++i) {
    const auto& ue = ues_[i];
    out << "ue " << i << " " << format_double(ue.pose.x) << " "
        << format_double(ue.pose.y) << " " << format_double(ue.pose.heading)
        << " " << format_double(ue.pose.speed) << " "
        << format_double(ue.shadow_db) << " " << ue.action.mcs << " "
        << ue.action.repetition_idx << " " << ue.action.harq_max_retx << " "
        << ue.last_state.snr << " " << ue.last_state.bler << " "
        << ue.last_state.latency << " " << ue.last_state.throughput << " "
        << (ue.has_state ? 1 : 0) << " " << format_double(ue.p_snr) << " "
        << format_double(ue.p_bler) << " " << format_double(ue.p_lat) << " "
        << format_double(ue.p_thr) << " " << ue.p_n << " "
        << format_double(ue.r_snr) << " " << format_double(ue.r_bler) << " "
        << format_double(ue.r_lat) << " " << format_double(ue.r_thr) << " "
        << ue.r_n << " " << ue.delivered << " " << ue.attempted << " "
        << format_double(ue.sum_reward) << " " << ue.n_reward << "\n";
  }
  traffic_.serialize(out);
  out << "end\n";
  return out.str();
}

void World::restore(const std::string& checkpoint) {
  std::istringstream in(checkpoint);
  std::string header;
  std::getline(in, header);
  if (header != kCheckpointHeader)
    throw std::runtime_error("unsupported checkpoint header: " + header);
  expect_token(in, "tti");
  in >> tti_;
  expect_token(in, "rng_mobility");
  in >> rng_mobility_;
  expect_token(in, "rng_shadowing");
  in >> rng_shadowing_;
  expect_token(in, "rng_traffic");
  in >> rng_traffic_;
  expect_token(in, "rng_policy");
  in >> rng_policy_;
  expect_token(in, "rng_harq");
  in >> rng_harq_;
  expect_token(in, "reported_grants");
  in >> reported_grants_;
  for (int i = 0; i < cfg_.n_ue; ++i) {
    expect_token(in, "ue");
    int idx = 0;
    in >> idx;
    auto& ue = ues_[idx];
    int has_state = 0;
    in >> ue.pose.x >> ue.pose.y >> ue.pose.heading >> ue.pose.speed >>
        ue.shadow_db >> ue.action.mcs >> ue.action.repetition_idx >>
        ue.action.harq_max_retx >> ue.last_state.snr >> ue.last_state.bler >>
        ue.last_state.latency >> ue.last_state.throughput >> has_state >>
        ue.p_snr >> ue.p_bler >> ue.p_lat >> ue.p_thr >> ue.p_n >> ue.r_snr >>
        ue.r_bler >> ue.r_lat >> ue.r_thr >> ue.r_n >> ue.delivered >>
        ue.attempted >> ue.sum_reward >> ue.n_reward;
    ue.has_state = has_state != 0;
  }
  traffic_.restore(in);
  expect_token(in, "end");
  if (!in) throw std::runtime_error("truncated checkpoint");
}

std::uint64_t World::state_hash() const { return hash_bytes(serialize()); }

RunResult run_scenario(const ScenarioConfig& cfg,
                       std::vector<rl::FactoredPolicy> policies) {
  cfg.validate();
  if (cfg.policy == rl::PolicyKind::Learned && policies.empty())
    throw ConfigError(
        "policy = learned requires trained policies (run train first)");
  World world(cfg, std::move(policies));
  RunResult result;
  for (long t = 0; t < cfg.duration_ttis; ++t) {
    auto rep = world.step_tti();
    if (rep) result.frames.push_back(std::move(*rep));
  }
  result.summary = world.summary();
  result.final_hash = world.state_hash();
  return result;
}

ComparisonTable compare_policies(const ScenarioConfig& base,
                                 const std::vector<rl::PolicyKind>& kinds,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::vector<rl::FactoredPolicy>&
                                     learned) {
  if (kinds.size() < 2)
    throw ConfigError("compare_policies needs at least 2 policies");
  if (seeds.empty()) throw ConfigError("compare_policies needs >= 1 seed");
  ComparisonTable table;
  for (auto kind : kinds) {
    table.wins_bler[kind] = 0;
    table.wins_throughput[kind] = 0;
    table.wins_latency[kind] = 0;
  }
  for (auto seed : seeds) {
    std::vector<ComparisonRow> seed_rows;
    for (auto kind : kinds) {
      ScenarioConfig cfg = base;
      cfg.seed = seed;
      cfg.policy = kind;
      std::vector<rl::FactoredPolicy> pols;
      if (kind == rl::PolicyKind::Learned) {
        if (static_cast<int>(learned.size()) != cfg.n_ue)
          throw ConfigError("learned policy count does not match n_ue");
        pols = learned;
      }
      const auto result = run_scenario(cfg, std::move(pols));
      ComparisonRow row;
      row.policy = kind;
      row.seed = seed;
      row.mean_bler = result.summary.mean_bler;
      row.mean_throughput_kbps = result.summary.mean_throughput_kbps;
      row.mean_latency_ms = result.summary.mean_latency_ms;
      seed_rows.push_back(row);
    }
    auto strict_best = [&](auto metric, bool lower_is_better) {
      int best = 0;
      bool strict = true;
      for (size_t i = 1; i < seed_rows.size(); ++i) {
        const double a = metric(seed_rows[i]);
        const double b = metric(seed_rows[best]);
        if (lower_is_better ? a < b : a > b) {
          best = static_cast<int>(i);
          strict = true;
        } else if (a == b) {
          strict = false;
        }
      }
      return strict ? best : -1;
    };
    int b = strict_best([](const ComparisonRow& r) { return r.mean_bler; },
                        true);
    if (b >= 0) table.wins_bler[seed_rows[b].policy] += 1;
    b = strict_best(
        [](const ComparisonRow& r) { return r.mean_throughput_kbps; }, false);
    if (b >= 0) table.wins_throughput[seed_rows[b].policy] += 1;
    b = strict_best([](const ComparisonRow& r) { return r.mean_latency_ms; },
                    true);
    if (b >= 0) table.wins_latency[seed_rows[b].policy] += 1;
    for (auto& row : seed_rows) table.rows.push_back(row);
  }
  return table;
}

namespace {
SteerResult drain_engine(TrafficEngine& engine, long duration_ttis) {
  for (long t = 0; t < duration_ttis; ++t) engine.step(t);
  SteerResult result;
  result.report = engine.report();
  result.grants = static_cast<long>(engine.grants().size());
  result.packets = static_cast<long>(engine.enqueued().size());
  return result;
}
}  // namespace

SteerResult run_steering(const std::vector<traffic::PacketEvent>& packets,
                         const traffic::Centroids& model,
                         const traffic::SchedulerConfig& scheduler,
                         double window_s, double tti_s, long duration_ttis) {
  TrafficEngine engine(packets, model, window_s, scheduler, tti_s);
  return drain_engine(engine, duration_ttis);
}

SteerResult run_steering_truth(
    const std::vector<traffic::PacketEvent>& packets,
    const std::map<std::uint32_t, traffic::ServiceClass>& truth,
    const traffic::SchedulerConfig& scheduler, double tti_s,
    long duration_ttis) {
  TrafficEngine engine(packets, truth, scheduler, tti_s);
  return drain_engine(engine, duration_ttis);
}

traffic::Centroids fit_scenario_classifier(int train_flows_per_class,
                                           Rng& rng) {
  const double duration_s = 2.0;
  std::vector<std::pair<traffic::FlowFeatures, traffic::ServiceClass>>
      labeled;
  std::uint32_t flow_id = 0;
  for (int c = 0; c < traffic::kNumClasses; ++c) {
    const auto cls = static_cast<traffic::ServiceClass>(c);
    for (int k = 0; k < train_flows_per_class; ++k) {
      const auto packets = traffic::generate_flows(cls, duration_s, rng,
                                                   flow_id++);
      labeled.emplace_back(traffic::extract_features(packets), cls);
    }
  }
  return traffic::fit_classifier(labeled);
}

std::string link_metrics_csv(const std::vector<World::Report>& frames) {
  std::ostringstream out;
  out << "tti,ue,snr_db,bler,latency_ms,throughput_kbps\n";
  for (const auto& f : frames) {
    for (size_t ue = 0; ue < f.kpi.size(); ++ue) {
      const auto& k = f.kpi[ue];
      out << f.tti << "," << ue << "," << format_double(k.snr_db) << ","
          << format_double(k.bler) << "," << format_double(k.latency_ms)
          << "," << format_double(k.throughput_kbps) << "\n";
    }
  }
  return out.str();
}

std::string traffic_metrics_csv(const std::vector<World::Report>& frames) {
  std::ostringstream out;
  out << "tti,class,mean_ms,p95_ms,served\n";
  for (const auto& f : frames) {
    for (int c = 0; c < traffic::kNumClasses; ++c) {
      const auto& s = f.period_traffic[c];
      out << f.tti << ","
          << traffic::to_string(static_cast<traffic::ServiceClass>(c)) << ","
          << format_double(s.mean_ms) << "," << format_double(s.p95_ms) << ","
          << s.served << "\n";
    }
  }
  return out.str();
}

std::string summary_link_csv(const ScenarioSummary& summary) {
  std::ostringstream out;
  out << "ue,mean_snr_db,mean_bler,mean_latency_ms,mean_throughput_kbps,"
         "blocks_delivered,blocks_attempted,mean_reward\n";
  for (size_t i = 0; i < summary.per_ue.size(); ++i) {
    const auto& u = summary.per_ue[i];
    out << i << "," << format_double(u.mean_snr_db) << ","
        << format_double(u.mean_bler) << "," << format_double(u.mean_latency_ms)
        << "," << format_double(u.mean_throughput_kbps) << ","
        << u.blocks_delivered << "," << u.blocks_attempted << ","
        << format_double(u.mean_reward) << "\n";
  }
  return out.str();
}

std::string comparison_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "policy,seed,mean_bler,mean_throughput_kbps,mean_latency_ms\n";
  for (const auto& r : table.rows) {
    out << rl::to_string(r.policy) << "," << r.seed << ","
        << format_double(r.mean_bler) << ","
        << format_double(r.mean_throughput_kbps) << ","
        << format_double(r.mean_latency_ms) << "\n";
  }
  return out.str();
}

std::string comparison_wins_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "policy,wins_bler,wins_throughput,wins_latency\n";
  for (const auto& [kind, wins] : table.wins_bler) {
    out << rl::to_string(kind) << "," << wins << ","
        << table.wins_throughput.at(kind) << ","
        << table.wins_latency.at(kind) << "\n";
  }
  return out.str();
}

}  // namespace ztn::sim
