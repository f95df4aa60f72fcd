#include "ztn/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ztn/util.hpp"

namespace ztn::traffic {

std::string to_string(ServiceClass c) {
  switch (c) {
    case ServiceClass::VoiceVideoConf: return "voice_video_conf";
    case ServiceClass::InteractiveData: return "interactive_data";
    case ServiceClass::Streaming: return "streaming";
    case ServiceClass::BulkTransfer: return "bulk_transfer";
  }
  return "?";
}

std::array<double, kNumFeatures> feature_vector(const FlowFeatures& f) {
  return {f.mean_iat, f.cv_iat, f.mean_size, f.mean_buffer, f.proto_udp};
}

std::vector<PacketEvent> generate_flows(ServiceClass cls, double duration_s,
                                        Rng& rng, std::uint32_t flow_id,
                                        double start_time) {
  std::vector<PacketEvent> out;
  if (duration_s <= 0.0) return out;
  const double end = start_time + duration_s;

  auto push = [&](double t, std::uint32_t size, Protocol proto,
                  std::uint64_t buffer) {
    PacketEvent e;
    e.arrival_time = t;
    e.flow_id = flow_id;
    e.size_bytes = size;
    e.protocol = proto;
    e.dl_buffer_bytes = buffer;
    out.push_back(e);
  };

  switch (cls) {
    case ServiceClass::VoiceVideoConf: {
      const double period = 0.020;
      double t = start_time + uniform(rng, 0.0, period);
      while (t < end) {
        push(t, 200, Protocol::UDP, 200 * (1 + uniform_index(rng, 3)));
        t += period;
      }
      break;
    }
    case ServiceClass::InteractiveData: {
      const double rate = 20.0;
      double t = start_time + exponential(rng, rate);
      while (t < end) {
        push(t, 100, Protocol::TCP, 100 * (1 + uniform_index(rng, 5)));
        t += exponential(rng, rate);
      }
      break;
    }
    case ServiceClass::Streaming: {
      const double period = 1.0;
      const int chunks = 10;
      const double chunk_gap = 1e-4;
      double t = start_time + uniform(rng, 0.0, period);
      while (t < end) {
        for (int k = 0; k < chunks; ++k) {
          const double tc = t + k * chunk_gap;
          if (tc >= end) break;
          push(tc, 1200, Protocol::TCP,
               static_cast<std::uint64_t>(chunks - k) * 1200);
        }
        t += period;
      }
      break;
    }
    case ServiceClass::BulkTransfer: {
      const double period = 1.0 / 500.0;
      double t = start_time + uniform(rng, 0.0, period);
      while (t < end) {
        push(t, 1500, Protocol::TCP, 30000 + uniform_index(rng, 30000));
        t += period;
      }
      break;
    }
  }
  return out;
}

MixedTrace generate_mixed_trace(const std::array<int, kNumClasses>& mix,
                                double duration_s, Rng& rng) {
  MixedTrace trace;
  std::uint32_t flow_id = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int k = 0; k < mix[c]; ++k) {
      auto cls = static_cast<ServiceClass>(c);
      auto packets = generate_flows(cls, duration_s, rng, flow_id);
      trace.truth[flow_id] = cls;
      trace.packets.insert(trace.packets.end(), packets.begin(),
                           packets.end());
      ++flow_id;
    }
  }
  std::stable_sort(trace.packets.begin(), trace.packets.end(),
                   [](const PacketEvent& a, const PacketEvent& b) {
                     return a.arrival_time < b.arrival_time;
                   });
  return trace;
}

FlowFeatures extract_features(const std::vector<PacketEvent>& window) {
  if (window.size() < 2)
    throw std::invalid_argument(
        "insufficient data: feature window needs >= 2 packets");
  const size_t n = window.size();
  FlowFeatures f;
  double sum_iat = 0.0;
  for (size_t i = 1; i < n; ++i)
    sum_iat += window[i].arrival_time - window[i - 1].arrival_time;
  f.mean_iat = sum_iat / (n - 1);
  double var = 0.0;
  for (size_t i = 1; i < n; ++i) {
    const double d =
        window[i].arrival_time - window[i - 1].arrival_time - f.mean_iat;
    var += d * d;
  }
  var /= (n - 1);
  f.cv_iat = f.mean_iat > 0.0 ? std::sqrt(var) / f.mean_iat : 0.0;
  double sum_size = 0.0, sum_buffer = 0.0;
  for (const auto& p : window) {
    sum_size += p.size_bytes;
    sum_buffer += static_cast<double>(p.dl_buffer_bytes);
  }
  f.mean_size = sum_size / n;
  f.mean_buffer = sum_buffer / n;
  f.proto_udp = window.front().protocol == Protocol::UDP ? 1.0 : 0.0;
  return f;
}

Centroids fit_classifier(
    const std::vector<std::pair<FlowFeatures, ServiceClass>>& labeled) {
  std::array<long, kNumClasses> counts{};
  for (const auto& [f, c] : labeled) counts[static_cast<int>(c)]++;
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0)
      throw std::invalid_argument("fit_classifier: no samples for class " +
                                  to_string(static_cast<ServiceClass>(c)));
  }

  Centroids model;
  const double n = static_cast<double>(labeled.size());
  for (const auto& [f, c] : labeled) {
    auto v = feature_vector(f);
    for (int d = 0; d < kNumFeatures; ++d) model.mean[d] += v[d];
  }
  for (int d = 0; d < kNumFeatures; ++d) model.mean[d] /= n;
  for (const auto& [f, c] : labeled) {
    auto v = feature_vector(f);
    for (int d = 0; d < kNumFeatures; ++d) {
      const double dd = v[d] - model.mean[d];
      model.std[d] += dd * dd;
    }
  }
  for (int d = 0; d < kNumFeatures; ++d) {
    model.std[d] = std::sqrt(model.std[d] / n);
    if (model.std[d] == 0.0) model.std[d] = 1.0; // constant feature
  }
  for (const auto& [f, c] : labeled) {
    auto v = feature_vector(f);
    auto& cen = model.centroid[static_cast<int>(c)];
    for (int d = 0; d < kNumFeatures; ++d)
      cen[d] += (v[d] - model.mean[d]) / model.std[d];
  }
  for (int c = 0; c < kNumClasses; ++c)
    for (int d = 0; d < kNumFeatures; ++d) model.centroid[c][d] /= counts[c];
  return model;
}

ServiceClass classify(const FlowFeatures& f, const Centroids& model) {
  auto v = feature_vector(f);
  std::array<double, kNumFeatures> z{};
  for (int d = 0; d < kNumFeatures; ++d)
    z[d] = (v[d] - model.mean[d]) / model.std[d];
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int c = 0; c < kNumClasses; ++c) {
    double dist = 0.0;
    for (int d = 0; d < kNumFeatures; ++d) {
      const double dd = z[d] - model.centroid[c][d];
      dist += dd * dd;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return static_cast<ServiceClass>(best);
}

std::string save_classifier(const Centroids& c) {
  std::ostringstream out;
  out << "ztn-classifier v1\n";
  auto dump = [&](const std::string& key,
                  const std::array<double, kNumFeatures>& v) {
    out << key;
    for (double x : v) out << " " << format_double(x);
    out << "\n";
  };
  dump("mean", c.mean);
  dump("std", c.std);
  for (int i = 0; i < kNumClasses; ++i)
    dump("centroid " + std::to_string(i), c.centroid[i]);
  return out.str();
}

Centroids load_classifier(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ztn-classifier v1")
    throw ParseError("bad classifier header", 1);
  Centroids c;
  int lineno = 1;
  auto read_vec = [&](std::istringstream& ls,
                      std::array<double, kNumFeatures>& v) {
    for (int d = 0; d < kNumFeatures; ++d)
      if (!(ls >> v[d])) throw ParseError("bad classifier vector", lineno);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "mean") {
      read_vec(ls, c.mean);
    } else if (key == "std") {
      read_vec(ls, c.std);
    } else if (key == "centroid") {
      int idx;
      if (!(ls >> idx) || idx < 0 || idx >= kNumClasses)
        throw ParseError("bad centroid index", lineno);
      read_vec(ls, c.centroid[idx]);
    } else {
      throw ParseError("unknown key in classifier file: " + key, lineno);
    }
  }
  return c;
}

QueuedPacket ClassQueues::enqueue(const PacketEvent& packet,
                                  ServiceClass cls) {
  QueuedPacket q;
  q.event = packet;
  q.service = cls;
  q.seq = next_seq_++;
  queues_[static_cast<int>(cls)].push_back(q);
  return q;
}

void ClassQueues::restore_queued(const QueuedPacket& packet) {
  queues_[static_cast<int>(packet.service)].push_back(packet);
}

namespace {
// Total order on queued packets: oldest arrival first, then class id,
// then enqueue order.
bool older(const QueuedPacket& a, const QueuedPacket& b) {
  if (a.event.arrival_time != b.event.arrival_time)
    return a.event.arrival_time < b.event.arrival_time;
  if (a.service != b.service) return a.service < b.service;
  return a.seq < b.seq;
}
}  // namespace

std::optional<QueuedPacket> ClassQueues::peek_oldest(
    const std::array<bool, kNumClasses>* restrict_to) const {
  const QueuedPacket* best = nullptr;
  for (int c = 0; c < kNumClasses; ++c) {
    if (restrict_to && !(*restrict_to)[c]) continue;
    if (queues_[c].empty()) continue;
    const QueuedPacket& head = queues_[c].front();
    if (!best || older(head, *best)) best = &head;
  }
  if (!best) return std::nullopt;
  return *best;
}

void ClassQueues::pop(const QueuedPacket& packet) {
  auto& q = queues_[static_cast<int>(packet.service)];
  if (q.empty() || q.front().seq != packet.seq)
    throw std::logic_error("pop does not match queue head");
  q.pop_front();
}

size_t ClassQueues::size(ServiceClass cls) const {
  return queues_[static_cast<int>(cls)].size();
}

size_t ClassQueues::total_size() const {
  size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

bool ClassQueues::any_target_queued(const SchedulerConfig& cfg) const {
  for (int c = 0; c < kNumClasses; ++c)
    if (cfg.target[c] && !queues_[c].empty()) return true;
  return false;
}

const std::deque<QueuedPacket>& ClassQueues::queue(ServiceClass cls) const {
  return queues_[static_cast<int>(cls)];
}

std::vector<PrbGrant> schedule_tti(ClassQueues& queues,
                                   const SchedulerConfig& cfg, long tti) {
  if (!cfg.valid()) throw std::invalid_argument("invalid scheduler config");
  // Reserved PRBs fall through to the general pool only when no target
  // packet was queued at all this TTI; a partially used reserve idles so
  // non-target traffic can never take more than total - reserved PRBs
  // while target packets wait.
  const bool fall_through =
      cfg.work_conserving && !queues.any_target_queued(cfg);
  std::vector<PrbGrant> grants;
  for (int prb = 0; prb < cfg.total_prbs; ++prb) {
    std::optional<QueuedPacket> pick;
    if (prb < cfg.reserved_prbs && !fall_through) {
      pick = queues.peek_oldest(&cfg.target);
    } else {
      pick = queues.peek_oldest();
    }
    if (!pick) continue;
    queues.pop(*pick);
    PrbGrant g;
    g.tti = tti;
    g.prb = prb;
    g.flow_id = pick->event.flow_id;
    g.service = pick->service;
    g.arrival_time = pick->event.arrival_time;
    g.packet_seq = pick->seq;
    grants.push_back(g);
  }
  return grants;
}

LatencyReport latency_report(const std::vector<PrbGrant>& grants,
                             const std::vector<QueuedPacket>& packets,
                             double tti_s) {
  std::array<std::vector<double>, kNumClasses> latencies;
  std::vector<bool> granted(packets.size(), false);
  for (const auto& g : grants) {
    if (g.packet_seq >= packets.size() ||
        packets[g.packet_seq].seq != g.packet_seq)
      throw std::runtime_error("grant references unknown packet seq " +
                               std::to_string(g.packet_seq));
    const auto& p = packets[g.packet_seq];
    const double latency_s = (g.tti + 1) * tti_s - p.event.arrival_time;
    latencies[static_cast<int>(g.service)].push_back(latency_s * 1000.0);
    granted[g.packet_seq] = true;
  }
  LatencyReport report{};
  for (int c = 0; c < kNumClasses; ++c) {
    auto& lat = latencies[c];
    auto& stats = report[c];
    stats.served = static_cast<long>(lat.size());
    if (!lat.empty()) {
      double sum = 0.0;
      for (double v : lat) sum += v;
      stats.mean_ms = sum / lat.size();
      std::sort(lat.begin(), lat.end());
      const size_t idx =
          static_cast<size_t>(std::ceil(0.95 * lat.size())) - 1;
      stats.p95_ms = lat[idx];
    }
  }
  for (size_t i = 0; i < packets.size(); ++i)
    if (!granted[i]) report[static_cast<int>(packets[i].service)].backlog++;
  return report;
}

std::string latency_report_csv(const LatencyReport& report) {
  std::ostringstream out;
  out << "class,mean_ms,p95_ms,backlog\n";
  for (int c = 0; c < kNumClasses; ++c) {
    out << to_string(static_cast<ServiceClass>(c)) << ","
        << format_double(report[c].mean_ms) << ","
        << format_double(report[c].p95_ms) << "," << report[c].backlog
        << "\n";
  }
  return out.str();
}

std::vector<PacketEvent> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader)
    throw ParseError("trace header must be exactly '" +
                         std::string(kTraceHeader) + "'",
                     1);
  std::vector<PacketEvent> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != 5)
      throw ParseError("expected 5 fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    PacketEvent e;
    try {
      size_t pos = 0;
      e.arrival_time = std::stod(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument("time_s");
      e.flow_id = static_cast<std::uint32_t>(std::stoul(fields[1], &pos));
      if (pos != fields[1].size()) throw std::invalid_argument("flow_id");
      const long long size = std::stoll(fields[3], &pos);
      if (pos != fields[3].size()) throw std::invalid_argument("size_bytes");
      if (size <= 0)
        throw std::invalid_argument("size_bytes must be positive");
      e.size_bytes = static_cast<std::uint32_t>(size);
      const long long buffer = std::stoll(fields[4], &pos);
      if (pos != fields[4].size() || buffer < 0)
        throw std::invalid_argument("dl_buffer_bytes must be >= 0");
      e.dl_buffer_bytes = static_cast<std::uint64_t>(buffer);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError(std::string("bad field: ") + ex.what(), lineno);
    }
    if (e.arrival_time < 0.0)
      throw ParseError("time_s must be >= 0", lineno);
    if (fields[2] == "TCP") e.protocol = Protocol::TCP;
    else if (fields[2] == "UDP") e.protocol = Protocol::UDP;
    else throw ParseError("protocol must be TCP or UDP", lineno);
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PacketEvent& a, const PacketEvent& b) {
                     return a.arrival_time < b.arrival_time;
                   });
  return out;
}

std::vector<PacketEvent> ingest_trace(const std::string& path) {
  return parse_trace_csv(read_file(path));
}

std::string trace_to_csv(const std::vector<PacketEvent>& packets) {
  std::ostringstream out;
  out << kTraceHeader << "\n";
  for (const auto& p : packets) {
    out << format_double(p.arrival_time) << "," << p.flow_id << ","
        << (p.protocol == Protocol::UDP ? "UDP" : "TCP") << ","
        << p.size_bytes << "," << p.dl_buffer_bytes << "\n";
  }
  return out.str();
}

}  // namespace ztn::traffic
