#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ztn/rng.hpp"

namespace ztn::traffic {

enum class ServiceClass : int {
  VoiceVideoConf = 0,
  InteractiveData = 1,
  Streaming = 2,
  BulkTransfer = 3,
};
inline constexpr int kNumClasses = 4;

std::string to_string(ServiceClass c);

enum class Protocol { TCP, UDP };

struct PacketEvent {
  double arrival_time = 0.0; // s
  std::uint32_t flow_id = 0;
  std::uint32_t size_bytes = 0;     // > 0
  Protocol protocol = Protocol::TCP;
  std::uint64_t dl_buffer_bytes = 0;
};

struct FlowFeatures {
  double mean_iat = 0.0;    // s
  double cv_iat = 0.0;      // >= 0
  double mean_size = 0.0;   // bytes
  double mean_buffer = 0.0; // bytes
  double proto_udp = 0.0;   // 0/1
};
inline constexpr int kNumFeatures = 5;

std::array<double, kNumFeatures> feature_vector(const FlowFeatures& f);

// Synthetic per-class profiles standing in for a measured trace:
//   VoiceVideoConf  UDP, 20 ms period, 200 B
//   InteractiveData TCP, Poisson 20/s, 100 B
//   Streaming       TCP, every 1 s a burst of 10 x 1200 B chunks
//   BulkTransfer    TCP, 1500 B at a steady 500/s
std::vector<PacketEvent> generate_flows(ServiceClass cls, double duration_s,
                                        Rng& rng, std::uint32_t flow_id,
                                        double start_time = 0.0);

// flows_per_class -> merged, time-sorted packet stream plus flow_id ->
// true class labels.
struct MixedTrace {
  std::vector<PacketEvent> packets;
  std::map<std::uint32_t, ServiceClass> truth;
};
MixedTrace generate_mixed_trace(const std::array<int, kNumClasses>& mix,
                                double duration_s, Rng& rng);

// Requires >= 2 packets of one flow; throws std::invalid_argument otherwise.
FlowFeatures extract_features(const std::vector<PacketEvent>& window);

// Nearest-centroid model over z-scored features.
struct Centroids {
  std::array<double, kNumFeatures> mean{};
  std::array<double, kNumFeatures> std{};
  std::array<std::array<double, kNumFeatures>, kNumClasses> centroid{};
};

Centroids fit_classifier(
    const std::vector<std::pair<FlowFeatures, ServiceClass>>& labeled);

// Ties break to the lowest class id.
ServiceClass classify(const FlowFeatures& f, const Centroids& c);

std::string save_classifier(const Centroids& c);
Centroids load_classifier(const std::string& text);

struct SchedulerConfig {
  int total_prbs = 3;
  int reserved_prbs = 2;
  std::array<bool, kNumClasses> target = {true, true, false, false};
  bool work_conserving = true;

  bool valid() const {
    return total_prbs >= 0 && reserved_prbs >= 0 &&
           reserved_prbs <= total_prbs;
  }
  bool is_target(ServiceClass c) const { return target[static_cast<int>(c)]; }
};

struct PrbGrant {
  long tti = 0;
  int prb = 0; // [0, total_prbs)
  std::uint32_t flow_id = 0;
  ServiceClass service = ServiceClass::VoiceVideoConf;
  double arrival_time = 0.0;
  std::uint64_t packet_seq = 0; // identity for accounting
};

struct QueuedPacket {
  PacketEvent event;
  ServiceClass service = ServiceClass::VoiceVideoConf;
  std::uint64_t seq = 0; // assigned at enqueue, global order
};

// Per-class FIFO queues ordered by (arrival_time, class, enqueue order).
class ClassQueues {
 public:
  QueuedPacket enqueue(const PacketEvent& packet, ServiceClass cls);
  // Re-inserts a packet with its original seq (checkpoint restore).
  void restore_queued(const QueuedPacket& packet);
  void set_next_seq(std::uint64_t seq) { next_seq_ = seq; }
  std::optional<QueuedPacket> peek_oldest(
      const std::array<bool, kNumClasses>* restrict_to = nullptr) const;
  void pop(const QueuedPacket& packet);
  size_t size(ServiceClass cls) const;
  size_t total_size() const;
  bool any_target_queued(const SchedulerConfig& cfg) const;
  const std::deque<QueuedPacket>& queue(ServiceClass cls) const;
  std::uint64_t next_seq() const { return next_seq_; }

 private:
  std::array<std::deque<QueuedPacket>, kNumClasses> queues_;
  std::uint64_t next_seq_ = 0;
};

// One TTI of PRB assignment.  PRBs below reserved_prbs serve target-class
// packets oldest-first; the rest serve all queues oldest-first.  When
// work-conserving, a reserved PRB with no target packet queued falls
// through to the general pool; otherwise it idles.
std::vector<PrbGrant> schedule_tti(ClassQueues& queues,
                                   const SchedulerConfig& cfg, long tti);

struct ClassLatencyStats {
  long served = 0;
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  long backlog = 0; // packets never granted
};
using LatencyReport = std::array<ClassLatencyStats, kNumClasses>;

// latency = grant TTI end time - packet arrival.  `packets` must contain
// every granted seq (indexed by seq); throws std::runtime_error on a grant
// that references an unknown packet.
LatencyReport latency_report(const std::vector<PrbGrant>& grants,
                             const std::vector<QueuedPacket>& packets,
                             double tti_s);

std::string latency_report_csv(const LatencyReport& report);

inline constexpr const char* kTraceHeader =
    "time_s,flow_id,protocol,size_bytes,dl_buffer_bytes";

// Trace CSV with the exact header above; rows are validated and the
// result is sorted by time.  Malformed rows raise ParseError with the
// offending line number.
std::vector<PacketEvent> parse_trace_csv(const std::string& text);
std::vector<PacketEvent> ingest_trace(const std::string& path);
std::string trace_to_csv(const std::vector<PacketEvent>& packets);

}  // namespace ztn::traffic
