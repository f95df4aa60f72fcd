#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ztn/radio.hpp"

namespace ztn::orch {

enum class DeviceKind { Robot, RoboticArm, AGV };
enum class QosClass { eMBB, URLLC, mMTC };
enum class Tier { EdgeDU, RegionalCU_RIC, CloudSMO };

std::string to_string(DeviceKind k);
std::string to_string(QosClass q);
std::string to_string(Tier t);
DeviceKind device_kind_from_string(const std::string& s);
QosClass qos_from_string(const std::string& s);

struct DeviceStatus {
  std::string device_id;
  DeviceKind kind = DeviceKind::Robot;
  radio::Pose position;
  double battery = 100.0; // percent, [0, 100]
  int workload = 0;       // active task count
  std::set<std::string> capabilities;
  std::set<std::string> learnt_models;
};

struct TaskRequest {
  std::string task_id;
  std::string kind;
  std::string required_capability;
  QosClass qos = QosClass::eMBB;
  std::optional<radio::Pose> location_hint;
};

struct ResourceGrant {
  QosClass qos = QosClass::eMBB;
  int prbs = 0;
  Tier tier = Tier::RegionalCU_RIC;
  bool from_reserved = false;
};

struct Assignment {
  std::string task_id;
  std::string device_id;
  double score = 0.0;
  std::optional<ResourceGrant> grant;
};

struct ServiceEntry {
  std::string service_id;
  std::string endpoint;
  bool cached = false;
  Tier tier = Tier::CloudSMO;
};

// Free PRBs per AP, split into a reserved (low-latency) share and a
// best-effort share.
struct ResourcePool {
  int reserved_capacity = 4;
  int besteffort_capacity = 8;
  int reserved_free = 4;
  int besteffort_free = 8;
};

struct OrchestratorConfig {
  double w_battery = 1.0;
  double w_workload = 0.5;
  double w_distance = 0.3;
  int workload_cap = 10;
  double field_diagonal_m = 70.710678118654755; // 50 x 50 default
  int urllc_prbs = 2;
  int embb_prbs = 3;
  int mmtc_prbs = 1;
  double retry_after_s = 1.0;
};

enum class RegistryStatus { Ok, DuplicateId, UnknownDevice, StaleTimestamp };

struct AssignOutcome {
  std::optional<Assignment> assignment;
  std::string reason; // set when no assignment was possible
};

struct AllocOutcome {
  std::optional<ResourceGrant> grant;
  double retry_after_s = 0.0; // hint when rejected
};

struct EventRecord {
  double time = 0.0;
  std::string event;
  std::string device_id;
  std::string task_id;
  std::string detail;
};

// Device registry, task assignment, resource pool, and service catalog as
// one serialized state machine.  Rejected operations leave state
// untouched; every operation appends to the audit log.
class Orchestrator {
 public:
  explicit Orchestrator(OrchestratorConfig cfg = {}, ResourcePool pool = {});

  RegistryStatus register_device(const DeviceStatus& status, double time);
  // Replaces the stored status; reports with a time earlier than the last
  // accepted one for the device are rejected.
  RegistryStatus report_status(const std::string& device_id,
                               const DeviceStatus& status, double time);

  // Scores capability-matching devices by battery, workload, and distance
  // to the hint; ties break to the lowest device_id.  Bumps the winner's
  // workload.
  AssignOutcome assign_task(const TaskRequest& task, double time);

  // URLLC -> reserved PRBs at the EdgeDU tier; eMBB -> best-effort at the
  // regional CU/RIC tier; mMTC -> minimal best-effort share.
  AllocOutcome allocate_resources(const TaskRequest& task, double time);

  // Undoes an assignment: workload back down, granted PRBs back to the
  // pool.  Returns false for an unknown task.
  bool release_task(const std::string& task_id, double time);

  bool deploy_service(const ServiceEntry& entry, double time);
  std::optional<ServiceEntry> discover_service(const std::string& service_id,
                                               double time);

  double score(const DeviceStatus& device, const TaskRequest& task) const;

  const DeviceStatus* device(const std::string& id) const;
  double last_report_time(const std::string& id) const;
  const Assignment* assignment(const std::string& task_id) const;
  size_t device_count() const { return devices_.size(); }
  const ResourcePool& pool() const { return pool_; }
  const std::vector<EventRecord>& events() const { return events_; }
  std::string event_log_csv() const;

 private:
  struct DeviceRecord {
    DeviceStatus status;
    double last_report = 0.0;
  };

  void log(double time, const std::string& event,
           const std::string& device_id, const std::string& task_id,
           const std::string& detail);
  static void validate(const DeviceStatus& status);

  OrchestratorConfig cfg_;
  ResourcePool pool_;
  std::map<std::string, DeviceRecord> devices_;
  std::map<std::string, Assignment> assignments_;
  std::map<std::string, ServiceEntry> services_;
  std::map<std::string, int> discover_counts_;
  std::vector<EventRecord> events_;
};

}  // namespace ztn::orch
