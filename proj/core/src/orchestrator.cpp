#include "ztn/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ztn/util.hpp"

namespace ztn::orch {

std::string to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::Robot: return "robot";
    case DeviceKind::RoboticArm: return "robotic_arm";
    case DeviceKind::AGV: return "agv";
  }
  return "?";
}

std::string to_string(QosClass q) {
  switch (q) {
    case QosClass::eMBB: return "embb";
    case QosClass::URLLC: return "urllc";
    case QosClass::mMTC: return "mmtc";
  }
  return "?";
}

std::string to_string(Tier t) {
  switch (t) {
    case Tier::EdgeDU: return "edge_du";
    case Tier::RegionalCU_RIC: return "regional_cu_ric";
    case Tier::CloudSMO: return "cloud_smo";
  }
  return "?";
}

DeviceKind device_kind_from_string(const std::string& s) {
  if (s == "robot") return DeviceKind::Robot;
  if (s == "robotic_arm") return DeviceKind::RoboticArm;
  if (s == "agv") return DeviceKind::AGV;
  throw ConfigError("unknown device kind: " + s);
}

QosClass qos_from_string(const std::string& s) {
  if (s == "embb") return QosClass::eMBB;
  if (s == "urllc") return QosClass::URLLC;
  if (s == "mmtc") return QosClass::mMTC;
  throw ConfigError("unknown qos class: " + s);
}

Orchestrator::Orchestrator(OrchestratorConfig cfg, ResourcePool pool)
    : cfg_(cfg), pool_(pool) {}

void Orchestrator::validate(const DeviceStatus& status) {
  if (status.device_id.empty())
    throw std::invalid_argument("device_id must be nonempty");
  if (!(status.battery >= 0.0 && status.battery <= 100.0))
    throw std::invalid_argument("battery outside [0,100] for " +
                                status.device_id);
  if (status.workload < 0)
    throw std::invalid_argument("workload must be >= 0 for " +
                                status.device_id);
}

void Orchestrator::log(double time, const std::string& event,
                       const std::string& device_id,
                       const std::string& task_id, const std::string& detail) {
  events_.push_back({time, event, device_id, task_id, detail});
}

RegistryStatus Orchestrator::register_device(const DeviceStatus& status,
                                             double time) {
  validate(status);
  if (devices_.count(status.device_id)) {
    log(time, "register_conflict", status.device_id, "", "duplicate id");
    return RegistryStatus::DuplicateId;
  }
  devices_[status.device_id] = {status, time};
  log(time, "register", status.device_id, "", to_string(status.kind));
  return RegistryStatus::Ok;
}

RegistryStatus Orchestrator::report_status(const std::string& device_id,
                                           const DeviceStatus& status,
                                           double time) {
  validate(status);
  auto it = devices_.find(device_id);
  if (it == devices_.end()) {
    log(time, "report_unknown", device_id, "", "");
    return RegistryStatus::UnknownDevice;
  }
  if (time < it->second.last_report) {
    log(time, "report_stale", device_id, "", "");
    return RegistryStatus::StaleTimestamp;
  }
  it->second.status = status;
  it->second.status.device_id = device_id;
  it->second.last_report = time;
  log(time, "report", device_id, "", "battery=" + format_double(status.battery));
  return RegistryStatus::Ok;
}

double Orchestrator::score(const DeviceStatus& device,
                           const TaskRequest& task) const {
  double s = cfg_.w_battery * (device.battery / 100.0);
  const double capped =
      std::min(device.workload, cfg_.workload_cap) /
      static_cast<double>(cfg_.workload_cap);
  s -= cfg_.w_workload * capped;
  if (task.location_hint) {
    const double dx = device.position.x - task.location_hint->x;
    const double dy = device.position.y - task.location_hint->y;
    s -= cfg_.w_distance * std::sqrt(dx * dx + dy * dy) /
         cfg_.field_diagonal_m;
  }
  return s;
}

AssignOutcome Orchestrator::assign_task(const TaskRequest& task, double time) {
  if (task.kind.empty()) throw std::invalid_argument("task kind is empty");
  const DeviceRecord* best = nullptr;
  double best_score = 0.0;
  for (const auto& [id, rec] : devices_) {
    if (!rec.status.capabilities.count(task.required_capability)) continue;
    const double s = score(rec.status, task);
    // std::map iteration is id-ordered, so strict > keeps the lowest id
    // on ties.
    if (!best || s > best_score) {
      best = &rec;
      best_score = s;
    }
  }
  if (!best) {
    log(time, "no_candidate", "", task.task_id,
        "capability=" + task.required_capability);
    return {std::nullopt, "no device with capability " +
                              task.required_capability};
  }
  Assignment a;
  a.task_id = task.task_id;
  a.device_id = best->status.device_id;
  a.score = best_score;
  devices_[a.device_id].status.workload += 1;
  assignments_[task.task_id] = a;
  log(time, "assign", a.device_id, task.task_id,
      "score=" + format_double(best_score));
  return {a, ""};
}

AllocOutcome Orchestrator::allocate_resources(const TaskRequest& task,
                                              double time) {
  ResourceGrant g;
  g.qos = task.qos;
  int* pool_free = nullptr;
  switch (task.qos) {
    case QosClass::URLLC:
      g.prbs = cfg_.urllc_prbs;
      g.tier = Tier::EdgeDU;
      g.from_reserved = true;
      pool_free = &pool_.reserved_free;
      break;
    case QosClass::eMBB:
      g.prbs = cfg_.embb_prbs;
      g.tier = Tier::RegionalCU_RIC;
      pool_free = &pool_.besteffort_free;
      break;
    case QosClass::mMTC:
      g.prbs = cfg_.mmtc_prbs;
      g.tier = Tier::CloudSMO;
      pool_free = &pool_.besteffort_free;
      break;
  }
  if (*pool_free < g.prbs) {
    log(time, "alloc_reject", "", task.task_id,
        "retry_after_s=" + format_double(cfg_.retry_after_s));
    return {std::nullopt, cfg_.retry_after_s};
  }
  *pool_free -= g.prbs;
  auto it = assignments_.find(task.task_id);
  if (it != assignments_.end()) it->second.grant = g;
  log(time, "alloc", "", task.task_id,
      to_string(g.tier) + " prbs=" + std::to_string(g.prbs));
  return {g, 0.0};
}

bool Orchestrator::release_task(const std::string& task_id, double time) {
  auto it = assignments_.find(task_id);
  if (it == assignments_.end()) {
    log(time, "release_unknown", "", task_id, "");
    return false;
  }
  auto dev = devices_.find(it->second.device_id);
  if (dev != devices_.end() && dev->second.status.workload > 0)
    dev->second.status.workload -= 1;
  if (it->second.grant) {
    const auto& g = *it->second.grant;
    (g.from_reserved ? pool_.reserved_free : pool_.besteffort_free) += g.prbs;
  }
  log(time, "release", it->second.device_id, task_id, "");
  assignments_.erase(it);
  return true;
}

bool Orchestrator::deploy_service(const ServiceEntry& entry, double time) {
  if (services_.count(entry.service_id)) {
    log(time, "deploy_conflict", "", entry.service_id, "");
    return false;
  }
  ServiceEntry e = entry;
  e.cached = false;
  services_[entry.service_id] = e;
  discover_counts_[entry.service_id] = 0;
  log(time, "deploy", "", entry.service_id, to_string(entry.tier));
  return true;
}

std::optional<ServiceEntry> Orchestrator::discover_service(
    const std::string& service_id, double time) {
  auto it = services_.find(service_id);
  if (it == services_.end()) {
    log(time, "discover_miss", "", service_id, "");
    return std::nullopt;
  }
  int& count = discover_counts_[service_id];
  ++count;
  if (count >= 2) it->second.cached = true;
  log(time, "discover", "", service_id,
      it->second.cached ? "cached" : "fresh");
  return it->second;
}

const DeviceStatus* Orchestrator::device(const std::string& id) const {
  auto it = devices_.find(id);
  return it == devices_.end() ? nullptr : &it->second.status;
}

double Orchestrator::last_report_time(const std::string& id) const {
  auto it = devices_.find(id);
  return it == devices_.end() ? -1.0 : it->second.last_report;
}

const Assignment* Orchestrator::assignment(const std::string& task_id) const {
  auto it = assignments_.find(task_id);
  return it == assignments_.end() ? nullptr : &it->second;
}

std::string Orchestrator::event_log_csv() const {
  std::ostringstream out;
  out << "time,event,device_id,task_id,detail\n";
  for (const auto& e : events_) {
    out << format_double(e.time) << "," << e.event << "," << e.device_id
        << "," << e.task_id << "," << e.detail << "\n";
  }
  return out.str();
}

}  // namespace ztn::orch
