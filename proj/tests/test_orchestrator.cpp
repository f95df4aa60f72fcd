#include "ztn/orchestrator.hpp"

#include "doctest.h"
#include "ztn/rng.hpp"

using namespace ztn;
using namespace ztn::orch;

namespace {
DeviceStatus make_device(const std::string& id, double battery,
                         int workload = 0, double x = 0.0, double y = 0.0) {
  DeviceStatus d;
  d.device_id = id;
  d.kind = DeviceKind::Robot;
  d.position = {x, y, 0.0, 0.0};
  d.battery = battery;
  d.workload = workload;
  d.capabilities = {"pick", "move"};
  return d;
}
}  // namespace

TEST_CASE("register: fresh id, duplicate conflict, read-your-write") {
  Orchestrator o;
  CHECK(o.register_device(make_device("r1", 80.0), 0.0) ==
        RegistryStatus::Ok);
  CHECK(o.device_count() == 1);
  CHECK(o.register_device(make_device("r1", 90.0), 1.0) ==
        RegistryStatus::DuplicateId);
  CHECK(o.device_count() == 1);
  CHECK(o.device("r1")->battery == doctest::Approx(80.0));

  auto updated = make_device("r1", 55.0);
  CHECK(o.report_status("r1", updated, 2.0) == RegistryStatus::Ok);
  CHECK(o.device("r1")->battery == doctest::Approx(55.0));
}

TEST_CASE("report: stale timestamps rejected, state unchanged") {
  Orchestrator o;
  o.register_device(make_device("r1", 80.0), 5.0);
  CHECK(o.report_status("r1", make_device("r1", 70.0), 6.0) ==
        RegistryStatus::Ok);
  CHECK(o.last_report_time("r1") == doctest::Approx(6.0));
  CHECK(o.report_status("r1", make_device("r1", 10.0), 4.0) ==
        RegistryStatus::StaleTimestamp);
  CHECK(o.device("r1")->battery == doctest::Approx(70.0)); // unchanged
  CHECK(o.last_report_time("r1") == doctest::Approx(6.0));
  CHECK(o.report_status("ghost", make_device("ghost", 10.0), 9.0) ==
        RegistryStatus::UnknownDevice);
  // equal timestamp is allowed (non-decreasing)
  CHECK(o.report_status("r1", make_device("r1", 69.0), 6.0) ==
        RegistryStatus::Ok);
}

TEST_CASE("assign_task: battery wins, capability filter, tie break") {
  Orchestrator o;
  o.register_device(make_device("a", 50.0), 0.0);
  o.register_device(make_device("b", 90.0), 0.0);
  TaskRequest t;
  t.task_id = "t1";
  t.kind = "inspection";
  t.required_capability = "pick";
  auto out = o.assign_task(t, 1.0);
  REQUIRE(out.assignment.has_value());
  CHECK(out.assignment->device_id == "b"); // 0.9 > 0.5
  CHECK(out.assignment->score == doctest::Approx(0.9));
  CHECK(o.device("b")->workload == 1);

  // equal scores tie-break to lowest device_id
  Orchestrator o2;
  o2.register_device(make_device("x2", 75.0), 0.0);
  o2.register_device(make_device("x1", 75.0), 0.0);
  t.task_id = "t2";
  auto tie = o2.assign_task(t, 1.0);
  REQUIRE(tie.assignment.has_value());
  CHECK(tie.assignment->device_id == "x1");

  TaskRequest impossible;
  impossible.task_id = "t3";
  impossible.kind = "weld";
  impossible.required_capability = "weld";
  auto none = o.assign_task(impossible, 2.0);
  CHECK_FALSE(none.assignment.has_value());
  CHECK(none.reason.find("weld") != std::string::npos);
}

TEST_CASE("assign_task: workload and distance terms") {
  Orchestrator o;
  auto busy = make_device("busy", 80.0, 20); // workload capped at 10
  auto idle = make_device("idle", 80.0, 0);
  o.register_device(busy, 0.0);
  o.register_device(idle, 0.0);
  TaskRequest t;
  t.task_id = "t";
  t.kind = "k";
  t.required_capability = "pick";
  // busy: 0.8 - 0.5*1.0 = 0.3; idle: 0.8
  auto out = o.assign_task(t, 1.0);
  REQUIRE(out.assignment.has_value());
  CHECK(out.assignment->device_id == "idle");
  CHECK(o.score(busy, t) == doctest::Approx(0.3));

  TaskRequest located = t;
  located.location_hint = radio::Pose{70.710678118654755, 0.0, 0.0, 0.0};
  // distance from origin = field diagonal -> full 0.3 penalty
  CHECK(o.score(idle, located) == doctest::Approx(0.8 - 0.3));

  // argmax invariant to positive scaling of the score weights
  OrchestratorConfig scaled;
  scaled.w_battery *= 7.0;
  scaled.w_workload *= 7.0;
  scaled.w_distance *= 7.0;
  Orchestrator o3(scaled);
  o3.register_device(busy, 0.0);
  o3.register_device(idle, 0.0);
  auto out3 = o3.assign_task(t, 1.0);
  REQUIRE(out3.assignment.has_value());
  CHECK(out3.assignment->device_id == "idle");
}

TEST_CASE("allocate_resources: qos tiers and pool exhaustion") {
  OrchestratorConfig cfg;
  ResourcePool pool;
  pool.reserved_capacity = pool.reserved_free = 3;
  pool.besteffort_capacity = pool.besteffort_free = 4;
  Orchestrator o(cfg, pool);
  TaskRequest t;
  t.task_id = "u1";
  t.kind = "k";
  t.qos = QosClass::URLLC;
  auto urllc = o.allocate_resources(t, 0.0);
  REQUIRE(urllc.grant.has_value());
  CHECK(urllc.grant->tier == Tier::EdgeDU);
  CHECK(urllc.grant->from_reserved);
  CHECK(o.pool().reserved_free == 1);

  t.task_id = "u2";
  auto rejected = o.allocate_resources(t, 1.0); // 1 < 2 needed
  CHECK_FALSE(rejected.grant.has_value());
  CHECK(rejected.retry_after_s == doctest::Approx(1.0));
  CHECK(o.pool().reserved_free == 1); // unchanged

  t.task_id = "e1";
  t.qos = QosClass::eMBB;
  auto embb = o.allocate_resources(t, 2.0);
  REQUIRE(embb.grant.has_value());
  CHECK(embb.grant->tier == Tier::RegionalCU_RIC);
  CHECK(o.pool().besteffort_free == 1);

  t.task_id = "m1";
  t.qos = QosClass::mMTC;
  auto mmtc = o.allocate_resources(t, 3.0);
  REQUIRE(mmtc.grant.has_value());
  CHECK(mmtc.grant->prbs == 1);
  CHECK(o.pool().besteffort_free == 0);
}

TEST_CASE("allocate/release round trip is identity on registry + pool") {
  Orchestrator o;
  o.register_device(make_device("r1", 60.0), 0.0);
  const int workload_before = o.device("r1")->workload;
  const auto pool_before = o.pool();

  TaskRequest t;
  t.task_id = "job";
  t.kind = "k";
  t.required_capability = "move";
  t.qos = QosClass::URLLC;
  REQUIRE(o.assign_task(t, 1.0).assignment.has_value());
  REQUIRE(o.allocate_resources(t, 1.0).grant.has_value());
  CHECK(o.device("r1")->workload == workload_before + 1);
  CHECK(o.pool().reserved_free < pool_before.reserved_free);

  CHECK(o.release_task("job", 2.0));
  CHECK(o.device("r1")->workload == workload_before);
  CHECK(o.pool().reserved_free == pool_before.reserved_free);
  CHECK(o.pool().besteffort_free == pool_before.besteffort_free);
  CHECK_FALSE(o.release_task("job", 3.0)); // already released
}

TEST_CASE("pool never overdrafts under random operation sequences") {
  Rng rng(31337);
  Orchestrator o;
  for (int i = 0; i < 6; ++i)
    o.register_device(make_device("d" + std::to_string(i), 50.0 + i), 0.0);
  std::vector<std::string> live;
  int counter = 0;
  for (int op = 0; op < 3000; ++op) {
    const double t = op * 0.1;
    if (uniform01(rng) < 0.55 || live.empty()) {
      TaskRequest task;
      task.task_id = "task" + std::to_string(counter++);
      task.kind = "k";
      task.required_capability = "pick";
      task.qos = static_cast<QosClass>(uniform_index(rng, 3));
      auto a = o.assign_task(task, t);
      REQUIRE(a.assignment.has_value());
      auto g = o.allocate_resources(task, t);
      if (g.grant)
        live.push_back(task.task_id);
      else
        o.release_task(task.task_id, t);
    } else {
      const size_t pick = uniform_index(rng, live.size());
      o.release_task(live[pick], t);
      live.erase(live.begin() + static_cast<long>(pick));
    }
    CHECK(o.pool().reserved_free >= 0);
    CHECK(o.pool().reserved_free <= o.pool().reserved_capacity);
    CHECK(o.pool().besteffort_free >= 0);
    CHECK(o.pool().besteffort_free <= o.pool().besteffort_capacity);
  }
}

TEST_CASE("services: deploy, discover, caching") {
  Orchestrator o;
  ServiceEntry s;
  s.service_id = "vision";
  s.endpoint = "vision.fn";
  s.tier = Tier::CloudSMO;
  CHECK(o.deploy_service(s, 0.0));
  CHECK_FALSE(o.deploy_service(s, 1.0)); // duplicate

  CHECK_FALSE(o.discover_service("missing", 2.0).has_value());
  auto first = o.discover_service("vision", 3.0);
  REQUIRE(first.has_value());
  CHECK_FALSE(first->cached);
  auto second = o.discover_service("vision", 4.0);
  REQUIRE(second.has_value());
  CHECK(second->cached); // cached on second discovery
}

TEST_CASE("event log csv shape") {
  Orchestrator o;
  o.register_device(make_device("r1", 77.0), 0.5);
  const auto csv = o.event_log_csv();
  CHECK(csv.rfind("time,event,device_id,task_id,detail\n", 0) == 0);
  CHECK(csv.find("register,r1") != std::string::npos);
}
