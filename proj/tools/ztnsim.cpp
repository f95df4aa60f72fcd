// ztnsim: scenario runner for the zero-touch industrial radio network
// simulator.  Subcommands: train, eval, steer, orchestrate, gen-traffic.

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ztn/config.hpp"
#include "ztn/orchestrator.hpp"
#include "ztn/sim.hpp"
#include "ztn/trainer.hpp"
#include "ztn/traffic.hpp"
#include "ztn/util.hpp"

namespace fs = std::filesystem;
using namespace ztn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

sim::ScenarioConfig load_config(const CommonOpts& opts) {
  auto cfg = sim::parse_config_file(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + dir + ": " +
                             ec.message());
}

std::string policy_path(const std::string& dir, int ue) {
  return dir + "/policy_ue" + std::to_string(ue) + ".txt";
}

std::vector<rl::FactoredPolicy> load_policies(const std::string& dir,
                                              int n_ue) {
  std::vector<rl::FactoredPolicy> policies;
  for (int i = 0; i < n_ue; ++i) {
    const std::string path = policy_path(dir, i);
    if (!fs::exists(path))
      throw ConfigError("missing policy file: " + path +
                        " (run the train subcommand first)");
    policies.push_back(rl::load_policy_file(path));
  }
  return policies;
}

int cmd_train(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto result = rl::train(cfg);
  ensure_out_dir(opts.out_dir);
  for (size_t i = 0; i < result.policies.size(); ++i)
    rl::save_policy_file(result.policies[i],
                         policy_path(opts.out_dir, static_cast<int>(i)));
  write_file_atomic(opts.out_dir + "/learning_curve.csv",
                    rl::learning_curve_csv(result));
  log_info("trained " + std::to_string(result.policies.size()) +
           " agents over " + std::to_string(cfg.rl.episodes) + " episodes");
  std::cout << "train: wrote " << result.policies.size()
            << " policy files and learning_curve.csv to " << opts.out_dir
            << "\n";
  return kExitOk;
}

std::vector<std::uint64_t> eval_seeds(const sim::ScenarioConfig& cfg,
                                      const std::string& seeds_csv,
                                      int num_seeds) {
  std::vector<std::uint64_t> seeds;
  if (!seeds_csv.empty()) {
    for (const auto& part : split(seeds_csv, ','))
      seeds.push_back(std::stoull(part));
  } else {
    for (int i = 0; i < num_seeds; ++i) seeds.push_back(cfg.seed + i);
  }
  return seeds;
}

int cmd_eval(const CommonOpts& opts, const std::string& policies_csv,
             const std::string& seeds_csv, int num_seeds,
             const std::string& policy_dir) {
  const auto cfg = load_config(opts);
  std::vector<rl::PolicyKind> kinds;
  for (const auto& name : split(policies_csv, ','))
    kinds.push_back(rl::policy_kind_from_string(name));
  const auto seeds = eval_seeds(cfg, seeds_csv, num_seeds);

  std::vector<rl::FactoredPolicy> learned;
  const bool needs_learned =
      std::count(kinds.begin(), kinds.end(), rl::PolicyKind::Learned) > 0;
  if (needs_learned)
    learned = load_policies(policy_dir.empty() ? opts.out_dir : policy_dir,
                            cfg.n_ue);

  const auto table = sim::compare_policies(cfg, kinds, seeds, learned);
  ensure_out_dir(opts.out_dir);
  write_file_atomic(opts.out_dir + "/comparison.csv",
                    sim::comparison_csv(table));
  write_file_atomic(opts.out_dir + "/comparison_wins.csv",
                    sim::comparison_wins_csv(table));
  std::cout << "eval: " << table.rows.size() << " runs ("
            << kinds.size() << " policies x " << seeds.size()
            << " seeds) -> comparison.csv\n";
  return kExitOk;
}

int cmd_steer(const CommonOpts& opts, bool strict_reservation) {
  const auto cfg = load_config(opts);

  std::vector<traffic::PacketEvent> packets;
  if (!cfg.traffic.trace_file.empty()) {
    packets = traffic::ingest_trace(cfg.traffic.trace_file);
  } else {
    Rng traffic_rng(cfg.stream_seed("traffic", cfg.seeds.traffic));
    packets = traffic::generate_mixed_trace(
                  cfg.traffic.flows, cfg.duration_ttis * cfg.tti_s(),
                  traffic_rng)
                  .packets;
  }
  if (packets.empty()) throw ConfigError("steer: empty packet trace");

  Rng classifier_rng(cfg.stream_seed("classifier", cfg.seeds.classifier));
  const auto model = sim::fit_scenario_classifier(
      cfg.steering.classifier_train_flows, classifier_rng);

  const double last_arrival = packets.back().arrival_time;
  const long ttis = std::max<long>(
      cfg.duration_ttis,
      static_cast<long>(std::ceil(last_arrival / cfg.tti_s())) + 1);

  traffic::SchedulerConfig fifo = cfg.steering.scheduler;
  fifo.reserved_prbs = 0; // plain FIFO over all packets
  fifo.work_conserving = true;
  traffic::SchedulerConfig wc = cfg.steering.scheduler;
  wc.work_conserving = true;
  traffic::SchedulerConfig strict = cfg.steering.scheduler;
  strict.work_conserving = false;

  const auto window = cfg.steering.classifier_window_s;
  const auto before =
      sim::run_steering(packets, model, fifo, window, cfg.tti_s(), ttis);
  const auto after_wc =
      sim::run_steering(packets, model, wc, window, cfg.tti_s(), ttis);
  const auto after_strict =
      sim::run_steering(packets, model, strict, window, cfg.tti_s(), ttis);

  std::ostringstream report;
  report << "mode,class,mean_ms_off,mean_ms_on,p95_ms_off,p95_ms_on,"
            "mean_ratio,backlog_off,backlog_on\n";
  auto emit = [&](const std::string& mode, const sim::SteerResult& on) {
    for (int c = 0; c < traffic::kNumClasses; ++c) {
      const auto& off_row = before.report[c];
      const auto& on_row = on.report[c];
      const double ratio =
          off_row.mean_ms > 0.0 ? on_row.mean_ms / off_row.mean_ms : 0.0;
      report << mode << ","
             << traffic::to_string(static_cast<traffic::ServiceClass>(c))
             << "," << format_double(off_row.mean_ms) << ","
             << format_double(on_row.mean_ms) << ","
             << format_double(off_row.p95_ms) << ","
             << format_double(on_row.p95_ms) << "," << format_double(ratio)
             << "," << off_row.backlog << "," << on_row.backlog << "\n";
    }
  };
  emit("work_conserving", after_wc);
  emit("strict", after_strict);

  ensure_out_dir(opts.out_dir);
  write_file_atomic(opts.out_dir + "/steer_report.csv", report.str());
  write_file_atomic(opts.out_dir + "/latency_before.csv",
                    traffic::latency_report_csv(before.report));
  const auto& primary = strict_reservation ? after_strict : after_wc;
  write_file_atomic(opts.out_dir + "/latency_after.csv",
                    traffic::latency_report_csv(primary.report));
  std::cout << "steer: " << packets.size() << " packets, "
            << before.grants << " FIFO grants vs " << primary.grants
            << " steered grants -> steer_report.csv\n";
  return kExitOk;
}

orch::DeviceStatus parse_fleet_row(const std::vector<std::string>& fields,
                                   int lineno) {
  if (fields.size() != 7)
    throw ParseError("fleet row needs 7 fields "
                     "(device_id,kind,x,y,battery,capabilities,models)",
                     lineno);
  orch::DeviceStatus d;
  d.device_id = fields[0];
  d.kind = orch::device_kind_from_string(fields[1]);
  d.position.x = std::stod(fields[2]);
  d.position.y = std::stod(fields[3]);
  d.battery = std::stod(fields[4]);
  for (const auto& cap : split(fields[5], ';'))
    if (!cap.empty()) d.capabilities.insert(cap);
  for (const auto& m : split(fields[6], ';'))
    if (!m.empty()) d.learnt_models.insert(m);
  return d;
}

int cmd_orchestrate(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  if (cfg.orchestrator.fleet_file.empty())
    throw ConfigError("orchestrator.fleet_file: required for orchestrate");
  if (cfg.orchestrator.tasks_file.empty())
    throw ConfigError("orchestrator.tasks_file: required for orchestrate");

  orch::Orchestrator orchestrator(cfg.orchestrator.cfg,
                                  cfg.orchestrator.pool);

  std::istringstream fleet(read_file(cfg.orchestrator.fleet_file));
  std::string line;
  int lineno = 0;
  while (std::getline(fleet, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    if (lineno == 1 && line.rfind("device_id,", 0) == 0) continue;
    const auto device = parse_fleet_row(split(line, ','), lineno);
    if (orchestrator.register_device(device, 0.0) != orch::RegistryStatus::Ok)
      throw ConfigError("duplicate device in fleet: " + device.device_id);
  }
  if (orchestrator.device_count() == 0)
    throw ConfigError("fleet file has no devices: " +
                      cfg.orchestrator.fleet_file);

  std::istringstream tasks(read_file(cfg.orchestrator.tasks_file));
  lineno = 0;
  while (std::getline(tasks, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    if (lineno == 1 && line.rfind("time,", 0) == 0) continue;
    const auto fields = split(line, ',');
    if (fields.size() < 3)
      throw ParseError("task row needs at least time,event,task_id", lineno);
    const double time = std::stod(fields[0]);
    const std::string& event = fields[1];
    if (event == "release") {
      orchestrator.release_task(fields[2], time);
      continue;
    }
    if (event != "assign")
      throw ParseError("unknown task event: " + event, lineno);
    if (fields.size() != 8)
      throw ParseError("assign row needs "
                       "time,event,task_id,kind,capability,qos,x,y",
                       lineno);
    orch::TaskRequest task;
    task.task_id = fields[2];
    task.kind = fields[3];
    task.required_capability = fields[4];
    task.qos = orch::qos_from_string(fields[5]);
    if (!fields[6].empty() && !fields[7].empty()) {
      radio::Pose hint;
      hint.x = std::stod(fields[6]);
      hint.y = std::stod(fields[7]);
      task.location_hint = hint;
    }
    const auto outcome = orchestrator.assign_task(task, time);
    if (outcome.assignment) orchestrator.allocate_resources(task, time);
    // a task with no candidate is a business outcome, not a failure
  }

  ensure_out_dir(opts.out_dir);
  write_file_atomic(opts.out_dir + "/events.csv",
                    orchestrator.event_log_csv());
  std::cout << "orchestrate: " << orchestrator.device_count()
            << " devices, " << orchestrator.events().size()
            << " events -> events.csv\n";
  return kExitOk;
}

int cmd_gen_traffic(const CommonOpts& opts) {
  const auto cfg = load_config(opts);
  Rng rng(cfg.stream_seed("traffic", cfg.seeds.traffic));
  const auto trace = traffic::generate_mixed_trace(
      cfg.traffic.flows, cfg.duration_ttis * cfg.tti_s(), rng);
  ensure_out_dir(opts.out_dir);
  write_file_atomic(opts.out_dir + "/trace.csv",
                    traffic::trace_to_csv(trace.packets));
  std::ostringstream labels;
  labels << "flow_id,class\n";
  for (const auto& [flow, cls] : trace.truth)
    labels << flow << "," << traffic::to_string(cls) << "\n";
  write_file_atomic(opts.out_dir + "/trace_labels.csv", labels.str());
  std::cout << "gen-traffic: " << trace.packets.size() << " packets from "
            << trace.truth.size() << " flows -> trace.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-touch industrial radio network simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "scenario configuration")
        ->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "override the scenario seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
  };

  auto* train = app.add_subcommand("train", "train per-UE agents");
  add_common(train);

  auto* eval = app.add_subcommand("eval", "compare policies across seeds");
  add_common(eval);
  std::string policies_csv = "learned,lookup,random";
  std::string seeds_csv;
  std::string policy_dir;
  int num_seeds = 10;
  eval->add_option("--policies", policies_csv,
                   "comma-separated policy kinds to compare");
  eval->add_option("--seeds", seeds_csv, "explicit comma-separated seeds");
  eval->add_option("--num-seeds", num_seeds,
                   "number of consecutive seeds starting at the config seed");
  eval->add_option("--policy-dir", policy_dir,
                   "directory with trained policy files (default: --out)");

  auto* steer = app.add_subcommand("steer", "traffic steering before/after");
  add_common(steer);
  bool strict_reservation = false;
  steer->add_flag("--strict-reservation", strict_reservation,
                  "use strict (non-work-conserving) reservation for the "
                  "primary after-report");

  auto* orchestrate =
      app.add_subcommand("orchestrate", "replay a task-request script");
  add_common(orchestrate);

  auto* gen = app.add_subcommand("gen-traffic", "emit a synthetic trace CSV");
  add_common(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (train->parsed()) return cmd_train(opts);
    if (eval->parsed())
      return cmd_eval(opts, policies_csv, seeds_csv, num_seeds, policy_dir);
    if (steer->parsed()) return cmd_steer(opts, strict_reservation);
    if (orchestrate->parsed()) return cmd_orchestrate(opts);
    if (gen->parsed()) return cmd_gen_traffic(opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
