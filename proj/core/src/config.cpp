#include "ztn/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "ztn/rng.hpp"
#include "ztn/util.hpp"

namespace ztn::sim {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

template <size_t N>
std::array<double, N> to_double_array(const std::string& key,
                                      const std::string& v) {
  auto parts = split(v, ',');
  if (parts.size() != N)
    throw ConfigError(key + ": expected " + std::to_string(N) +
                      " comma-separated values, got " +
                      std::to_string(parts.size()));
  std::array<double, N> out{};
  for (size_t i = 0; i < N; ++i) out[i] = to_double(key, trim(parts[i]));
  return out;
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  if (p.empty() || p.front() == '/') return p;
  return base_dir + "/" + p;
}

}  // namespace

std::uint64_t ScenarioConfig::stream_seed(
    std::string_view tag, std::optional<std::uint64_t> override_seed) const {
  if (override_seed) return *override_seed;
  return derive_seed(seed, tag);
}

void ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  check(n_ue >= 1, "scenario.n_ue: must be >= 1");
  check(n_ap >= 1, "scenario.n_ap: must be >= 1");
  check(tti_ms > 0.0, "scenario.tti_ms: must be > 0");
  check(duration_ttis >= 0, "scenario.duration_ttis: must be >= 0");
  check(kpi_report_period_ttis >= 1,
        "scenario.kpi_report_period_ttis: must be >= 1");

  check(radio.bler.slope > 0.0, "radio.bler_slope: must be > 0");
  for (int m = 1; m < radio::kNumMcs; ++m)
    if (!(radio.bler.thresholds[m] > radio.bler.thresholds[m - 1])) {
      errors.push_back(
          "radio.bler_thresholds: must be strictly increasing in MCS");
      break;
    }
  check(radio.bler.shadowing_sigma >= 0.0,
        "radio.shadowing_sigma_db: must be >= 0");
  check(radio.bler.shadowing_rho >= 0.0 && radio.bler.shadowing_rho < 1.0,
        "radio.shadowing_rho: must be in [0,1)");
  check(radio.ap_height_m >= 0.0, "radio.ap_height_m: must be >= 0");
  check(radio.field.width > 0.0, "radio.field_width_m: must be > 0");
  check(radio.field.height > 0.0, "radio.field_height_m: must be > 0");
  check(radio.ue_speed_kmh >= 0.0, "radio.ue_speed_kmh: must be >= 0");
  check(radio.turn_rate_per_s >= 0.0, "radio.turn_rate_per_s: must be >= 0");
  check(radio.prbs_per_ue >= 0, "radio.prbs_per_ue: must be >= 0");

  check(rl.alpha >= 0.0 && rl.alpha <= 1.0, "rl.alpha: must be in [0,1]");
  check(rl.gamma >= 0.0 && rl.gamma < 1.0, "rl.gamma: must be in [0,1)");
  check(rl.epsilon_start >= 0.0 && rl.epsilon_start <= 1.0,
        "rl.epsilon_start: must be in [0,1]");
  check(rl.epsilon_end >= 0.0 && rl.epsilon_end <= 1.0,
        "rl.epsilon_end: must be in [0,1]");
  check(rl.epsilon_decay_fraction > 0.0 && rl.epsilon_decay_fraction <= 1.0,
        "rl.epsilon_decay_fraction: must be in (0,1]");
  check(rl.episodes >= 0, "rl.episodes: must be >= 0");
  check(rl.episode_ttis >= 1, "rl.episode_ttis: must be >= 1");

  check(reward.bler >= 0.0, "reward.w_bler: must be >= 0");
  check(reward.latency >= 0.0, "reward.w_latency: must be >= 0");
  check(reward.throughput >= 0.0, "reward.w_throughput: must be >= 0");
  check(norms.latency_ms > 0.0, "reward.latency_norm_ms: must be > 0");
  check(norms.throughput_kbps > 0.0,
        "reward.throughput_norm_kbps: must be > 0");

  check(steering.scheduler.total_prbs >= 0,
        "steering.total_prbs: must be >= 0");
  check(steering.scheduler.reserved_prbs >= 0,
        "steering.reserved_prbs: must be >= 0");
  if (steering.scheduler.reserved_prbs > steering.scheduler.total_prbs)
    errors.push_back("steering.reserved_prbs: reserved_prbs (" +
                     std::to_string(steering.scheduler.reserved_prbs) +
                     ") exceeds total_prbs (" +
                     std::to_string(steering.scheduler.total_prbs) + ")");
  check(steering.classifier_window_s > 0.0,
        "steering.classifier_window_s: must be > 0");
  check(steering.classifier_train_flows >= 1,
        "steering.classifier_train_flows: must be >= 1");

  for (int c = 0; c < traffic::kNumClasses; ++c)
    if (traffic.flows[c] < 0) {
      errors.push_back("traffic: flow counts must be >= 0");
      break;
    }

  check(orchestrator.cfg.workload_cap >= 1,
        "orchestrator.workload_cap: must be >= 1");
  check(orchestrator.pool.reserved_capacity >= 0 &&
            orchestrator.pool.besteffort_capacity >= 0,
        "orchestrator: pool capacities must be >= 0");

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

ScenarioConfig parse_config(const std::string& text,
                            const std::string& base_dir) {
  ScenarioConfig cfg;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> setters;
  auto set_d = [&](const std::string& path, double* dst) {
    setters[path] = [dst](const std::string& k, const std::string& v) {
      *dst = to_double(k, v);
    };
  };
  auto set_i = [&](const std::string& path, int* dst) {
    setters[path] = [dst](const std::string& k, const std::string& v) {
      *dst = static_cast<int>(to_long(k, v));
    };
  };
  auto set_l = [&](const std::string& path, long* dst) {
    setters[path] = [dst](const std::string& k, const std::string& v) {
      *dst = to_long(k, v);
    };
  };
  auto set_b = [&](const std::string& path, bool* dst) {
    setters[path] = [dst](const std::string& k, const std::string& v) {
      *dst = to_bool(k, v);
    };
  };
  auto set_path = [&](const std::string& path, std::string* dst) {
    setters[path] = [dst, base_dir](const std::string&, const std::string& v) {
      *dst = resolve_path(base_dir, v);
    };
  };
  auto set_seed = [&](const std::string& path,
                      std::optional<std::uint64_t>* dst) {
    setters[path] = [dst](const std::string& k, const std::string& v) {
      *dst = to_u64(k, v);
    };
  };

  setters["scenario.seed"] = [&cfg](const std::string& k,
                                    const std::string& v) {
    cfg.seed = to_u64(k, v);
  };
  set_i("scenario.n_ue", &cfg.n_ue);
  set_i("scenario.n_ap", &cfg.n_ap);
  set_d("scenario.tti_ms", &cfg.tti_ms);
  set_l("scenario.duration_ttis", &cfg.duration_ttis);
  set_i("scenario.kpi_report_period_ttis", &cfg.kpi_report_period_ttis);
  setters["scenario.policy"] = [&cfg](const std::string& k,
                                      const std::string& v) {
    try {
      cfg.policy = rl::policy_kind_from_string(v);
    } catch (const ConfigError&) {
      throw ConfigError(k + ": expected learned|lookup|random, got '" + v +
                        "'");
    }
  };

  set_d("radio.tx_power_dbm", &cfg.radio.tx_power_dbm);
  set_d("radio.noise_floor_dbm", &cfg.radio.noise_floor_dbm);
  set_d("radio.bler_slope", &cfg.radio.bler.slope);
  setters["radio.bler_thresholds"] = [&cfg](const std::string& k,
                                            const std::string& v) {
    cfg.radio.bler.thresholds = to_double_array<radio::kNumMcs>(k, v);
  };
  set_d("radio.shadowing_sigma_db", &cfg.radio.bler.shadowing_sigma);
  set_d("radio.shadowing_rho", &cfg.radio.bler.shadowing_rho);
  setters["radio.rate_table_kbps"] = [&cfg](const std::string& k,
                                            const std::string& v) {
    cfg.radio.rate_table = to_double_array<radio::kNumMcs>(k, v);
  };
  set_d("radio.ap_height_m", &cfg.radio.ap_height_m);
  set_d("radio.field_width_m", &cfg.radio.field.width);
  set_d("radio.field_height_m", &cfg.radio.field.height);
  set_d("radio.ue_speed_kmh", &cfg.radio.ue_speed_kmh);
  set_d("radio.turn_rate_per_s", &cfg.radio.turn_rate_per_s);
  set_i("radio.prbs_per_ue", &cfg.radio.prbs_per_ue);
  set_d("radio.fixed_snr_db", &cfg.radio.fixed_snr_db);

  set_d("rl.alpha", &cfg.rl.alpha);
  set_d("rl.gamma", &cfg.rl.gamma);
  set_d("rl.epsilon_start", &cfg.rl.epsilon_start);
  set_d("rl.epsilon_end", &cfg.rl.epsilon_end);
  set_d("rl.epsilon_decay_fraction", &cfg.rl.epsilon_decay_fraction);
  set_l("rl.episodes", &cfg.rl.episodes);
  set_l("rl.episode_ttis", &cfg.rl.episode_ttis);
  set_d("rl.lookup_margin_db", &cfg.rl.lookup_margin_db);

  set_d("reward.w_bler", &cfg.reward.bler);
  set_d("reward.w_latency", &cfg.reward.latency);
  set_d("reward.w_throughput", &cfg.reward.throughput);
  set_d("reward.latency_norm_ms", &cfg.norms.latency_ms);
  set_d("reward.throughput_norm_kbps", &cfg.norms.throughput_kbps);

  set_i("steering.total_prbs", &cfg.steering.scheduler.total_prbs);
  set_i("steering.reserved_prbs", &cfg.steering.scheduler.reserved_prbs);
  setters["steering.target_classes"] = [&cfg](const std::string& k,
                                              const std::string& v) {
    cfg.steering.scheduler.target = {false, false, false, false};
    for (const auto& part : split(v, ',')) {
      const long c = to_long(k, trim(part));
      if (c < 0 || c >= traffic::kNumClasses)
        throw ConfigError(k + ": class id " + std::to_string(c) +
                          " outside [0,3]");
      cfg.steering.scheduler.target[c] = true;
    }
  };
  set_b("steering.work_conserving", &cfg.steering.scheduler.work_conserving);
  set_d("steering.classifier_window_s", &cfg.steering.classifier_window_s);
  set_i("steering.classifier_train_flows",
        &cfg.steering.classifier_train_flows);

  set_i("traffic.voice_flows", &cfg.traffic.flows[0]);
  set_i("traffic.interactive_flows", &cfg.traffic.flows[1]);
  set_i("traffic.streaming_flows", &cfg.traffic.flows[2]);
  set_i("traffic.bulk_flows", &cfg.traffic.flows[3]);
  set_path("traffic.trace_file", &cfg.traffic.trace_file);

  set_path("orchestrator.fleet_file", &cfg.orchestrator.fleet_file);
  set_path("orchestrator.tasks_file", &cfg.orchestrator.tasks_file);
  set_d("orchestrator.w_battery", &cfg.orchestrator.cfg.w_battery);
  set_d("orchestrator.w_workload", &cfg.orchestrator.cfg.w_workload);
  set_d("orchestrator.w_distance", &cfg.orchestrator.cfg.w_distance);
  set_i("orchestrator.workload_cap", &cfg.orchestrator.cfg.workload_cap);
  set_i("orchestrator.urllc_prbs", &cfg.orchestrator.cfg.urllc_prbs);
  set_i("orchestrator.embb_prbs", &cfg.orchestrator.cfg.embb_prbs);
  set_i("orchestrator.mmtc_prbs", &cfg.orchestrator.cfg.mmtc_prbs);
  set_d("orchestrator.retry_after_s", &cfg.orchestrator.cfg.retry_after_s);
  setters["orchestrator.reserved_pool"] = [&cfg](const std::string& k,
                                                 const std::string& v) {
    const int n = static_cast<int>(to_long(k, v));
    cfg.orchestrator.pool.reserved_capacity = n;
    cfg.orchestrator.pool.reserved_free = n;
  };
  setters["orchestrator.besteffort_pool"] = [&cfg](const std::string& k,
                                                   const std::string& v) {
    const int n = static_cast<int>(to_long(k, v));
    cfg.orchestrator.pool.besteffort_capacity = n;
    cfg.orchestrator.pool.besteffort_free = n;
  };

  set_seed("seeds.mobility", &cfg.seeds.mobility);
  set_seed("seeds.shadowing", &cfg.seeds.shadowing);
  set_seed("seeds.traffic", &cfg.seeds.traffic);
  set_seed("seeds.policy", &cfg.seeds.policy);
  set_seed("seeds.harq", &cfg.seeds.harq);
  set_seed("seeds.classifier", &cfg.seeds.classifier);

  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  static const std::set<std::string> kSections = {
      "scenario", "radio", "rl",       "reward",
      "steering", "traffic", "orchestrator", "seeds"};
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section))
        throw ConfigError("unknown section: [" + section + "]");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("key '" + key + "' appears before any [section]");
    const std::string path = section + "." + key;
    auto it = setters.find(path);
    if (it == setters.end()) throw ConfigError("unknown key: " + path);
    it->second(path, value);
  }

  cfg.orchestrator.cfg.field_diagonal_m = cfg.radio.field.diagonal();
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  std::string dir = ".";
  const size_t slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return parse_config(text, dir);
}

}  // namespace ztn::sim
