#include "ztn/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ztn/util.hpp"

namespace ztn::rl {

namespace {

bool strictly_increasing(const std::vector<double>& v) {
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

int argmax_lowest(const double* q, int n) {
  int best = 0;
  for (int a = 1; a < n; ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

int head_select(const double* q, int n, double epsilon, Rng& rng) {
  if (uniform01(rng) < epsilon) return static_cast<int>(uniform_index(rng, n));
  return argmax_lowest(q, n);
}

double head_max(const double* q, int n) {
  return *std::max_element(q, q + n);
}

void head_update(std::vector<double>& table, int state, int action, int n,
                 double alpha, double gamma, double r, int next_state) {
  double* row = table.data() + static_cast<size_t>(state) * n;
  const double* next_row = table.data() + static_cast<size_t>(next_state) * n;
  const double target = r + gamma * head_max(next_row, n);
  row[action] += alpha * (target - row[action]);
}

constexpr int kMcsStates = kSnrBins * kBlerBins;
constexpr int kHarqStates = kBlerBins * kLatencyBins * kThroughputBins;

}  // namespace

BinEdges BinEdges::defaults() {
  BinEdges e;
  for (int k = 0; k < kSnrBins - 1; ++k) e.snr.push_back(-16.0 + 4.0 * k);
  for (int k = 1; k < kBlerBins; ++k) e.bler.push_back(k / 8.0);
  e.latency = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  e.throughput = {5.0, 12.0, 30.0, 75.0, 190.0, 470.0, 1200.0};
  return e;
}

bool BinEdges::valid() const {
  return snr.size() == kSnrBins - 1 && bler.size() == kBlerBins - 1 &&
         latency.size() == kLatencyBins - 1 &&
         throughput.size() == kThroughputBins - 1 &&
         strictly_increasing(snr) && strictly_increasing(bler) &&
         strictly_increasing(latency) && strictly_increasing(throughput);
}

int bin_index(double value, const std::vector<double>& edges) {
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<int>(it - edges.begin());
}

StateBin quantize(const radio::LinkKpi& kpi, const BinEdges& edges) {
  if (!edges.valid()) throw std::invalid_argument("invalid bin edges");
  StateBin s;
  s.snr = bin_index(kpi.snr_db, edges.snr);
  s.bler = bin_index(kpi.bler, edges.bler);
  s.latency = bin_index(kpi.latency_ms, edges.latency);
  s.throughput = bin_index(kpi.throughput_kbps, edges.throughput);
  return s;
}

FactoredPolicy FactoredPolicy::make(double epsilon, double alpha,
                                    double gamma) {
  FactoredPolicy p;
  p.epsilon = epsilon;
  p.alpha = alpha;
  p.gamma = gamma;
  p.q_mcs.assign(static_cast<size_t>(kMcsStates) * radio::kNumMcs, 0.0);
  p.q_rep.assign(static_cast<size_t>(kMcsStates) * radio::kNumRepetition, 0.0);
  p.q_harq.assign(static_cast<size_t>(kHarqStates) * radio::kNumHarq, 0.0);
  return p;
}

bool FactoredPolicy::valid() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) return false;
  if (!(alpha >= 0.0 && alpha <= 1.0)) return false;
  if (!(gamma >= 0.0 && gamma < 1.0)) return false;
  if (q_mcs.size() != static_cast<size_t>(kMcsStates) * radio::kNumMcs)
    return false;
  if (q_rep.size() != static_cast<size_t>(kMcsStates) * radio::kNumRepetition)
    return false;
  if (q_harq.size() != static_cast<size_t>(kHarqStates) * radio::kNumHarq)
    return false;
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  return finite(q_mcs) && finite(q_rep) && finite(q_harq);
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Learned: return "learned";
    case PolicyKind::LookupTable: return "lookup";
    case PolicyKind::Random: return "random";
  }
  return "?";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "learned") return PolicyKind::Learned;
  if (s == "lookup") return PolicyKind::LookupTable;
  if (s == "random") return PolicyKind::Random;
  throw ConfigError("unknown policy kind: " + s);
}

radio::TxConfig select_action(const FactoredPolicy& policy,
                              const StateBin& state, Rng& rng) {
  const int ms = FactoredPolicy::mcs_state(state);
  const int hs = FactoredPolicy::harq_state(state);
  radio::TxConfig a;
  a.mcs = head_select(policy.q_mcs.data() +
                          static_cast<size_t>(ms) * radio::kNumMcs,
                      radio::kNumMcs, policy.epsilon, rng);
  a.repetition_idx =
      head_select(policy.q_rep.data() +
                      static_cast<size_t>(ms) * radio::kNumRepetition,
                  radio::kNumRepetition, policy.epsilon, rng);
  a.harq_max_retx = head_select(policy.q_harq.data() +
                                    static_cast<size_t>(hs) * radio::kNumHarq,
                                radio::kNumHarq, policy.epsilon, rng);
  return a;
}

radio::TxConfig greedy_action(const FactoredPolicy& policy,
                              const StateBin& state) {
  const int ms = FactoredPolicy::mcs_state(state);
  const int hs = FactoredPolicy::harq_state(state);
  radio::TxConfig a;
  a.mcs = argmax_lowest(
      policy.q_mcs.data() + static_cast<size_t>(ms) * radio::kNumMcs,
      radio::kNumMcs);
  a.repetition_idx = argmax_lowest(
      policy.q_rep.data() + static_cast<size_t>(ms) * radio::kNumRepetition,
      radio::kNumRepetition);
  a.harq_max_retx = argmax_lowest(
      policy.q_harq.data() + static_cast<size_t>(hs) * radio::kNumHarq,
      radio::kNumHarq);
  return a;
}

double reward_normalized(double bler, double norm_latency,
                         double norm_throughput, const RewardWeights& w) {
  return -w.bler * bler - w.latency * norm_latency +
         w.throughput * norm_throughput;
}

double reward(const radio::LinkKpi& kpi, const RewardWeights& w,
              const KpiNorms& norms) {
  const double nl = std::clamp(kpi.latency_ms / norms.latency_ms, 0.0, 1.0);
  const double nt =
      std::clamp(kpi.throughput_kbps / norms.throughput_kbps, 0.0, 1.0);
  return reward_normalized(kpi.bler, nl, nt, w);
}

void q_update(FactoredPolicy& policy, const StateBin& state,
              const radio::TxConfig& action, double r,
              const StateBin& next_state) {
  const int ms = FactoredPolicy::mcs_state(state);
  const int next_ms = FactoredPolicy::mcs_state(next_state);
  const int hs = FactoredPolicy::harq_state(state);
  const int next_hs = FactoredPolicy::harq_state(next_state);
  head_update(policy.q_mcs, ms, action.mcs, radio::kNumMcs, policy.alpha,
              policy.gamma, r, next_ms);
  head_update(policy.q_rep, ms, action.repetition_idx, radio::kNumRepetition,
              policy.alpha, policy.gamma, r, next_ms);
  head_update(policy.q_harq, hs, action.harq_max_retx, radio::kNumHarq,
              policy.alpha, policy.gamma, r, next_hs);
}

LookupTable default_lookup_table(double margin_db) {
  LookupTable t{};
  const auto base = radio::BlerModel::default_thresholds();
  for (int m = 0; m < radio::kNumMcs; ++m) t[m] = base[m] + margin_db;
  return t;
}

radio::TxConfig lookup_policy(double snr_db, const LookupTable& table) {
  radio::TxConfig a;
  a.mcs = 0;
  for (int m = radio::kNumMcs - 1; m >= 0; --m) {
    if (table[m] <= snr_db) {
      a.mcs = m;
      break;
    }
  }
  a.repetition_idx = 0;           // repetition 1
  a.harq_max_retx = radio::kNumHarq - 1;  // 5
  return a;
}

radio::TxConfig random_policy(Rng& rng) {
  radio::TxConfig a;
  a.mcs = static_cast<int>(uniform_index(rng, radio::kNumMcs));
  a.repetition_idx = static_cast<int>(uniform_index(rng, radio::kNumRepetition));
  a.harq_max_retx = static_cast<int>(uniform_index(rng, radio::kNumHarq));
  return a;
}

std::string save_policy(const FactoredPolicy& policy) {
  std::ostringstream out;
  out << "ztn-policy v1\n";
  out << "epsilon " << format_double(policy.epsilon) << "\n";
  out << "alpha " << format_double(policy.alpha) << "\n";
  out << "gamma " << format_double(policy.gamma) << "\n";
  auto dump = [&](const char* name, const std::vector<double>& q, int n) {
    for (size_t i = 0; i < q.size(); ++i) {
      if (q[i] == 0.0) continue;
      out << "q " << name << " " << (i / n) << " " << (i % n) << " "
          << format_double(q[i]) << "\n";
    }
  };
  dump("mcs", policy.q_mcs, radio::kNumMcs);
  dump("rep", policy.q_rep, radio::kNumRepetition);
  dump("harq", policy.q_harq, radio::kNumHarq);
  return out.str();
}

FactoredPolicy load_policy(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != "ztn-policy v1")
    throw ParseError("bad policy header", 1);
  ++lineno;
  FactoredPolicy p = FactoredPolicy::make(0.0, 0.0, 0.0);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "epsilon" || key == "alpha" || key == "gamma") {
      double v;
      if (!(ls >> v)) throw ParseError("bad scalar in policy file", lineno);
      (key == "epsilon" ? p.epsilon : key == "alpha" ? p.alpha : p.gamma) = v;
    } else if (key == "q") {
      std::string head;
      long state = 0;
      int action = 0;
      double v = 0.0;
      if (!(ls >> head >> state >> action >> v))
        throw ParseError("bad q entry", lineno);
      std::vector<double>* table = nullptr;
      int n = 0;
      if (head == "mcs") { table = &p.q_mcs; n = radio::kNumMcs; }
      else if (head == "rep") { table = &p.q_rep; n = radio::kNumRepetition; }
      else if (head == "harq") { table = &p.q_harq; n = radio::kNumHarq; }
      else throw ParseError("unknown q head: " + head, lineno);
      const size_t idx = static_cast<size_t>(state) * n + action;
      if (state < 0 || action < 0 || action >= n || idx >= table->size())
        throw ParseError("q index out of range", lineno);
      (*table)[idx] = v;
    } else {
      throw ParseError("unknown key in policy file: " + key, lineno);
    }
  }
  if (!p.valid()) throw ParseError("policy fails validation", lineno);
  return p;
}

void save_policy_file(const FactoredPolicy& policy, const std::string& path) {
  write_file_atomic(path, save_policy(policy));
}

FactoredPolicy load_policy_file(const std::string& path) {
  return load_policy(read_file(path));
}

}  // namespace ztn::rl
