#include "ztn/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ztn::radio {

namespace {
constexpr double kTwoPi = 6.283185307179586;

double wrap_heading(double h) {
  h = std::fmod(h, kTwoPi);
  if (h < 0.0) h += kTwoPi;
  return h;
}
}  // namespace

double FieldRect::diagonal() const {
  return std::sqrt(width * width + height * height);
}

std::array<double, kNumMcs> BlerModel::default_thresholds() {
  std::array<double, kNumMcs> t{};
  for (int m = 0; m < kNumMcs; ++m) t[m] = -5.0 + 2.0 * m;
  return t;
}

bool BlerModel::valid() const {
  if (!(slope > 0.0)) return false;
  if (!(shadowing_sigma >= 0.0)) return false;
  if (!(shadowing_rho >= 0.0 && shadowing_rho < 1.0)) return false;
  for (int m = 1; m < kNumMcs; ++m)
    if (!(thresholds[m] > thresholds[m - 1])) return false;
  return true;
}

std::array<double, kNumMcs> default_rate_table() {
  std::array<double, kNumMcs> r{};
  for (int m = 0; m < kNumMcs; ++m) r[m] = 25.0 * (m + 1);
  return r;
}

double path_loss_db(double distance_m) {
  const double d = std::max(distance_m, 1.0);
  return 40.0 + 30.0 * std::log10(d);
}

double snr_db(double tx_power_dbm, double path_loss_db, double shadow_db,
              double noise_floor_dbm) {
  return tx_power_dbm - path_loss_db - shadow_db - noise_floor_dbm;
}

double effective_snr_db(double snr_db, int repetition) {
  if (repetition < 1) throw std::invalid_argument("repetition must be >= 1");
  return snr_db + 10.0 * std::log10(static_cast<double>(repetition));
}

double bler(double eff_snr_db, int mcs, const BlerModel& model) {
  if (mcs < 0 || mcs >= kNumMcs) throw std::invalid_argument("mcs out of range");
  const double x = model.slope * (eff_snr_db - model.thresholds[mcs]);
  return 1.0 / (1.0 + std::exp(x));
}

HarqStats harq_stats(double p, int max_retx) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p outside [0,1]");
  if (max_retx < 0 || max_retx >= kNumHarq)
    throw std::invalid_argument("max_retx outside [0,5]");
  HarqStats s;
  const int attempts = max_retx + 1;
  s.residual_bler = std::pow(p, attempts);
  if (p < 1.0) {
    s.expected_transmissions = (1.0 - s.residual_bler) / (1.0 - p);
  } else {
    s.expected_transmissions = attempts;
  }
  return s;
}

double link_throughput_kbps(int mcs, int repetition, double residual_bler,
                            int prbs,
                            const std::array<double, kNumMcs>& rate_table) {
  if (mcs < 0 || mcs >= kNumMcs) throw std::invalid_argument("mcs out of range");
  if (prbs < 0) throw std::invalid_argument("prbs must be >= 0");
  return prbs * (rate_table[mcs] / repetition) * (1.0 - residual_bler);
}

Pose step_pose(const Pose& pose, double dt, const FieldRect& field,
               double turn_rate_per_s, Rng& rng) {
  if (dt < 0.0) throw std::invalid_argument("dt must be >= 0");
  Pose next = pose;
  next.x += pose.speed * dt * std::cos(pose.heading);
  next.y += pose.speed * dt * std::sin(pose.heading);

  // Mirror reflection at each boundary; repeated until inside, which also
  // covers steps longer than the field.
  bool reflected = true;
  while (reflected) {
    reflected = false;
    if (next.x < 0.0) {
      next.x = -next.x;
      next.heading = kTwoPi / 2.0 - next.heading;
      reflected = true;
    } else if (next.x > field.width) {
      next.x = 2.0 * field.width - next.x;
      next.heading = kTwoPi / 2.0 - next.heading;
      reflected = true;
    }
    if (next.y < 0.0) {
      next.y = -next.y;
      next.heading = -next.heading;
      reflected = true;
    } else if (next.y > field.height) {
      next.y = 2.0 * field.height - next.y;
      next.heading = -next.heading;
      reflected = true;
    }
  }
  next.heading = wrap_heading(next.heading);

  if (uniform01(rng) < turn_rate_per_s * dt) {
    next.heading = uniform(rng, 0.0, kTwoPi);
  }
  return next;
}

double sample_shadowing(double prev_db, const BlerModel& model, Rng& rng) {
  const double rho = model.shadowing_rho;
  const double innovation = std::sqrt(1.0 - rho * rho) *
                            model.shadowing_sigma * gaussian(rng);
  return rho * prev_db + innovation;
}

}  // namespace ztn::radio
