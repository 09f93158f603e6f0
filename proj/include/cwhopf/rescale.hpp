#pragma once

// Critical rescaling of microscopic trajectories: space by N^{1/4}, time by
// N^{1/2}, followed by the linear change of variables that turns the critical
// linearization into a rotation at angular speed omega N^{1/2}:
//
//   model 1: z = lambda^, u = (beta m^ - lambda^) / sqrt(beta - 1),  omega = 2 sqrt(beta - 1)
//   model 2: w = y / ((1 - gamma) J21),
//            v = (-x + (gamma J11 - 1) y / ((1 - gamma) J21)) / sqrt|Gamma|,  omega = 2 sqrt|Gamma|
//
// Both rotate counterclockwise, so the atan2 phase increases on average.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "cwhopf/error.hpp"
#include "cwhopf/micro_sim.hpp"
#include "cwhopf/model.hpp"
#include "cwhopf/stats.hpp"

namespace cwhopf {

inline constexpr double kDefaultKappaFloor = 1e-4;

struct RescaledSeries {
  ModelKind model = ModelKind::dissipative;
  std::int64_t n = 0;
  std::uint64_t replica = 0;
  double step = 0.0;            // rescaled time step
  double fast_frequency = 0.0;  // omega N^{1/2}
  std::vector<double> t;
  std::vector<double> first;   // z, or w
  std::vector<double> second;  // u, or v
  std::vector<double> kappa;

  std::size_t size() const { return t.size(); }
};

// Linear maps from (m^, lambda^) resp. (x, y) to the rotating coordinates.
inline std::array<double, 2> change_of_variables(const DissipativeParams& p, double m_hat, double lambda_hat) {
  return {lambda_hat, (p.beta * m_hat - lambda_hat) / std::sqrt(p.beta - 1.0)};
}

inline std::array<double, 2> change_of_variables(const TwoPopParams& p, double x, double y) {
  const double d = (1.0 - p.gamma) * p.j21;
  return {y / d, (-x + (p.gamma * p.j11 - 1.0) * y / d) / std::sqrt(std::abs(p.gamma_big()))};
}

inline double fast_frequency(const DissipativeParams& p) { return 2.0 * std::sqrt(p.beta - 1.0); }
inline double fast_frequency(const TwoPopParams& p) { return 2.0 * std::sqrt(std::abs(p.gamma_big())); }

// Limit initial value kappa(0) under the critical initial laws.
inline double kappa0_limit(const DissipativeParams& p, double lambda_bar) {
  return p.beta / (p.beta - 1.0) * lambda_bar * lambda_bar;
}

inline double kappa0_limit(const TwoPopParams& p, double epsilon) {
  return 4.0 * epsilon * epsilon * p.gamma * p.gamma / std::abs(p.gamma_big());
}

inline void require_critical(const DissipativeParams& p) {
  p.validate();
  if (!p.is_critical())
    throw NotCriticalError("beta - (alpha/2 + 1) = " + std::to_string(p.critical_distance()) + " is not zero");
}

inline void require_critical(const TwoPopParams& p) {
  p.validate();
  if (!p.is_critical())
    throw NotCriticalError("two-population parameters are not critical (Gamma = " + std::to_string(p.gamma_big()) +
                           ", trace residual = " + std::to_string(p.condition1_residual()) + ")");
}

// `traj` must be sampled on a microscopic grid whose step divides
// N^{1/2} * rescaled_step.
template <class Params>
RescaledSeries rescale(const Trajectory& traj, const Params& params, double rescaled_step) {
  params.validate();
  if (!(rescaled_step > 0.0)) throw ConfigError("rescaled step must be positive");
  constexpr bool dissipative = std::is_same_v<Params, DissipativeParams>;
  if (dissipative != (traj.model == ModelKind::dissipative)) throw ConfigError("trajectory and parameters belong to different models");
  if (traj.size() == 0) throw ConfigError("empty trajectory");

  const double nn = static_cast<double>(traj.n);
  const double time_scale = std::sqrt(nn);
  const double space_scale = std::pow(nn, 0.25);
  const double ratio = time_scale * rescaled_step / traj.grid_step;
  const double stride_d = std::round(ratio);
  if (stride_d < 1.0 || std::abs(ratio - stride_d) > 1e-6 * ratio)
    throw ConfigError("trajectory grid step does not divide N^{1/2} times the rescaled step");
  const auto stride = static_cast<std::size_t>(stride_d);

  RescaledSeries s;
  s.model = traj.model;
  s.n = traj.n;
  s.replica = traj.replica;
  s.step = rescaled_step;
  s.fast_frequency = fast_frequency(params) * time_scale;
  for (std::size_t k = 0, i = 0; i < traj.size(); ++k, i += stride) {
    const auto c = change_of_variables(params, space_scale * traj.first[i], space_scale * traj.second[i]);
    s.t.push_back(static_cast<double>(k) * rescaled_step);
    s.first.push_back(c[0]);
    s.second.push_back(c[1]);
    s.kappa.push_back(c[0] * c[0] + c[1] * c[1]);
  }
  return s;
}

struct PhaseSeries {
  std::vector<double> t;
  std::vector<double> theta;  // unwrapped
  std::vector<double> eta;    // theta - expected_slope * t
  double slope = 0.0;         // least-squares angular speed
  double expected_slope = 0.0;
  bool trimmed = false;       // window cut where kappa first fell below the floor
};

// Phase of (first, second) by atan2 with unwrapping. Unwrapping is only
// unambiguous when the rotation per sample stays below pi, which is checked
// against the expected angular speed. If kappa drops below `kappa_floor` the
// window is cut just before that sample and flagged.
inline PhaseSeries phase_series(const RescaledSeries& s, double kappa_floor = kDefaultKappaFloor) {
  if (s.size() < 2) throw PhaseUndefinedError("phase needs at least two samples");
  if (s.fast_frequency * s.step >= std::numbers::pi)
    throw ConfigError("rescaled grid too coarse for phase unwrapping: omega dt = " +
                      std::to_string(s.fast_frequency * s.step) + " >= pi");
  PhaseSeries p;
  p.expected_slope = s.fast_frequency;
  std::size_t end = s.size();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.kappa[i] < kappa_floor) {
      end = i;
      p.trimmed = true;
      break;
    }
  if (end < 2) throw PhaseUndefinedError("kappa below the floor at the start of the window");

  double prev = std::atan2(s.second[0], s.first[0]);
  double acc = prev;
  for (std::size_t i = 0; i < end; ++i) {
    const double raw = std::atan2(s.second[i], s.first[i]);
    if (i > 0) {
      double d = raw - prev;
      d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
      acc += d;
    }
    prev = raw;
    p.t.push_back(s.t[i]);
    p.theta.push_back(acc);
    p.eta.push_back(acc - p.expected_slope * s.t[i]);
  }
  p.slope = ols_slope(p.t, p.theta);
  return p;
}

struct EtaScaling {
  std::vector<double> lags;           // h values, rescaled time
  std::vector<double> mean_abs_incr;  // mean |eta(t + h) - eta(t)|
  double loglog_slope = 0.0;
};

// Mean absolute eta increment over all replicas and all start times, for
// each lag given in samples; the slope is fitted in log-log coordinates.
inline EtaScaling eta_increment_scaling(const std::vector<PhaseSeries>& phases, const std::vector<std::size_t>& lag_samples,
                                        double step) {
  if (lag_samples.size() < 2) throw ConfigError("eta scaling needs at least two lags");
  EtaScaling out;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t lag : lag_samples) {
    if (lag == 0) throw ConfigError("lags must be positive");
    double sum = 0.0;
    std::size_t count = 0;
    for (const PhaseSeries& p : phases)
      for (std::size_t i = 0; i + lag < p.eta.size(); ++i) {
        sum += std::abs(p.eta[i + lag] - p.eta[i]);
        ++count;
      }
    if (count == 0) throw ConfigError("phase windows are shorter than the longest lag");
    const double h = static_cast<double>(lag) * step;
    out.lags.push_back(h);
    out.mean_abs_incr.push_back(sum / static_cast<double>(count));
    lx.push_back(std::log(h));
    ly.push_back(std::log(out.mean_abs_incr.back()));
  }
  out.loglog_slope = ols_slope(lx, ly);
  return out;
}

}  // namespace cwhopf
