#pragma once

// Ensemble comparison of the rescaled finite-N radius kappa_N(t) against the
// limiting radial SDE, at a ladder of system sizes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "cwhopf/averaging.hpp"
#include "cwhopf/error.hpp"
#include "cwhopf/fluct.hpp"
#include "cwhopf/micro_sim.hpp"
#include "cwhopf/model.hpp"
#include "cwhopf/parallel.hpp"
#include "cwhopf/rescale.hpp"
#include "cwhopf/rng.hpp"
#include "cwhopf/stats.hpp"

namespace cwhopf {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

struct CriticalCompareConfig {
  std::vector<std::int64_t> n_list{400, 2500, 10000};
  std::size_t replicas = 1000;
  double horizon = 1.0;  // rescaled time
  std::vector<double> checkpoints{0.5, 1.0};
  double rescaled_step = 1e-2;
  double limit_dt = 1e-4;
  std::size_t limit_factor = 10;  // reference paths per micro replica
  double initial_offset = 0.5;    // lambda_bar (model 1) or epsilon (model 2)
  double kappa_floor = kDefaultKappaFloor;
  std::vector<double> eta_lags{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;

  void validate() const {
    if (n_list.empty()) throw ConfigError("n_list must not be empty");
    for (auto n : n_list)
      if (n < 1) throw ConfigError("n_list entries must be positive");
    if (replicas < 2) throw ConfigError("replicas must be at least 2");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (checkpoints.empty()) throw ConfigError("checkpoints must not be empty");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      if (checkpoints[i] < 0.0 || checkpoints[i] > horizon * (1.0 + 1e-12))
        throw ConfigError("checkpoints must lie in [0, horizon]");
      if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) throw ConfigError("checkpoints must be strictly increasing");
    }
    if (!(rescaled_step > 0.0)) throw ConfigError("rescaled_step must be positive");
    if (!(limit_dt > 0.0)) throw ConfigError("limit_dt must be positive");
    if (limit_factor < 10) throw ConfigError("limit_factor must be at least 10");
    if (initial_offset == 0.0 || !std::isfinite(initial_offset))
      throw ConfigError("initial offset must be non-zero: the change of variables is singular at the origin");
  }
};

struct CheckpointComparison {
  double t = 0.0;
  double ks = 0.0;
  double ks_threshold = 0.0;
  std::array<double, 4> moments_micro{};
  std::array<double, 4> moments_limit{};
  std::size_t n_micro = 0;
  std::size_t n_limit = 0;
};

struct PhaseSummary {
  double mean_slope = 0.0;
  double expected_slope = 0.0;
  double relative_error = 0.0;
  std::size_t replicas_used = 0;
  std::size_t trimmed = 0;
  std::size_t undefined = 0;
  std::optional<EtaScaling> eta;
};

struct SizeComparison {
  std::int64_t n = 0;
  std::vector<CheckpointComparison> checkpoints;
  PhaseSummary phase;
  std::uint64_t events = 0;
};

struct ComparisonReport {
  ModelKind model = ModelKind::dissipative;
  nlohmann::json params;
  RadialSdeParams limit;
  double kappa0 = 0.0;
  CriticalCompareConfig config;
  std::vector<SizeComparison> sizes;
  std::vector<bool> ks_non_increasing;  // per checkpoint, along n_list
};

namespace detail {

inline nlohmann::json params_json(const DissipativeParams& p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

inline nlohmann::json params_json(const TwoPopParams& p) {
  return {{"gamma", p.gamma}, {"j11", p.j11}, {"j12", p.j12}, {"j21", p.j21}, {"j22", p.j22}};
}

inline RadialSdeParams limit_params(const DissipativeParams& p) { return RadialSdeParams::for_dissipative(p.beta); }

inline RadialSdeParams limit_params(const TwoPopParams& p) {
  const TwoPopAveraging avg = averaged_coeffs_twopop(p, 1.0);
  return RadialSdeParams::for_twopop(avg.z1_numeric, avg.z2_numeric);
}

inline std::vector<std::size_t> checkpoint_indices(const std::vector<double>& times, double step) {
  std::vector<std::size_t> idx;
  for (double t : times) {
    const double r = t / step;
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-6 * std::max(1.0, r)) throw ConfigError("checkpoint is not on the rescaled grid");
    idx.push_back(static_cast<std::size_t>(k));
  }
  return idx;
}

}  // namespace detail

template <class Params>
ComparisonReport critical_compare(const Params& params, const CriticalCompareConfig& cfg) {
  constexpr bool dissipative = std::is_same_v<Params, DissipativeParams>;
  require_critical(params);
  cfg.validate();

  ComparisonReport report;
  report.model = dissipative ? ModelKind::dissipative : ModelKind::two_population;
  report.params = detail::params_json(params);
  report.limit = detail::limit_params(params);
  report.kappa0 = kappa0_limit(params, cfg.initial_offset);
  report.config = cfg;

  const std::vector<std::size_t> cp_index = detail::checkpoint_indices(cfg.checkpoints, cfg.rescaled_step);
  std::vector<std::size_t> lags;
  for (double h : cfg.eta_lags) {
    const auto lag = static_cast<std::size_t>(std::llround(h / cfg.rescaled_step));
    if (lag >= 1 && std::abs(static_cast<double>(lag) * cfg.rescaled_step - h) <= 1e-9 * h &&
        std::find(lags.begin(), lags.end(), lag) == lags.end())
      lags.push_back(lag);
  }

  const std::size_t limit_paths = cfg.limit_factor * cfg.replicas;
  const auto reference = kappa_samples(report.limit, KappaScheme::planar, report.kappa0, cfg.checkpoints, cfg.limit_dt,
                                       limit_paths, cfg.seed, purpose::limit_sde, cfg.workers);

  const InitialCondition init = dissipative ? InitialCondition::critical_dissipative(cfg.initial_offset)
                                            : InitialCondition::critical_twopop(cfg.initial_offset);

  for (std::int64_t n : cfg.n_list) {
    const double time_scale = std::sqrt(static_cast<double>(n));
    // Distinct seeds per N keep the ladder rungs independent.
    const std::uint64_t seed_n = cfg.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(n));

    struct Replica {
      std::vector<double> kappa;
      double slope = 0.0;
      std::vector<double> eta;
      bool trimmed = false;
      bool undefined = false;
      std::uint64_t events = 0;
    };
    std::vector<Replica> out(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t k) {
      RandomStream rng(seed_n, {k, purpose::micro});
      Trajectory traj;
      if constexpr (dissipative)
        traj = simulate_dissipative(params, n, init, time_scale * cfg.horizon, time_scale * cfg.rescaled_step, rng);
      else
        traj = simulate_twopop(params, n, init, time_scale * cfg.horizon, time_scale * cfg.rescaled_step, rng);
      traj.seed = seed_n;
      traj.replica = k;
      const RescaledSeries s = rescale(traj, params, cfg.rescaled_step);
      Replica& r = out[k];
      r.events = traj.events;
      for (std::size_t idx : cp_index) {
        if (idx >= s.size()) throw ConfigError("checkpoint beyond the simulated horizon");
        r.kappa.push_back(s.kappa[idx]);
      }
      try {
        PhaseSeries ph = phase_series(s, cfg.kappa_floor);
        r.slope = ph.slope;
        r.trimmed = ph.trimmed;
        r.eta = std::move(ph.eta);
      } catch (const PhaseUndefinedError&) {
        r.undefined = true;
      }
    });

    SizeComparison sc;
    sc.n = n;
    for (std::size_t j = 0; j < cfg.checkpoints.size(); ++j) {
      std::vector<double> micro(cfg.replicas);
      for (std::size_t k = 0; k < cfg.replicas; ++k) micro[k] = out[k].kappa[j];
      CheckpointComparison c;
      c.t = cfg.checkpoints[j];
      c.ks = ks_two_sample(micro, reference[j]);
      c.ks_threshold = ks_threshold(micro.size(), reference[j].size());
      c.moments_micro = raw_moments(micro);
      c.moments_limit = raw_moments(reference[j]);
      c.n_micro = micro.size();
      c.n_limit = reference[j].size();
      sc.checkpoints.push_back(c);
    }

    PhaseSummary& ps = sc.phase;
    ps.expected_slope = fast_frequency(params) * time_scale;
    std::vector<PhaseSeries> phases;
    double slope_sum = 0.0;
    for (const Replica& r : out) {
      sc.events += r.events;
      if (r.undefined) {
        ++ps.undefined;
        continue;
      }
      if (r.trimmed) ++ps.trimmed;
      ++ps.replicas_used;
      slope_sum += r.slope;
      PhaseSeries p;
      p.eta = r.eta;
      phases.push_back(std::move(p));
    }
    if (ps.replicas_used > 0) {
      ps.mean_slope = slope_sum / static_cast<double>(ps.replicas_used);
      ps.relative_error = std::abs(ps.mean_slope - ps.expected_slope) / ps.expected_slope;
    }
    if (lags.size() >= 2 && !phases.empty()) {
      try {
        ps.eta = eta_increment_scaling(phases, lags, cfg.rescaled_step);
      } catch (const ConfigError&) {
        ps.eta.reset();
      }
    }
    report.sizes.push_back(std::move(sc));
  }

  for (std::size_t j = 0; j < cfg.checkpoints.size(); ++j) {
    bool ok = true;
    for (std::size_t i = 1; i < report.sizes.size(); ++i)
      ok = ok && report.sizes[i].checkpoints[j].ks <= report.sizes[i - 1].checkpoints[j].ks;
    report.ks_non_increasing.push_back(ok);
  }
  return report;
}

inline nlohmann::json to_json(const ComparisonReport& r) {
  using nlohmann::json;
  json sizes = json::array();
  for (const SizeComparison& s : r.sizes) {
    json cps = json::array();
    for (const CheckpointComparison& c : s.checkpoints)
      cps.push_back({{"t", c.t},
                     {"ks", c.ks},
                     {"ks_threshold", c.ks_threshold},
                     {"moments_micro", c.moments_micro},
                     {"moments_limit", c.moments_limit},
                     {"n_micro", c.n_micro},
                     {"n_limit", c.n_limit}});
    json phase = {{"mean_slope", s.phase.mean_slope},
                  {"expected_slope", s.phase.expected_slope},
                  {"relative_error", s.phase.relative_error},
                  {"replicas_used", s.phase.replicas_used},
                  {"trimmed", s.phase.trimmed},
                  {"undefined", s.phase.undefined}};
    if (s.phase.eta) {
      phase["eta_lags"] = s.phase.eta->lags;
      phase["eta_mean_abs_increment"] = s.phase.eta->mean_abs_incr;
      phase["eta_loglog_slope"] = s.phase.eta->loglog_slope;
    }
    sizes.push_back({{"n", s.n}, {"checkpoints", cps}, {"phase", phase}, {"events", s.events}});
  }
  const CriticalCompareConfig& c = r.config;
  return {{"model", to_string(r.model)},
          {"params", r.params},
          {"limit_sde", {{"c1", r.limit.c1}, {"c2", r.limit.c2}, {"c3", r.limit.c3}}},
          {"kappa0", r.kappa0},
          {"seed", c.seed},
          {"n_list", c.n_list},
          {"replicas", c.replicas},
          {"limit_paths", c.limit_factor * c.replicas},
          {"horizon", c.horizon},
          {"rescaled_step", c.rescaled_step},
          {"limit_dt", c.limit_dt},
          {"initial_offset", c.initial_offset},
          {"sizes", sizes},
          {"ks_non_increasing", r.ks_non_increasing}};
}

}  // namespace cwhopf
