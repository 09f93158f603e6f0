#pragma once

// Exact continuous-time simulation of the finite-N chains on aggregate counts.
//
// Dissipative model: lambda decays deterministically between jumps, so the
// flip rates are time-inhomogeneous. Events are proposed at the constant
// majorant 2N (each spin rate 1 - tanh(sigma lambda) is at most 2) and
// thinned with probability (true total rate) / 2N.
//
// Two-population model: rates are constant between jumps; plain Gillespie.

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "cwhopf/error.hpp"
#include "cwhopf/io.hpp"
#include "cwhopf/model.hpp"
#include "cwhopf/parallel.hpp"
#include "cwhopf/rng.hpp"

namespace cwhopf {

// Uniform sampling grid 0, step, 2 step, ..., (count - 1) step.
struct TimeGrid {
  double step = 0.0;
  std::size_t count = 0;

  double at(std::size_t k) const { return static_cast<double>(k) * step; }
  double horizon() const { return at(count - 1); }

  static TimeGrid make(double horizon, double step) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("grid step must be positive");
    if (step > horizon) throw ConfigError("grid step exceeds the horizon");
    const auto intervals = static_cast<std::size_t>(std::floor(horizon / step + 1e-9));
    return {step, intervals + 1};
  }
};

struct Trajectory {
  ModelKind model = ModelKind::dissipative;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  double grid_step = 0.0;
  std::vector<double> t;
  std::vector<double> first;   // m, or m1
  std::vector<double> second;  // lambda, or m2
  std::uint64_t events = 0;      // accepted spin flips
  std::uint64_t candidates = 0;  // proposed events (thinning only)

  std::size_t size() const { return t.size(); }
};

struct InitialCondition {
  enum class Law {
    symmetric,  // i.i.d. fair spins; lambda(0) = lambda0 (dissipative model)
    critical,   // dissipative: lambda(0) = lambda_bar N^{-1/4}; two-pop: P(+1) = 1/2 + eps N^{-1/4} in population 1
  };
  Law law = Law::symmetric;
  double lambda0 = 0.0;
  double lambda_bar = 0.0;
  double epsilon = 0.0;

  static InitialCondition symmetric(double lambda0 = 0.0) { return {Law::symmetric, lambda0, 0.0, 0.0}; }
  static InitialCondition critical_dissipative(double lambda_bar) { return {Law::critical, 0.0, lambda_bar, 0.0}; }
  static InitialCondition critical_twopop(double epsilon) { return {Law::critical, 0.0, 0.0, epsilon}; }

  // Probability that a population-1 spin starts at +1.
  double population1_up_probability(std::int64_t n) const {
    if (law == Law::symmetric) return 0.5;
    return 0.5 + epsilon * std::pow(static_cast<double>(n), -0.25);
  }

  void validate(ModelKind model, std::int64_t n) const {
    if (n < 1) throw ConfigError("N must be at least 1");
    if (law == Law::symmetric) {
      if (!std::isfinite(lambda0)) throw ConfigError("lambda0 must be finite");
      return;
    }
    if (model == ModelKind::dissipative) {
      if (lambda_bar == 0.0 || !std::isfinite(lambda_bar))
        throw ConfigError("critical initial law needs lambda_bar != 0 (the phase is singular at the origin)");
    } else {
      if (epsilon == 0.0 || !std::isfinite(epsilon))
        throw ConfigError("critical initial law needs epsilon != 0 (the phase is singular at the origin)");
      const double p = population1_up_probability(n);
      if (p < 0.0 || p > 1.0)
        throw ConfigError("1/2 + epsilon N^{-1/4} = " + std::to_string(p) + " is not a probability");
    }
  }
};

namespace detail {

inline std::int64_t draw_binomial(std::int64_t trials, double p, RandomStream& rng) {
  std::int64_t k = 0;
  for (std::int64_t i = 0; i < trials; ++i) k += rng.bernoulli(p) ? 1 : 0;
  return k;
}

inline Trajectory make_trajectory(ModelKind model, std::int64_t n, const TimeGrid& grid) {
  Trajectory traj;
  traj.model = model;
  traj.n = n;
  traj.grid_step = grid.step;
  traj.t.reserve(grid.count);
  traj.first.reserve(grid.count);
  traj.second.reserve(grid.count);
  return traj;
}

}  // namespace detail

inline MicroStateDissipative draw_initial_dissipative(std::int64_t n, const InitialCondition& init, RandomStream& rng) {
  init.validate(ModelKind::dissipative, n);
  MicroStateDissipative s;
  s.n_plus = detail::draw_binomial(n, 0.5, rng);
  s.lambda = init.law == InitialCondition::Law::symmetric
                 ? init.lambda0
                 : init.lambda_bar * std::pow(static_cast<double>(n), -0.25);
  return s;
}

inline MicroStateTwoPop draw_initial_twopop(const PopulationSizes& sizes, const InitialCondition& init,
                                            RandomStream& rng) {
  init.validate(ModelKind::two_population, sizes.total());
  MicroStateTwoPop s;
  s.n1_plus = detail::draw_binomial(sizes.n1, init.population1_up_probability(sizes.total()), rng);
  s.n2_plus = detail::draw_binomial(sizes.n2, 0.5, rng);
  return s;
}

// Samples are left limits at grid times, with lambda decayed exactly to the
// grid time.
inline Trajectory simulate_dissipative_from(const DissipativeParams& params, std::int64_t n,
                                            const MicroStateDissipative& start, const TimeGrid& grid,
                                            RandomStream& rng) {
  params.validate();
  if (n < 1) throw ConfigError("N must be at least 1");
  if (start.n_plus < 0 || start.n_plus > n) throw ContractViolation("initial count outside [0, N]");

  Trajectory traj = detail::make_trajectory(ModelKind::dissipative, n, grid);
  const double nn = static_cast<double>(n);
  const double majorant = 2.0 * nn;
  const double jump = 2.0 * params.beta / nn;
  const double alpha = params.alpha;

  std::int64_t n_plus = start.n_plus;
  double lambda = start.lambda;
  double t = 0.0;
  std::size_t k = 0;
  std::uint64_t events = 0;
  std::uint64_t candidates = 0;

  for (;;) {
    const double tc = t + rng.exponential(majorant);
    for (; k < grid.count && grid.at(k) <= tc; ++k) {
      const double tk = grid.at(k);
      traj.t.push_back(tk);
      traj.first.push_back(static_cast<double>(2 * n_plus - n) / nn);
      traj.second.push_back(lambda * std::exp(-alpha * (tk - t)));
    }
    if (k == grid.count) break;

    lambda *= std::exp(-alpha * (tc - t));
    t = tc;
    ++candidates;
    const double th = std::tanh(lambda);
    const double up_rate = static_cast<double>(n_plus) * (1.0 - th);
    const double down_rate = static_cast<double>(n - n_plus) * (1.0 + th);
    // One uniform on [0, 2N) both thins and selects the flip type.
    const double u = rng.uniform() * majorant;
    if (u < up_rate) {
      --n_plus;
      lambda -= jump;
      ++events;
    } else if (u < up_rate + down_rate) {
      ++n_plus;
      lambda += jump;
      ++events;
    }
  }
  traj.events = events;
  traj.candidates = candidates;
  return traj;
}

inline Trajectory simulate_dissipative(const DissipativeParams& params, std::int64_t n, const InitialCondition& init,
                                       double horizon, double grid_step, RandomStream& rng) {
  const TimeGrid grid = TimeGrid::make(horizon, grid_step);
  const MicroStateDissipative start = draw_initial_dissipative(n, init, rng);
  return simulate_dissipative_from(params, n, start, grid, rng);
}

inline Trajectory simulate_twopop_from(const TwoPopParams& params, std::int64_t n, const MicroStateTwoPop& start,
                                       const TimeGrid& grid, RandomStream& rng) {
  params.validate();
  const PopulationSizes sizes = params.split(n);
  if (start.n1_plus < 0 || start.n1_plus > sizes.n1 || start.n2_plus < 0 || start.n2_plus > sizes.n2)
    throw ContractViolation("initial counts outside the population sizes");

  Trajectory traj = detail::make_trajectory(ModelKind::two_population, n, grid);
  MicroStateTwoPop s = start;
  s.t = 0.0;
  std::size_t k = 0;
  std::uint64_t events = 0;

  for (;;) {
    const TwoPopRates r = flip_rates_twopop(s, params, sizes);
    const double total = r.total();
    const double tn = s.t + rng.exponential(total);
    for (; k < grid.count && grid.at(k) <= tn; ++k) {
      traj.t.push_back(grid.at(k));
      traj.first.push_back(s.m1(sizes));
      traj.second.push_back(s.m2(sizes));
    }
    if (k == grid.count) break;

    s.t = tn;
    ++events;
    double u = rng.uniform() * total;
    if ((u -= r.pop1_up) < 0.0) {
      --s.n1_plus;
    } else if ((u -= r.pop1_down) < 0.0) {
      ++s.n1_plus;
    } else if ((u -= r.pop2_up) < 0.0) {
      --s.n2_plus;
    } else {
      ++s.n2_plus;
    }
  }
  traj.events = events;
  traj.candidates = events;
  return traj;
}

inline Trajectory simulate_twopop(const TwoPopParams& params, std::int64_t n, const InitialCondition& init,
                                  double horizon, double grid_step, RandomStream& rng) {
  params.validate();
  const TimeGrid grid = TimeGrid::make(horizon, grid_step);
  const MicroStateTwoPop start = draw_initial_twopop(params.split(n), init, rng);
  return simulate_twopop_from(params, n, start, grid, rng);
}

// Replica k draws from substream (master_seed, k); results are bitwise
// reproducible for any worker count.
template <class Params>
std::vector<Trajectory> ensemble(const Params& params, std::int64_t n, std::size_t replicas,
                                 const InitialCondition& init, double horizon, double grid_step,
                                 std::uint64_t master_seed, unsigned workers = 0) {
  if (replicas < 1) throw ConfigError("replica count must be at least 1");
  std::vector<Trajectory> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t k) {
    RandomStream rng(master_seed, {k, purpose::micro});
    Trajectory traj;
    if constexpr (std::is_same_v<Params, DissipativeParams>)
      traj = simulate_dissipative(params, n, init, horizon, grid_step, rng);
    else
      traj = simulate_twopop(params, n, init, horizon, grid_step, rng);
    traj.seed = master_seed;
    traj.replica = k;
    out[k] = std::move(traj);
  });
  return out;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = traj.model == ModelKind::dissipative ? "t,m,lambda\n" : "t,m1,m2\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += io::sig17(traj.t[k]);
    out += ',';
    out += io::sig17(traj.first[k]);
    out += ',';
    out += io::sig17(traj.second[k]);
    out += '\n';
  }
  return out;
}

}  // namespace cwhopf
