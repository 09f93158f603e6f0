#pragma once

// Parameter sets, aggregated microscopic states and exact jump rates for the
// dissipative Curie-Weiss model and the two-population Curie-Weiss model.
//
// Both models are simulated on aggregate counts: every rate depends on the
// configuration only through (m, lambda) resp. (m1, m2), so the chain on
// counts is an exact lumping of the spin chain.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>

#include "cwhopf/error.hpp"

namespace cwhopf {

enum class ModelKind { dissipative, two_population };

inline const char* to_string(ModelKind m) {
  return m == ModelKind::dissipative ? "dissipative" : "two-pop";
}

inline constexpr double kCriticalityTolerance = 1e-12;

struct DissipativeParams {
  double alpha = 1.0;  // dissipation rate of the interaction field
  double beta = 1.5;   // inverse temperature

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a positive finite number");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a positive finite number");
  }

  // beta - (alpha/2 + 1); zero on the Hopf line.
  double critical_distance() const { return beta - (alpha / 2.0 + 1.0); }

  bool is_critical() const { return std::abs(critical_distance()) <= kCriticalityTolerance; }

  static DissipativeParams critical(double beta) { return {2.0 * (beta - 1.0), beta}; }
};

struct PopulationSizes {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t total() const { return n1 + n2; }
};

struct TwoPopParams {
  double gamma = 0.5;  // fraction of spins in population 1
  double j11 = 0.0;
  double j12 = 0.0;
  double j21 = 0.0;
  double j22 = 0.0;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    for (double j : {j11, j12, j21, j22})
      if (!std::isfinite(j)) throw ConfigError("coupling constants must be finite");
  }

  // Gamma = (gamma J11 - 1)^2 + gamma (1 - gamma) J12 J21.
  double gamma_big() const {
    const double a = gamma * j11 - 1.0;
    return a * a + gamma * (1.0 - gamma) * j12 * j21;
  }

  // (gamma J11 - 1) + ((1 - gamma) J22 - 1); zero when the trace condition holds.
  double condition1_residual() const { return (gamma * j11 - 1.0) + ((1.0 - gamma) * j22 - 1.0); }

  bool is_critical() const {
    return std::abs(condition1_residual()) <= kCriticalityTolerance && gamma_big() < 0.0;
  }

  double coupling_bound() const { return std::abs(j11) + std::abs(j12) + std::abs(j21) + std::abs(j22); }

  PopulationSizes split(std::int64_t n) const {
    const auto n1 = static_cast<std::int64_t>(std::llround(gamma * static_cast<double>(n)));
    if (n1 < 1 || n - n1 < 1)
      throw ConfigError("population split of N=" + std::to_string(n) + " leaves an empty population");
    return {n1, n - n1};
  }

  // Fills in J22 from the trace condition (gamma J11 - 1) = -((1 - gamma) J22 - 1).
  static TwoPopParams with_trace_condition(double gamma, double j11, double j12, double j21) {
    return {gamma, j11, j12, j21, (2.0 - gamma * j11) / (1.0 - gamma)};
  }
};

struct MicroStateDissipative {
  std::int64_t n_plus = 0;
  double lambda = 0.0;
  double t = 0.0;

  double magnetization(std::int64_t n) const {
    return static_cast<double>(2 * n_plus - n) / static_cast<double>(n);
  }
};

struct MicroStateTwoPop {
  std::int64_t n1_plus = 0;
  std::int64_t n2_plus = 0;
  double t = 0.0;

  // Both magnetizations are normalized by the total N.
  double m1(const PopulationSizes& s) const {
    return static_cast<double>(2 * n1_plus - s.n1) / static_cast<double>(s.total());
  }
  double m2(const PopulationSizes& s) const {
    return static_cast<double>(2 * n2_plus - s.n2) / static_cast<double>(s.total());
  }
};

enum class SpinSign { up, down };

struct DissipativeRates {
  double up_spins = 0.0;    // aggregate rate at which some +1 spin flips
  double down_spins = 0.0;  // aggregate rate at which some -1 spin flips
  double total() const { return up_spins + down_spins; }
};

inline DissipativeRates flip_rates_dissipative(const MicroStateDissipative& s, std::int64_t n) {
  const double th = std::tanh(s.lambda);
  DissipativeRates r{static_cast<double>(s.n_plus) * (1.0 - th), static_cast<double>(n - s.n_plus) * (1.0 + th)};
  assert(r.up_spins >= 0.0 && r.down_spins >= 0.0);
  assert(r.total() <= 2.0 * static_cast<double>(n) * (1.0 + 1e-15));
  return r;
}

struct TwoPopRates {
  double pop1_up = 0.0;
  double pop1_down = 0.0;
  double pop2_up = 0.0;
  double pop2_down = 0.0;
  double total() const { return pop1_up + pop1_down + pop2_up + pop2_down; }
};

inline TwoPopRates flip_rates_twopop(const MicroStateTwoPop& s, const TwoPopParams& p, const PopulationSizes& sizes) {
  const double m1 = s.m1(sizes);
  const double m2 = s.m2(sizes);
  const double r1 = p.j11 * m1 + p.j12 * m2;
  const double r2 = p.j21 * m1 + p.j22 * m2;
  // |m1| + |m2| <= 1, so the exponents cannot exceed the coupling bound.
  assert(std::abs(r1) <= p.coupling_bound() + 1e-12 && std::abs(r2) <= p.coupling_bound() + 1e-12);
  const double e1 = std::exp(r1);
  const double e2 = std::exp(r2);
  return {static_cast<double>(s.n1_plus) / e1, static_cast<double>(sizes.n1 - s.n1_plus) * e1,
          static_cast<double>(s.n2_plus) / e2, static_cast<double>(sizes.n2 - s.n2_plus) * e2};
}

// Flipping a spin of sign s moves lambda by -2 beta s / N. Time is unchanged.
inline MicroStateDissipative apply_flip_dissipative(MicroStateDissipative s, SpinSign which, std::int64_t n,
                                                    const DissipativeParams& p) {
  const double jump = 2.0 * p.beta / static_cast<double>(n);
  if (which == SpinSign::up) {
    if (s.n_plus <= 0) throw ContractViolation("no +1 spin left to flip");
    --s.n_plus;
    s.lambda -= jump;
  } else {
    if (s.n_plus >= n) throw ContractViolation("no -1 spin left to flip");
    ++s.n_plus;
    s.lambda += jump;
  }
  return s;
}

inline MicroStateTwoPop apply_flip_twopop(MicroStateTwoPop s, int population, SpinSign which,
                                          const PopulationSizes& sizes) {
  std::int64_t& count = population == 1 ? s.n1_plus : s.n2_plus;
  const std::int64_t size = population == 1 ? sizes.n1 : sizes.n2;
  if (which == SpinSign::up) {
    if (count <= 0) throw ContractViolation("no +1 spin left to flip in population " + std::to_string(population));
    --count;
  } else {
    if (count >= size) throw ContractViolation("no -1 spin left to flip in population " + std::to_string(population));
    ++count;
  }
  return s;
}

// Between jumps dm = 0, so d lambda = -alpha lambda dt is solved exactly.
inline MicroStateDissipative decay_lambda(MicroStateDissipative s, double dt, const DissipativeParams& p) {
  if (dt < 0.0) throw ContractViolation("decay_lambda: negative time step");
  s.lambda *= std::exp(-p.alpha * dt);
  s.t += dt;
  return s;
}

}  // namespace cwhopf
