#pragma once

// Exact action of the finite-N generators on smooth test functions of the
// order parameter, compared with the first-order (mean-field) limit.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cwhopf/error.hpp"
#include "cwhopf/limit_dynamics.hpp"
#include "cwhopf/model.hpp"

namespace cwhopf {

// A test function of two coordinates. `delta` returns f(x + d) - f(x)
// in a form free of cancellation, so that jump sums of size O(1/N) are not
// swamped by rounding in f itself.
struct TestFunction {
  std::string name;
  double (*value)(Vec2);
  Vec2 (*gradient)(Vec2);
  double (*delta)(Vec2 x, Vec2 d);
};

namespace test_functions {

inline TestFunction constant() {
  return {"const", [](Vec2) { return 1.0; }, [](Vec2) { return Vec2{0.0, 0.0}; }, [](Vec2, Vec2) { return 0.0; }};
}

inline TestFunction first() {
  return {"x", [](Vec2 x) { return x[0]; }, [](Vec2) { return Vec2{1.0, 0.0}; }, [](Vec2, Vec2 d) { return d[0]; }};
}

inline TestFunction second() {
  return {"y", [](Vec2 x) { return x[1]; }, [](Vec2) { return Vec2{0.0, 1.0}; }, [](Vec2, Vec2 d) { return d[1]; }};
}

inline TestFunction first_squared() {
  return {"x^2", [](Vec2 x) { return x[0] * x[0]; }, [](Vec2 x) { return Vec2{2.0 * x[0], 0.0}; },
          [](Vec2 x, Vec2 d) { return d[0] * (2.0 * x[0] + d[0]); }};
}

inline TestFunction second_squared() {
  return {"y^2", [](Vec2 x) { return x[1] * x[1]; }, [](Vec2 x) { return Vec2{0.0, 2.0 * x[1]}; },
          [](Vec2 x, Vec2 d) { return d[1] * (2.0 * x[1] + d[1]); }};
}

inline TestFunction product() {
  return {"xy", [](Vec2 x) { return x[0] * x[1]; }, [](Vec2 x) { return Vec2{x[1], x[0]}; },
          [](Vec2 x, Vec2 d) { return x[0] * d[1] + x[1] * d[0] + d[0] * d[1]; }};
}

inline std::vector<TestFunction> standard() {
  return {constant(), first(), second(), first_squared(), second_squared(), product()};
}

inline TestFunction by_name(const std::string& name) {
  for (const TestFunction& f : standard())
    if (f.name == name) return f;
  throw ConfigError("unknown test function '" + name + "'");
}

}  // namespace test_functions

// K_N f at (n_plus, lambda): jump part plus the deterministic decay of lambda.
inline double generator_dissipative(const DissipativeParams& p, std::int64_t n, const MicroStateDissipative& s,
                                    const TestFunction& f) {
  const DissipativeRates r = flip_rates_dissipative(s, n);
  const double nn = static_cast<double>(n);
  const Vec2 x{s.magnetization(n), s.lambda};
  const Vec2 up{-2.0 / nn, -2.0 * p.beta / nn};  // a +1 spin flips
  const Vec2 down{2.0 / nn, 2.0 * p.beta / nn};
  return r.up_spins * f.delta(x, up) + r.down_spins * f.delta(x, down) - p.alpha * s.lambda * f.gradient(x)[1];
}

inline double generator_twopop(const TwoPopParams& p, const PopulationSizes& sizes, const MicroStateTwoPop& s,
                               const TestFunction& f) {
  const TwoPopRates r = flip_rates_twopop(s, p, sizes);
  const double h = 2.0 / static_cast<double>(sizes.total());
  const Vec2 x{s.m1(sizes), s.m2(sizes)};
  return r.pop1_up * f.delta(x, {-h, 0.0}) + r.pop1_down * f.delta(x, {h, 0.0}) + r.pop2_up * f.delta(x, {0.0, -h}) +
         r.pop2_down * f.delta(x, {0.0, h});
}

struct GeneratorGrid {
  std::size_t count_points = 11;   // fractions of +1 spins, equispaced in [0, 1]
  std::size_t lambda_points = 11;  // model 1 only
  double lambda_max = 1.0;
};

// sup over the state grid of |K_N f - F . grad f|, where F is the limit field.
inline double generator_consistency(const DissipativeParams& p, std::int64_t n, const TestFunction& f,
                                    const GeneratorGrid& grid = {}) {
  p.validate();
  if (n < 1) throw ConfigError("N must be at least 1");
  if (grid.count_points < 2 || grid.lambda_points < 2) throw ConfigError("generator grid needs two points per axis");
  double sup = 0.0;
  for (std::size_t i = 0; i < grid.count_points; ++i) {
    const double q = static_cast<double>(i) / static_cast<double>(grid.count_points - 1);
    const auto n_plus = static_cast<std::int64_t>(std::llround(q * static_cast<double>(n)));
    for (std::size_t j = 0; j < grid.lambda_points; ++j) {
      const double lambda =
          grid.lambda_max * (2.0 * static_cast<double>(j) / static_cast<double>(grid.lambda_points - 1) - 1.0);
      const MicroStateDissipative s{n_plus, lambda, 0.0};
      const Vec2 x{s.magnetization(n), lambda};
      const Vec2 field = field_dissipative(x, p);
      const Vec2 g = f.gradient(x);
      const double limit = field[0] * g[0] + field[1] * g[1];
      sup = std::max(sup, std::abs(generator_dissipative(p, n, s, f) - limit));
    }
  }
  return sup;
}

inline double generator_consistency(const TwoPopParams& p, std::int64_t n, const TestFunction& f,
                                    const GeneratorGrid& grid = {}) {
  p.validate();
  const PopulationSizes sizes = p.split(n);
  if (grid.count_points < 2) throw ConfigError("generator grid needs two points per axis");
  double sup = 0.0;
  for (std::size_t i = 0; i < grid.count_points; ++i) {
    const double q1 = static_cast<double>(i) / static_cast<double>(grid.count_points - 1);
    for (std::size_t j = 0; j < grid.count_points; ++j) {
      const double q2 = static_cast<double>(j) / static_cast<double>(grid.count_points - 1);
      const MicroStateTwoPop s{static_cast<std::int64_t>(std::llround(q1 * static_cast<double>(sizes.n1))),
                               static_cast<std::int64_t>(std::llround(q2 * static_cast<double>(sizes.n2))), 0.0};
      const Vec2 x{s.m1(sizes), s.m2(sizes)};
      // The limit field uses the realized fraction n1 / N, which equals gamma
      // only when gamma N is an integer.
      TwoPopParams realized = p;
      realized.gamma = static_cast<double>(sizes.n1) / static_cast<double>(sizes.total());
      const Vec2 field = field_twopop(x, realized);
      const Vec2 g = f.gradient(x);
      const double limit = field[0] * g[0] + field[1] * g[1];
      sup = std::max(sup, std::abs(generator_twopop(p, sizes, s, f) - limit));
    }
  }
  return sup;
}

}  // namespace cwhopf
