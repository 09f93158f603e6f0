#pragma once

// Mean-field limit ODEs of both models, fixed-step RK4 integration,
// linearization at the origin and the periodic-orbit detector.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "cwhopf/error.hpp"
#include "cwhopf/model.hpp"

namespace cwhopf {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a[0], s * a[1]}; }
inline Vec2 operator*(const Mat2& m, Vec2 x) {
  return {m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]};
}

// (m, lambda) -> (2 (tanh lambda - m), 2 beta (tanh lambda - m) - alpha lambda)
inline Vec2 field_dissipative(Vec2 x, const DissipativeParams& p) {
  const double d = std::tanh(x[1]) - x[0];
  return {2.0 * d, 2.0 * p.beta * d - p.alpha * x[1]};
}

inline Vec2 field_twopop(Vec2 x, const TwoPopParams& p) {
  const double r1 = p.j11 * x[0] + p.j12 * x[1];
  const double r2 = p.j21 * x[0] + p.j22 * x[1];
  return {2.0 * p.gamma * std::sinh(r1) - 2.0 * x[0] * std::cosh(r1),
          2.0 * (1.0 - p.gamma) * std::sinh(r2) - 2.0 * x[1] * std::cosh(r2)};
}

// Jacobian of field_dissipative at an arbitrary point.
inline Mat2 jacobian_dissipative(Vec2 x, const DissipativeParams& p) {
  const double th = std::tanh(x[1]);
  const double sech2 = 1.0 - th * th;
  return {{{-2.0, 2.0 * sech2}, {-2.0 * p.beta, 2.0 * p.beta * sech2 - p.alpha}}};
}

struct Eigen2 {
  Mat2 matrix{};
  std::array<std::complex<double>, 2> values{};
};

// Roots of z^2 - tr z + det, ordered so that values[0] has the non-negative
// imaginary part (or the larger real part for real spectra).
inline std::array<std::complex<double>, 2> eigenvalues(const Mat2& m) {
  const double tr = m[0][0] + m[1][1];
  const double half = 0.5 * tr;
  // Centered discriminant avoids cancellation in tr^2/4 - det for traceless matrices.
  const double d = 0.25 * (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]) + m[0][1] * m[1][0];
  if (d >= 0.0) {
    const double s = std::sqrt(d);
    return {std::complex<double>(half + s, 0.0), std::complex<double>(half - s, 0.0)};
  }
  const double s = std::sqrt(-d);
  return {std::complex<double>(half, s), std::complex<double>(half, -s)};
}

inline Eigen2 jacobian_origin(const DissipativeParams& p) {
  Eigen2 e;
  e.matrix = jacobian_dissipative({0.0, 0.0}, p);
  e.values = eigenvalues(e.matrix);
  return e;
}

inline Eigen2 jacobian_origin(const TwoPopParams& p) {
  Eigen2 e;
  e.matrix = {{{2.0 * (p.gamma * p.j11 - 1.0), 2.0 * p.gamma * p.j12},
               {2.0 * (1.0 - p.gamma) * p.j21, 2.0 * ((1.0 - p.gamma) * p.j22 - 1.0)}}};
  e.values = eigenvalues(e.matrix);
  return e;
}

struct OdeSolution {
  std::vector<double> t;
  std::vector<Vec2> x;
  double step = 0.0;
  int order = 4;

  std::size_t size() const { return t.size(); }
};

// Classical fourth-order Runge-Kutta with a fixed step. The horizon is
// covered by round(horizon / step) steps; every `record_every`-th state is kept.
template <class Field>
OdeSolution integrate(Field&& field, Vec2 x0, double horizon, double step, std::size_t record_every = 1) {
  if (!(step > 0.0)) throw ConfigError("integration step must be positive");
  if (!(horizon >= 0.0)) throw ConfigError("integration horizon must be non-negative");
  if (record_every == 0) record_every = 1;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / step));

  OdeSolution sol;
  sol.step = step;
  sol.t.reserve(steps / record_every + 2);
  sol.x.reserve(steps / record_every + 2);
  sol.t.push_back(0.0);
  sol.x.push_back(x0);

  Vec2 x = x0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const Vec2 k1 = field(x);
    const Vec2 k2 = field(x + (0.5 * step) * k1);
    const Vec2 k3 = field(x + (0.5 * step) * k2);
    const Vec2 k4 = field(x + step * k3);
    x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = static_cast<double>(i) * step;
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) throw IntegrationError("ODE state became non-finite", t);
    if (i % record_every == 0 || i == steps) {
      sol.t.push_back(t);
      sol.x.push_back(x);
    }
  }
  return sol;
}

inline auto linear_field(const Mat2& a) {
  return [a](Vec2 x) { return a * x; };
}

struct CycleDetection {
  enum class Verdict { cycle, no_cycle, inconclusive };
  Verdict verdict = Verdict::inconclusive;
  double amplitude = 0.0;       // half peak-to-peak of the first component over the tail
  double period = 0.0;          // mean spacing of upward zero crossings of the first component
  double relative_drift = 0.0;  // largest relative change between successive radius maxima
  std::size_t oscillations = 0;

  bool is_cycle() const { return verdict == Verdict::cycle; }
};

inline const char* to_string(CycleDetection::Verdict v) {
  switch (v) {
    case CycleDetection::Verdict::cycle: return "true";
    case CycleDetection::Verdict::no_cycle: return "false";
    default: return "inconclusive";
  }
}

// Looks at the trailing `tail_fraction` of the solution. A cycle is declared
// when the maxima of the radius |x| change by less than `drift_tolerance`
// relative, both between successive turns and across the whole tail. Fewer than `min_oscillations` periods in the tail
// gives an inconclusive verdict; a tail that has collapsed onto the origin
// gives no_cycle.
inline CycleDetection detect_limit_cycle(const OdeSolution& sol, double tail_fraction, double drift_tolerance = 0.01,
                                         std::size_t min_oscillations = 5) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ConfigError("tail fraction must lie in (0, 1]");
  CycleDetection out;
  const std::size_t n = sol.size();
  if (n < 3) return out;
  const std::size_t begin = n - std::max<std::size_t>(3, static_cast<std::size_t>(tail_fraction * static_cast<double>(n)));

  std::vector<double> radius(n - begin);
  double lo = sol.x[begin][0];
  double hi = lo;
  double rmax = 0.0;
  for (std::size_t i = begin; i < n; ++i) {
    radius[i - begin] = std::hypot(sol.x[i][0], sol.x[i][1]);
    rmax = std::max(rmax, radius[i - begin]);
    lo = std::min(lo, sol.x[i][0]);
    hi = std::max(hi, sol.x[i][0]);
  }
  out.amplitude = 0.5 * (hi - lo);
  if (rmax < 1e-12) {
    out.verdict = CycleDetection::Verdict::no_cycle;
    return out;
  }

  std::vector<double> crossings;
  for (std::size_t i = begin + 1; i < n; ++i) {
    const double a = sol.x[i - 1][0];
    const double b = sol.x[i][0];
    if (a < 0.0 && b >= 0.0) {
      const double frac = a / (a - b);
      crossings.push_back(sol.t[i - 1] + frac * (sol.t[i] - sol.t[i - 1]));
    }
  }
  out.oscillations = crossings.empty() ? 0 : crossings.size() - 1;
  if (crossings.size() >= 2) out.period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);

  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < radius.size(); ++i)
    if (radius[i] > radius[i - 1] && radius[i] >= radius[i + 1]) maxima.push_back(radius[i]);

  if (out.oscillations < min_oscillations || maxima.size() < 2) {
    out.verdict = CycleDetection::Verdict::inconclusive;
    return out;
  }
  for (std::size_t i = 1; i < maxima.size(); ++i)
    out.relative_drift = std::max(out.relative_drift, std::abs(maxima[i] - maxima[i - 1]) / maxima[i - 1]);
  // A slow spiral (e.g. exactly at the bifurcation) can change little from
  // one turn to the next, so the whole tail is compared as well.
  out.relative_drift = std::max(out.relative_drift, std::abs(maxima.back() - maxima.front()) / maxima.front());
  out.verdict = out.relative_drift < drift_tolerance ? CycleDetection::Verdict::cycle
                                                     : CycleDetection::Verdict::no_cycle;
  return out;
}

struct FirstIntegralResidual {
  double initial = 0.0;       // c = F(x(0))
  double max_abs = 0.0;       // max_t |F(x(t)) - c|
  double relative = 0.0;      // max_abs / |c| (max_abs when c = 0)
};

// F(x, y) = beta x^2 - 2 x y + y^2 is conserved by the flow of the critical
// linearization [[-2, 2], [-2 beta, 2]]; its level sets are the ellipses the
// change of variables maps onto circles.
inline double quadratic_invariant(Vec2 x, double beta) {
  return beta * x[0] * x[0] - 2.0 * x[0] * x[1] + x[1] * x[1];
}

inline FirstIntegralResidual first_integral_residual(const OdeSolution& sol, const DissipativeParams& p) {
  FirstIntegralResidual r;
  if (sol.size() == 0) return r;
  r.initial = quadratic_invariant(sol.x.front(), p.beta);
  for (const Vec2& x : sol.x) r.max_abs = std::max(r.max_abs, std::abs(quadratic_invariant(x, p.beta) - r.initial));
  r.relative = r.initial != 0.0 ? r.max_abs / std::abs(r.initial) : r.max_abs;
  return r;
}

}  // namespace cwhopf
