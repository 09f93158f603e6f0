#pragma once

// Gaussian fluctuations around the subcritical law of large numbers, and the
// limiting radial SDE at criticality
//
//   d kappa = (c1 - c2 kappa^2) dt + sqrt(c3 kappa) dB,
//
// simulated either directly (full truncation Euler) or through the planar
// system dX = -a X (X^2 + Y^2) dt + dB1, dY = -a Y (X^2 + Y^2) dt + dB2 with
// kappa = (c3 / 4)(X^2 + Y^2) and a = c2 c3 / 8. Ito's formula on that
// transform gives drift c3/2 - c2 kappa^2 and diffusion sqrt(c3 kappa), so the
// planar form exists exactly when c1 = c3 / 2, which both models satisfy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "cwhopf/error.hpp"
#include "cwhopf/io.hpp"
#include "cwhopf/limit_dynamics.hpp"
#include "cwhopf/model.hpp"
#include "cwhopf/parallel.hpp"
#include "cwhopf/rng.hpp"

namespace cwhopf {

struct RadialSdeParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  void validate() const {
    if (!(c1 > 0.0) || !(c2 > 0.0) || !(c3 > 0.0) || !std::isfinite(c1) || !std::isfinite(c2) || !std::isfinite(c3))
      throw ConfigError("radial SDE coefficients c1, c2, c3 must be positive and finite");
  }

  bool has_planar_form() const { return std::abs(c1 - 0.5 * c3) <= 1e-12 * std::max(1.0, c3); }

  // Cubic drift coefficient of the planar system.
  double planar_drift() const { return c2 * c3 / 8.0; }

  static RadialSdeParams for_dissipative(double beta) {
    if (!(beta > 1.0)) throw ConfigError("the critical dissipative model needs beta > 1");
    return {4.0 * beta * beta, beta / 2.0, 8.0 * beta * beta};
  }

  static RadialSdeParams for_twopop(double z1, double z2) {
    if (!(z1 > 0.0)) throw ConfigError("Z1 must be positive");
    if (!(z2 < 0.0)) throw ConfigError("Z2 = " + io::shortest(z2) + " is not negative; the limit SDE is not well posed");
    return {4.0 * z1, -z2 / 4.0, 8.0 * z1};
  }
};

struct SdePath {
  std::vector<double> t;
  std::vector<double> kappa;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;

  std::size_t size() const { return t.size(); }
};

// (m~, lambda~) samples of the linear fluctuation SDE.
struct FluctuationPath {
  std::vector<double> t;
  std::vector<Vec2> x;
  double dt = 0.0;

  std::size_t size() const { return t.size(); }
};

namespace detail {

// Number of dt-steps that reach `time`; the time must sit on the step lattice.
inline std::size_t steps_to(double time, double dt, const char* what) {
  const double ratio = time / dt;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-6 * std::max(1.0, ratio))
    throw ConfigError(std::string(what) + " is not an integer multiple of the SDE step");
  return static_cast<std::size_t>(k);
}

inline void check_step(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("SDE step dt must be positive");
}

}  // namespace detail

// Euler-Maruyama for d xi = A(t) xi dt + sqrt(1 - m tanh lambda) (2, 2 beta)^T dB,
// where A(t) is the Jacobian of the mean-field field along `ode` and a single
// Brownian motion drives both coordinates (every flip moves lambda by beta
// times the magnetization jump). The initial value is Gaussian with the given
// diagonal variances; zero variances give the deterministic start (0, 0).
// `dt` must be a multiple of the ODE step so A(t) is read off the stored grid.
inline FluctuationPath simulate_linear_fluctuation(const DissipativeParams& params, const OdeSolution& ode, double dt,
                                                   double horizon, RandomStream& rng, double var_m0 = 0.0,
                                                   double var_lambda0 = 0.0, std::size_t record_every = 1,
                                                   double noise_scale = 1.0) {
  params.validate();
  detail::check_step(dt);
  if (ode.size() < 2) throw ConfigError("linear fluctuation SDE needs a non-trivial ODE solution");
  if (horizon > ode.t.back() * (1.0 + 1e-12)) throw ConfigError("ODE solution is shorter than the requested horizon");
  if (var_m0 < 0.0 || var_lambda0 < 0.0) throw ConfigError("initial variances must be non-negative");
  const double ode_dt = ode.t[1] - ode.t[0];
  const std::size_t stride = detail::steps_to(dt, ode_dt, "fluctuation step");
  if (stride == 0) throw ConfigError("fluctuation step is finer than the ODE grid");
  const std::size_t steps = detail::steps_to(horizon, dt, "horizon");
  if (record_every == 0) record_every = 1;

  FluctuationPath path;
  path.dt = dt;
  Vec2 xi{std::sqrt(var_m0) * rng.normal(), std::sqrt(var_lambda0) * rng.normal()};
  path.t.push_back(0.0);
  path.x.push_back(xi);
  const double sq = std::sqrt(dt) * noise_scale;
  for (std::size_t i = 0; i < steps; ++i) {
    const Vec2 y = ode.x[i * stride];
    const Mat2 a = jacobian_dissipative(y, params);
    const double amp = std::sqrt(std::max(0.0, 1.0 - y[0] * std::tanh(y[1]))) * sq * rng.normal();
    const Vec2 drift = a * xi;
    xi = {xi[0] + drift[0] * dt + 2.0 * amp, xi[1] + drift[1] * dt + 2.0 * params.beta * amp};
    if ((i + 1) % record_every == 0 || i + 1 == steps) {
      path.t.push_back(static_cast<double>(i + 1) * dt);
      path.x.push_back(xi);
    }
  }
  return path;
}

// One Euler-Maruyama step of the planar system; returns kappa.
struct PlanarStepper {
  double a;      // cubic drift coefficient
  double scale;  // c3 / 4
  double sqdt;
  double dt;
  double x;
  double y;

  PlanarStepper(const RadialSdeParams& p, double kappa0, double dt_)
      : a(p.planar_drift()), scale(p.c3 / 4.0), sqdt(std::sqrt(dt_)), dt(dt_) {
    x = y = std::sqrt(kappa0 / (2.0 * scale));
  }

  void step(RandomStream& rng) {
    const double r2 = x * x + y * y;
    const double dx = -a * x * r2 * dt + sqdt * rng.normal();
    const double dy = -a * y * r2 * dt + sqdt * rng.normal();
    x += dx;
    y += dy;
  }

  double kappa() const { return scale * (x * x + y * y); }
};

// Full truncation: the internal state may go negative, only max(kappa, 0)
// enters the coefficients and the output.
struct DirectStepper {
  RadialSdeParams p;
  double sqdt;
  double dt;
  double k;

  DirectStepper(const RadialSdeParams& p_, double kappa0, double dt_) : p(p_), sqdt(std::sqrt(dt_)), dt(dt_), k(kappa0) {}

  void step(RandomStream& rng) {
    const double kp = std::max(k, 0.0);
    k += (p.c1 - p.c2 * kp * kp) * dt + std::sqrt(p.c3 * kp) * sqdt * rng.normal();
  }

  double kappa() const { return std::max(k, 0.0); }
};

namespace detail {

template <class Stepper>
SdePath run_kappa(Stepper s, double horizon, double dt, RandomStream& rng, std::size_t record_every) {
  const std::size_t steps = steps_to(horizon, dt, "horizon");
  if (record_every == 0) record_every = 1;
  SdePath path;
  path.dt = dt;
  path.t.reserve(steps / record_every + 2);
  path.kappa.reserve(steps / record_every + 2);
  path.t.push_back(0.0);
  path.kappa.push_back(s.kappa());
  for (std::size_t i = 1; i <= steps; ++i) {
    s.step(rng);
    if (i % record_every == 0 || i == steps) {
      path.t.push_back(static_cast<double>(i) * dt);
      path.kappa.push_back(s.kappa());
    }
  }
  return path;
}

}  // namespace detail

inline SdePath simulate_kappa_via_xy(const RadialSdeParams& p, double kappa0, double horizon, double dt,
                                     RandomStream& rng, std::size_t record_every = 1) {
  p.validate();
  detail::check_step(dt);
  if (!(kappa0 >= 0.0)) throw ConfigError("kappa0 must be non-negative");
  if (!p.has_planar_form()) throw ConfigError("planar representation needs c1 = c3 / 2");
  return detail::run_kappa(PlanarStepper(p, kappa0, dt), horizon, dt, rng, record_every);
}

// The dissipative instantiation: a = beta^3 / 2, kappa = 2 beta^2 (X^2 + Y^2).
inline SdePath simulate_kappa_via_xy(double beta, double kappa0, double horizon, double dt, RandomStream& rng,
                                     std::size_t record_every = 1) {
  return simulate_kappa_via_xy(RadialSdeParams::for_dissipative(beta), kappa0, horizon, dt, rng, record_every);
}

inline SdePath simulate_kappa_direct(const RadialSdeParams& p, double kappa0, double horizon, double dt,
                                     RandomStream& rng, std::size_t record_every = 1) {
  p.validate();
  detail::check_step(dt);
  if (!(kappa0 >= 0.0)) throw ConfigError("kappa0 must be non-negative");
  return detail::run_kappa(DirectStepper(p, kappa0, dt), horizon, dt, rng, record_every);
}

enum class KappaScheme { planar, direct };

inline const char* to_string(KappaScheme s) { return s == KappaScheme::planar ? "xy" : "direct"; }

// kappa at each of `times` (ascending, on the dt lattice) for `paths`
// independent paths. Path k uses substream (seed, k, stream_purpose).
// Result is indexed [time][path].
inline std::vector<std::vector<double>> kappa_samples(const RadialSdeParams& p, KappaScheme scheme, double kappa0,
                                                      const std::vector<double>& times, double dt, std::size_t paths,
                                                      std::uint64_t seed, std::uint32_t stream_purpose,
                                                      unsigned workers = 0) {
  p.validate();
  detail::check_step(dt);
  if (!(kappa0 >= 0.0)) throw ConfigError("kappa0 must be non-negative");
  if (scheme == KappaScheme::planar && !p.has_planar_form())
    throw ConfigError("planar representation needs c1 = c3 / 2");
  if (paths < 1) throw ConfigError("path count must be at least 1");
  std::vector<std::size_t> at(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] < 0.0) throw ConfigError("sample times must be non-negative");
    at[j] = detail::steps_to(times[j], dt, "sample time");
    if (j > 0 && at[j] < at[j - 1]) throw ConfigError("sample times must be ascending");
  }

  std::vector<std::vector<double>> out(times.size(), std::vector<double>(paths));
  auto drive = [&](auto stepper, std::size_t k, RandomStream& rng) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < at.size(); ++j) {
      for (; i < at[j]; ++i) stepper.step(rng);
      out[j][k] = stepper.kappa();
    }
  };
  parallel_for(paths, workers, [&](std::size_t k) {
    RandomStream rng(seed, {k, stream_purpose});
    if (scheme == KappaScheme::planar)
      drive(PlanarStepper(p, kappa0, dt), k, rng);
    else
      drive(DirectStepper(p, kappa0, dt), k, rng);
  });
  return out;
}

inline std::string sde_path_csv(const SdePath& path) {
  std::string out = "t,kappa\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out += io::shortest(path.t[i]);
    out += ',';
    out += io::shortest(path.kappa[i]);
    out += '\n';
  }
  return out;
}

// Stationary law of the radial SDE from the speed measure:
//   pi(kappa) proportional to kappa^(2 c1 / c3 - 1) exp(-c2 kappa^2 / c3).
class StationaryDensity {
 public:
  explicit StationaryDensity(const RadialSdeParams& p) : p_(p) {
    p_.validate();
    power_ = 2.0 * p_.c1 / p_.c3 - 1.0;
    rate_ = p_.c2 / p_.c3;
    boost::math::quadrature::exp_sinh<double> integrator;
    norm_ = integrator.integrate([this](double k) { return unnormalized(k); });
    if (!(norm_ > 0.0) || !std::isfinite(norm_)) throw ConfigError("stationary density cannot be normalized");
  }

  double power() const { return power_; }
  double rate() const { return rate_; }
  double normalization() const { return norm_; }

  double unnormalized(double k) const {
    if (k <= 0.0) return 0.0;
    return std::pow(k, power_) * std::exp(-rate_ * k * k);
  }

  double pdf(double k) const { return unnormalized(k) / norm_; }

  double cdf(double k) const {
    if (k <= 0.0) return 0.0;
    const double upper = tail_point();
    if (k >= upper) return 1.0 - upper_tail(k);
    boost::math::quadrature::tanh_sinh<double> integrator;
    return std::clamp(integrator.integrate([this](double s) { return pdf(s); }, 0.0, k), 0.0, 1.0);
  }

  double quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
    double hi = std::sqrt(1.0 / rate_);
    while (cdf(hi) < q) hi *= 2.0;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve([&](double k) { return cdf(k) - q; }, 0.0, hi, -q, cdf(hi) - q,
                                                     boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
  }

 private:
  // Beyond this point the mass is below double resolution of the CDF.
  double tail_point() const { return std::sqrt(40.0 / rate_) + 1.0; }

  double upper_tail(double k) const {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([this](double s) { return pdf(s); }, k, std::numeric_limits<double>::infinity());
  }

  RadialSdeParams p_;
  double power_ = 0.0;
  double rate_ = 0.0;
  double norm_ = 1.0;
};

inline std::string density_csv(const StationaryDensity& d, double kappa_max, std::size_t points) {
  if (points < 2) throw ConfigError("density table needs at least two points");
  std::string out = "kappa,pdf\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double k = kappa_max * static_cast<double>(i) / static_cast<double>(points - 1);
    out += io::shortest(k);
    out += ',';
    out += io::shortest(d.pdf(k));
    out += '\n';
  }
  return out;
}

}  // namespace cwhopf
