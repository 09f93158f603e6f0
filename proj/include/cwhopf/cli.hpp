#pragma once

// Command-line front end. All options live in one flat namespace so that a
// plain key=value file (--config) or a previous run's manifest.json
// (--manifest) can supply any of them; explicit flags win over both.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cwhopf/averaging.hpp"
#include "cwhopf/critical_compare.hpp"
#include "cwhopf/error.hpp"
#include "cwhopf/fluct.hpp"
#include "cwhopf/generator.hpp"
#include "cwhopf/io.hpp"
#include "cwhopf/limit_dynamics.hpp"
#include "cwhopf/micro_sim.hpp"
#include "cwhopf/model.hpp"
#include "cwhopf/rescale.hpp"

namespace cwhopf::cli {

inline constexpr const char* kVersion = "0.1.0";

struct Settings {
  std::string command;
  std::string model = "dissipative";
  double alpha = 1.0;
  double beta = 1.5;
  double gamma = 0.5;
  double j11 = 2.0;
  double j12 = 2.0;
  double j21 = -2.0;
  std::string j22;  // empty: fixed by the trace condition

  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
  std::string out = "out";

  // phase-scan
  double beta_min = 1.2;
  double beta_max = 1.8;
  std::size_t beta_steps = 13;
  double ode_horizon = 400.0;
  double ode_step = 1e-2;
  double tail_fraction = 0.25;

  // simulate-micro
  std::int64_t n = 1000;
  std::size_t replicas = 1;
  double horizon = 10.0;
  double grid_step = 0.1;
  std::string init = "symmetric";
  double lambda0 = 0.0;
  double lambda_bar = 0.5;
  double epsilon = 0.5;

  // simulate-limit
  std::string kappa0;  // empty: the critical initial value from lambda_bar / epsilon
  double sde_dt = 1e-4;
  std::size_t paths = 10;
  std::string scheme = "xy";
  double record_step = 1e-2;
  double density_max = 20.0;
  std::size_t density_points = 401;

  // averaging-check
  double kappa = 1.0;
  std::size_t n_quad = kDefaultPhaseNodes;

  // generator-check
  std::string n_list = "100,1000,10000";
  std::string test_functions = "const,x,y,x^2,y^2,xy";

  // critical-compare
  std::string compare_n_list = "400,2500,10000";
  std::string checkpoints = "0.5,1";
  double rescaled_step = 1e-2;
  double limit_dt = 1e-4;
  std::size_t limit_factor = 10;
};

namespace detail {

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, std::string>)
    return v;
  else if constexpr (std::is_floating_point_v<T>)
    return io::shortest(v);
  else
    return std::to_string(v);
}

// Registers --name bound to `var` and remembers how to print its final value.
class Registry {
 public:
  explicit Registry(CLI::App& app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help, bool recorded = true) {
    CLI::Option* opt = app_.add_option("--" + name, var, help)->capture_default_str();
    if (recorded) printers_.emplace(name, [&var] { return format_value(var); });
    return opt;
  }

  std::map<std::string, std::string> snapshot() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, f] : printers_) out.emplace(k, f());
    return out;
  }

 private:
  CLI::App& app_;
  std::map<std::string, std::function<std::string()>> printers_;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& field) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      T v{};
      if constexpr (std::is_floating_point_v<T>)
        v = std::stod(item, &used);
      else
        v = static_cast<T>(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError(field + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(field + ": empty list");
  return out;
}

inline double parse_number(const std::string& text, const std::string& field) {
  return parse_list<double>(text, field).at(0);
}

inline DissipativeParams dissipative_params(const Settings& s) {
  DissipativeParams p{s.alpha, s.beta};
  p.validate();
  return p;
}

inline TwoPopParams twopop_params(const Settings& s) {
  TwoPopParams p = TwoPopParams::with_trace_condition(s.gamma, s.j11, s.j12, s.j21);
  if (!s.j22.empty()) p.j22 = parse_number(s.j22, "j22");
  p.validate();
  return p;
}

inline bool is_dissipative(const Settings& s) {
  if (s.model == "dissipative") return true;
  if (s.model == "two-pop") return false;
  throw ConfigError("model: expected 'dissipative' or 'two-pop', got '" + s.model + "'");
}

// ---- subcommands -----------------------------------------------------------

inline void phase_scan(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  if (!is_dissipative(s)) throw ConfigError("phase-scan is defined for the dissipative model");
  if (s.beta_steps < 2) throw ConfigError("beta-steps must be at least 2");
  if (!(s.beta_max > s.beta_min)) throw ConfigError("beta-max must exceed beta-min");
  std::vector<std::string> rows(s.beta_steps);
  parallel_for(s.beta_steps, s.workers, [&](std::size_t i) {
    const double beta =
        s.beta_min + (s.beta_max - s.beta_min) * static_cast<double>(i) / static_cast<double>(s.beta_steps - 1);
    const DissipativeParams p{s.alpha, beta};
    p.validate();
    const Eigen2 e = jacobian_origin(p);
    const OdeSolution sol =
        integrate([&](Vec2 x) { return field_dissipative(x, p); }, {0.1, 0.1}, s.ode_horizon, s.ode_step);
    const CycleDetection c = detect_limit_cycle(sol, s.tail_fraction);
    rows[i] = io::shortest(beta) + ',' + io::shortest(e.values[0].real()) + ',' + io::shortest(e.values[0].imag()) +
              ',' + to_string(c.verdict) + ',' + io::shortest(c.amplitude) + ',' + io::shortest(c.period) + '\n';
  });
  std::string csv = "beta,re_eig,im_eig,cycle,amplitude,period\n";
  for (const std::string& r : rows) csv += r;
  io::write_atomic(out / "phase_scan.csv", csv);
  log << "wrote " << (out / "phase_scan.csv").string() << " (" << s.beta_steps << " rows)\n";
}

inline InitialCondition initial_condition(const Settings& s) {
  if (s.init == "symmetric") return InitialCondition::symmetric(s.lambda0);
  if (s.init == "critical")
    return is_dissipative(s) ? InitialCondition::critical_dissipative(s.lambda_bar)
                             : InitialCondition::critical_twopop(s.epsilon);
  throw ConfigError("init: expected 'symmetric' or 'critical', got '" + s.init + "'");
}

inline std::string replica_name(const std::string& stem, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%05zu.csv", stem.c_str(), k);
  return buf;
}

inline void simulate_micro(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  const InitialCondition init = initial_condition(s);
  std::vector<Trajectory> trajs = is_dissipative(s)
                                      ? ensemble(dissipative_params(s), s.n, s.replicas, init, s.horizon, s.grid_step,
                                                 s.seed, s.workers)
                                      : ensemble(twopop_params(s), s.n, s.replicas, init, s.horizon, s.grid_step,
                                                 s.seed, s.workers);
  std::uint64_t events = 0;
  for (const Trajectory& t : trajs) {
    io::write_atomic(out / replica_name("micro", t.replica), trajectory_csv(t));
    events += t.events;
  }
  log << "wrote " << trajs.size() << " trajectories to " << out.string() << " (" << events << " spin flips)\n";
}

inline RadialSdeParams radial_params(const Settings& s) {
  if (is_dissipative(s)) {
    const DissipativeParams p = dissipative_params(s);
    require_critical(p);
    return RadialSdeParams::for_dissipative(p.beta);
  }
  const TwoPopAveraging avg = averaged_coeffs_twopop(twopop_params(s), 1.0);
  return RadialSdeParams::for_twopop(avg.z1_numeric, avg.z2_numeric);
}

inline void simulate_limit(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  const RadialSdeParams rp = radial_params(s);
  double k0 = 0.0;
  if (!s.kappa0.empty())
    k0 = parse_number(s.kappa0, "kappa0");
  else
    k0 = is_dissipative(s) ? kappa0_limit(dissipative_params(s), s.lambda_bar)
                           : kappa0_limit(twopop_params(s), s.epsilon);
  KappaScheme scheme = KappaScheme::planar;
  if (s.scheme == "direct")
    scheme = KappaScheme::direct;
  else if (s.scheme != "xy")
    throw ConfigError("scheme: expected 'xy' or 'direct', got '" + s.scheme + "'");
  if (s.paths < 1) throw ConfigError("paths must be at least 1");
  const std::size_t record_every = ::cwhopf::detail::steps_to(s.record_step, s.sde_dt, "record-step");
  if (record_every == 0) throw ConfigError("record-step must be at least sde-dt");

  std::vector<SdePath> paths(s.paths);
  parallel_for(s.paths, s.workers, [&](std::size_t k) {
    RandomStream rng(s.seed, {k, purpose::limit_sde});
    paths[k] = scheme == KappaScheme::planar ? simulate_kappa_via_xy(rp, k0, s.horizon, s.sde_dt, rng, record_every)
                                             : simulate_kappa_direct(rp, k0, s.horizon, s.sde_dt, rng, record_every);
    paths[k].seed = s.seed;
    paths[k].replica = k;
  });
  for (std::size_t k = 0; k < paths.size(); ++k) io::write_atomic(out / replica_name("path", k), sde_path_csv(paths[k]));
  const StationaryDensity density(rp);
  io::write_atomic(out / "density.csv", density_csv(density, s.density_max, s.density_points));
  log << "wrote " << paths.size() << " kappa paths (" << to_string(scheme) << ", kappa0 = " << io::shortest(k0)
      << ") and density.csv to " << out.string() << "\n";
}

inline void averaging_check(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  nlohmann::json j;
  bool pass = false;
  if (is_dissipative(s)) {
    const AveragedCoefficients q = averaged_coeffs_dissipative(s.beta, s.kappa, s.n_quad);
    const AveragedCoefficients c = limit_coeffs_dissipative(s.beta, s.kappa);
    pass = std::abs(q.drift - c.drift) <= 1e-10 && std::abs(q.diffusion - c.diffusion) <= 1e-10;
    log << "drift " << io::shortest(q.drift) << "\n"
        << "diffusion " << io::shortest(q.diffusion) << "\n"
        << "closed-form match " << (pass ? "PASS" : "FAIL") << "\n";
    j = {{"model", "dissipative"},
         {"beta", s.beta},
         {"kappa", s.kappa},
         {"n_quad", s.n_quad},
         {"drift", q.drift},
         {"diffusion", q.diffusion},
         {"drift_closed_form", c.drift},
         {"diffusion_closed_form", c.diffusion},
         {"closed_form_match", pass}};
  } else {
    const TwoPopParams p = twopop_params(s);
    const TwoPopAveraging a = averaged_coeffs_twopop(p, s.kappa, s.n_quad);
    pass = std::abs(a.z1_numeric - a.z1_closed) <= 1e-8 * std::max(1.0, std::abs(a.z1_closed));
    log << "drift " << io::shortest(a.coeffs.drift) << "\n"
        << "diffusion " << io::shortest(a.coeffs.diffusion) << "\n"
        << "Z1 quadrature " << io::shortest(a.z1_numeric) << ", closed form " << io::shortest(a.z1_closed) << " "
        << (pass ? "PASS" : "FAIL") << "\n"
        << "Z2 quadrature " << io::shortest(a.z2_numeric) << ", printed " << io::shortest(a.z2_printed)
        << (a.z2_discrepancy ? " (DISCREPANCY: quadrature value is used)" : " (agree)") << "\n"
        << "limit SDE " << (a.z2_valid ? "well posed (Z2 < 0)" : "NOT well posed (Z2 >= 0)") << "\n";
    j = {{"model", "two-pop"},
         {"gamma", p.gamma},
         {"j11", p.j11},
         {"j12", p.j12},
         {"j21", p.j21},
         {"j22", p.j22},
         {"gamma_big", p.gamma_big()},
         {"kappa", s.kappa},
         {"n_quad", s.n_quad},
         {"drift", a.coeffs.drift},
         {"diffusion", a.coeffs.diffusion},
         {"z1_quadrature", a.z1_numeric},
         {"z1_closed_form", a.z1_closed},
         {"z2_quadrature", a.z2_numeric},
         {"z2_printed", a.z2_printed},
         {"z2_discrepancy", a.z2_discrepancy},
         {"z2_valid", a.z2_valid},
         {"cross_term_average", a.cross_average},
         {"z1_match", pass}};
  }
  io::write_atomic(out / "averaging.json", j.dump(2) + "\n");
}

inline void generator_check(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  const auto ns = parse_list<std::int64_t>(s.n_list, "n-list");
  std::vector<TestFunction> fs;
  std::stringstream ss(s.test_functions);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) fs.push_back(test_functions::by_name(name));
  if (fs.empty()) throw ConfigError("test-functions: empty list");
  std::string csv = "test_function,n,sup_error\n";
  for (const TestFunction& f : fs)
    for (std::int64_t n : ns) {
      const double e = is_dissipative(s) ? generator_consistency(dissipative_params(s), n, f)
                                         : generator_consistency(twopop_params(s), n, f);
      csv += f.name + ',' + std::to_string(n) + ',' + io::shortest(e) + '\n';
      log << f.name << " N=" << n << " sup error " << io::shortest(e) << "\n";
    }
  io::write_atomic(out / "generator.csv", csv);
}

inline void critical_compare_cmd(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  CriticalCompareConfig c;
  c.n_list = parse_list<std::int64_t>(s.compare_n_list, "compare-n-list");
  c.replicas = s.replicas;
  c.horizon = s.horizon;
  c.checkpoints = parse_list<double>(s.checkpoints, "checkpoints");
  c.rescaled_step = s.rescaled_step;
  c.limit_dt = s.limit_dt;
  c.limit_factor = s.limit_factor;
  c.seed = s.seed;
  c.workers = s.workers;
  ComparisonReport r;
  if (is_dissipative(s)) {
    c.initial_offset = s.lambda_bar;
    r = critical_compare(dissipative_params(s), c);
  } else {
    c.initial_offset = s.epsilon;
    r = critical_compare(twopop_params(s), c);
  }
  io::write_atomic(out / "report.json", to_json(r).dump(2) + "\n");
  log << "kappa0 = " << io::shortest(r.kappa0) << "\n";
  for (const SizeComparison& sc : r.sizes) {
    log << "N=" << sc.n << ":";
    for (const CheckpointComparison& cp : sc.checkpoints)
      log << " KS(t=" << io::shortest(cp.t) << ")=" << io::shortest(cp.ks);
    log << " phase slope " << io::shortest(sc.phase.mean_slope) << " (expected " << io::shortest(sc.phase.expected_slope)
        << ")\n";
  }
}

}  // namespace detail

// Returns the process exit code: 0 success, 1 invalid input, 2 runtime failure.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  Settings s;
  CLI::App app{"Simulation and verification toolkit for Curie-Weiss models with a Hopf bifurcation", "cwhopf"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.set_version_flag("--version", kVersion);
  std::string manifest;
  app.add_option("--manifest", manifest, "re-run with the configuration recorded in a manifest.json");

  detail::Registry reg(app);
  app.add_option("command", s.command,
                 "phase-scan | simulate-micro | simulate-limit | averaging-check | generator-check | critical-compare")
      ->check(CLI::IsMember({"phase-scan", "simulate-micro", "simulate-limit", "averaging-check", "generator-check",
                             "critical-compare"}));
  reg.add("model", s.model, "dissipative | two-pop");
  reg.add("alpha", s.alpha, "dissipation rate (dissipative model)");
  reg.add("beta", s.beta, "inverse temperature (dissipative model)");
  reg.add("gamma", s.gamma, "population-1 fraction (two-pop model)");
  reg.add("j11", s.j11, "coupling J11");
  reg.add("j12", s.j12, "coupling J12");
  reg.add("j21", s.j21, "coupling J21");
  reg.add("j22", s.j22, "coupling J22; default solves the trace condition");
  reg.add("seed", s.seed, "master seed");
  reg.add("workers", s.workers, "worker threads (0 = logical cores)", false);
  reg.add("out", s.out, "output directory", false);

  reg.add("beta-min", s.beta_min, "phase-scan: first beta");
  reg.add("beta-max", s.beta_max, "phase-scan: last beta");
  reg.add("beta-steps", s.beta_steps, "phase-scan: number of beta values");
  reg.add("ode-horizon", s.ode_horizon, "phase-scan: ODE horizon");
  reg.add("ode-step", s.ode_step, "phase-scan: RK4 step");
  reg.add("tail-fraction", s.tail_fraction, "phase-scan: trailing fraction examined for a cycle");

  reg.add("n", s.n, "simulate-micro: number of spins");
  reg.add("replicas", s.replicas, "simulate-micro / critical-compare: replica count");
  reg.add("horizon", s.horizon, "time horizon (rescaled time for critical-compare)");
  reg.add("grid-step", s.grid_step, "simulate-micro: sampling step");
  reg.add("init", s.init, "simulate-micro: symmetric | critical");
  reg.add("lambda0", s.lambda0, "symmetric init: lambda(0)");
  reg.add("lambda-bar", s.lambda_bar, "critical init (dissipative): lambda(0) = lambda_bar N^{-1/4}");
  reg.add("epsilon", s.epsilon, "critical init (two-pop): P(+1) = 1/2 + epsilon N^{-1/4} in population 1");

  reg.add("kappa0", s.kappa0, "simulate-limit: initial kappa (default from lambda-bar / epsilon)");
  reg.add("sde-dt", s.sde_dt, "simulate-limit: Euler step");
  reg.add("paths", s.paths, "simulate-limit: number of paths");
  reg.add("scheme", s.scheme, "simulate-limit: xy | direct");
  reg.add("record-step", s.record_step, "simulate-limit: output step");
  reg.add("density-max", s.density_max, "simulate-limit: largest kappa in density.csv");
  reg.add("density-points", s.density_points, "simulate-limit: rows in density.csv");

  reg.add("kappa", s.kappa, "averaging-check: kappa");
  reg.add("n-quad", s.n_quad, "averaging-check: phase quadrature nodes (>= 16)");

  reg.add("n-list", s.n_list, "generator-check: comma-separated N values");
  reg.add("test-functions", s.test_functions, "generator-check: subset of const,x,y,x^2,y^2,xy");

  reg.add("compare-n-list", s.compare_n_list, "critical-compare: comma-separated N ladder");
  reg.add("checkpoints", s.checkpoints, "critical-compare: comma-separated rescaled times");
  reg.add("rescaled-step", s.rescaled_step, "critical-compare: rescaled sampling step");
  reg.add("limit-dt", s.limit_dt, "critical-compare: Euler step of the reference SDE");
  reg.add("limit-factor", s.limit_factor, "critical-compare: reference paths per replica (>= 10)");

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);  // CLI11 expects reversed order

  try {
    app.parse(args);
    if (!manifest.empty()) {
      // Manifest values become defaults; explicit flags are appended last so
      // they override.
      const nlohmann::json m = nlohmann::json::parse(io::read_file(manifest));
      std::vector<std::string> merged;
      if (s.command.empty()) merged.push_back(m.at("command").get<std::string>());
      // Empty values mean "default" and are left out.
      for (const auto& [k, v] : m.at("config").items())
        if (!v.get<std::string>().empty()) merged.push_back("--" + k + "=" + v.get<std::string>());
      for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--manifest") {
          ++i;
          continue;
        }
        if (a.rfind("--manifest=", 0) != 0) merged.push_back(a);
      }
      s = Settings{};
      manifest.clear();
      app.clear();
      std::reverse(merged.begin(), merged.end());
      app.parse(merged);
    }
    if (s.command.empty()) throw CLI::RequiredError("command");
  } catch (const CLI::ParseError& e) {
    return app.exit(e, log, err) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const std::filesystem::path out = s.out;
  try {
    if (s.command == "phase-scan")
      detail::phase_scan(s, out, log);
    else if (s.command == "simulate-micro")
      detail::simulate_micro(s, out, log);
    else if (s.command == "simulate-limit")
      detail::simulate_limit(s, out, log);
    else if (s.command == "averaging-check")
      detail::averaging_check(s, out, log);
    else if (s.command == "generator-check")
      detail::generator_check(s, out, log);
    else
      detail::critical_compare_cmd(s, out, log);

    nlohmann::json config = nlohmann::json::object();
    for (const auto& [k, v] : reg.snapshot()) config[k] = v;
    const nlohmann::json man = {
        {"toolkit", "cwhopf"}, {"version", kVersion}, {"command", s.command}, {"seed", s.seed}, {"config", config}};
    io::write_atomic(out / "manifest.json", man.dump(2) + "\n");
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace cwhopf::cli
