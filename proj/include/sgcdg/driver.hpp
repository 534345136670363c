#pragma once

#include "cfl_analysis.hpp"
#include "problems.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sgcdg
{
// configuration mistakes (unknown keys, bad values, missing files); the
// command line tool maps these to exit code 2, anything else to 3
struct config_error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

using config = std::map<std::string, std::string>;

namespace detail
{
inline std::string trim(std::string s)
{
  auto const a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos)
    return "";
  auto const b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
} // namespace detail

// flat utf-8 key=value lines; '#' starts a comment, blank lines ignored
inline config parse_config(std::string const &text)
{
  config out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    auto const hash = line.find('#');
    if (hash != std::string::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty())
      continue;
    auto const eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected key=value, got '" + line + "'");
    std::string const key = detail::trim(line.substr(0, eq));
    std::string const val = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error("config line " + std::to_string(lineno) +
                         ": empty key");
    out[key] = val;
  }
  return out;
}

inline config load_config(std::string const &path)
{
  std::ifstream in(path);
  if (!in)
    throw config_error("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

namespace detail
{
inline void check_keys(config const &cfg, std::set<std::string> const &allowed)
{
  std::string bad;
  for (auto const &[key, val] : cfg)
    if (allowed.count(key) == 0)
      bad += (bad.empty() ? "" : ", ") + key;
  if (!bad.empty())
    throw config_error("invalid config keys: " + bad);
}

inline std::string get(config const &cfg, std::string const &key,
                       std::string const &fallback)
{
  auto const it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

inline int get_int(config const &cfg, std::string const &key, int fallback)
{
  auto const it = cfg.find(key);
  if (it == cfg.end())
    return fallback;
  try
  {
    std::size_t pos = 0;
    int const v = std::stoi(it->second, &pos);
    if (pos != it->second.size())
      throw std::invalid_argument("");
    return v;
  }
  catch (std::exception const &)
  {
    throw config_error("config key '" + key + "': not an integer: '" +
                       it->second + "'");
  }
}

inline double get_double(config const &cfg, std::string const &key,
                         double fallback)
{
  auto const it = cfg.find(key);
  if (it == cfg.end())
    return fallback;
  try
  {
    std::size_t pos = 0;
    double const v = std::stod(it->second, &pos);
    if (pos != it->second.size())
      throw std::invalid_argument("");
    return v;
  }
  catch (std::exception const &)
  {
    throw config_error("config key '" + key + "': not a number: '" +
                       it->second + "'");
  }
}

inline int require_int(config const &cfg, std::string const &key)
{
  if (cfg.find(key) == cfg.end())
    throw config_error("missing required config key '" + key + "'");
  return get_int(cfg, key, 0);
}

inline std::string require(config const &cfg, std::string const &key)
{
  auto const it = cfg.find(key);
  if (it == cfg.end())
    throw config_error("missing required config key '" + key + "'");
  return it->second;
}

// six significant digits, scientific, matching the precision of the tables
inline std::string sci(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

inline std::string fixed2(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// stable short content hash for the build id line
inline std::string fnv1a(std::string const &s)
{
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s)
  {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%012llx",
                static_cast<unsigned long long>(h & 0xffffffffffffull));
  return buf;
}

// '#'-prefixed metadata block: every resolved key, sorted, plus a build id
// derived from the resolved configuration so reruns are byte-identical
inline std::string metadata(std::string const &subcommand,
                            config const &resolved)
{
  std::ostringstream out;
  out << "# sgcdg " << subcommand << "\n";
  for (auto const &[key, val] : resolved)
    out << "# " << key << " = " << val << "\n";
  out << "# build = " << fnv1a(subcommand + out.str()) << "\n";
  return out.str();
}

inline double dt_rule(int k, double cfl_safety, double h,
                      std::vector<double> const &speeds)
{
  // the fixed third-order integrator limits a quartic space unless the step
  // shrinks faster than the mesh
  if (k == 3)
    return cfl_safety * std::pow(h, 4.0 / 3.0);
  return select_dt(speeds, h, cfl_safety);
}

inline std::string dt_rule_name(int k)
{
  return k == 3 ? "dt = cfl_safety * h^(4/3)"
                : "dt = cfl_safety / sum_i(c_i / h)";
}
} // namespace detail

// one convergence study: evolve the configured problem to its final time for
// each N in the range and tabulate L2 errors and orders
inline std::string run_convergence(config const &cfg)
{
  detail::check_keys(cfg, {"problem", "d", "k", "N_min", "N_max", "boundary",
                           "rk_order", "cfl_safety", "tau_max_rule", "T",
                           "component", "output", "threads"});
  std::string name = detail::require(cfg, "problem");
  int const d = detail::get_int(cfg, "d", 2);
  int const k = detail::require_int(cfg, "k");
  int const n_min = detail::require_int(cfg, "N_min");
  int const n_max = detail::require_int(cfg, "N_max");
  std::string const boundary = detail::get(cfg, "boundary", "periodic");
  int const rk_order = detail::get_int(cfg, "rk_order", 3);
  double const cfl_safety = detail::get_double(cfg, "cfl_safety", 0.1);
  std::string const tau_rule = detail::get(cfg, "tau_max_rule", "h/(2k+1)");
  if (n_min > n_max || n_min < 1)
    throw config_error("need 1 <= N_min <= N_max");
  if (boundary == "dirichlet")
  {
    if (name != "advection")
      throw config_error("boundary=dirichlet is only available for the "
                         "advection problem");
    name = "advection-dirichlet";
  }
  else if (boundary != "periodic")
    throw config_error("config key 'boundary': expected periodic or "
                       "dirichlet, got '" + boundary + "'");
  if (tau_rule != "h/(2k+1)" && tau_rule != "dt")
    throw config_error("config key 'tau_max_rule': expected h/(2k+1) or dt, "
                       "got '" + tau_rule + "'");

  problem_spec const p = [&]() {
    try
    {
      return make_problem(name, d);
    }
    catch (std::invalid_argument const &e)
    {
      throw config_error(e.what());
    }
  }();
  double const T = detail::get_double(cfg, "T", p.T);

  config resolved = cfg;
  resolved["problem"] = p.name;
  resolved["d"] = std::to_string(d);
  resolved["boundary"] = boundary;
  resolved["rk_order"] = std::to_string(rk_order);
  resolved["cfl_safety"] = detail::sci(cfl_safety);
  resolved["T"] = detail::sci(T);
  resolved["tau_max_rule"] = tau_rule;
  resolved["dt_rule"] = detail::dt_rule_name(k);
  resolved["quadrature_ppc"] = std::to_string(k + 2);

  std::ostringstream out;
  out << detail::metadata("convergence", resolved);
  out << "N,h_N,L2_error,order\n";
  double prev = 0.0;
  for (int N = n_min; N <= n_max; ++N)
  {
    double const h = level_h(N);
    double const dt = detail::dt_rule(k, cfl_safety, h, p.speeds);
    double const tau = (tau_rule == "dt") ? dt : 0.0;
    auto const op = make_cdg_operator(p.system, N, k, tau);
    projector const pu = make_projector(op.sp_u);
    projector const pv = make_projector(op.sp_v);
    solution_state s = exact_state(p, 0.0, op, pu, pv);
    s = integrate_to(s, T, dt,
                     [&](solution_state const &x) { return op.rhs(x); },
                     rk_order);
    double const err = solution_error(p, s, op, pu, pv);
    if (!std::isfinite(err))
      throw std::runtime_error("run_convergence: non-finite error at N = " +
                               std::to_string(N));
    out << N << ',' << detail::sci(h) << ',' << detail::sci(err) << ',';
    if (N > n_min)
      out << detail::fixed2(std::log2(prev / err));
    out << '\n';
    prev = err;
  }
  return out.str();
}

// L2 projection of exp(prod_i x_i) onto the dual non-periodic sparse space;
// small errors are measured by grid quadrature, which stays accurate where
// the expanded-form error formula cancels to roundoff
inline std::string run_projection(config const &cfg)
{
  detail::check_keys(cfg, {"d", "k", "N_min", "N_max", "output", "threads"});
  int const d = detail::get_int(cfg, "d", 2);
  int const k = detail::require_int(cfg, "k");
  int const n_min = detail::require_int(cfg, "N_min");
  int const n_max = detail::require_int(cfg, "N_max");
  if (d < 1 || d > 3)
    throw config_error("projection studies support d in {1,2,3}");
  if (n_min > n_max || n_min < 1)
    throw config_error("need 1 <= N_min <= N_max");

  config resolved = cfg;
  resolved["d"] = std::to_string(d);
  resolved["function"] = "exp(prod_i x_i)";
  resolved["space"] = "dual non-periodic sparse";
  resolved["quadrature_ppc"] = std::to_string(k + 2);

  separable_fn const f = exp_of_product(d);
  point_fn const fp = [d](std::array<double, max_dim> const &x) {
    double p = 1.0;
    for (int i = 0; i < d; ++i)
      p *= x[i];
    return std::exp(p);
  };

  std::ostringstream out;
  out << detail::metadata("projection", resolved);
  out << "N,h_N,L2_error,order,flag\n";
  double prev = 0.0;
  for (int N = n_min; N <= n_max; ++N)
  {
    space1d const s1{mesh_role::dual, boundary_type::nonperiodic, N, k};
    projector const pr = make_projector(enumerate(d, s1));
    Eigen::VectorXd const c = pr.project(f);
    double err = pr.l2_error(c, f);
    if (err < 1.0e-4) // below this the expanded form loses digits
      err = l2_error_grid(pr, c, fp);
    out << N << ',' << detail::sci(level_h(N)) << ',' << detail::sci(err)
        << ',';
    if (N > n_min)
      out << detail::fixed2(std::log2(prev / err));
    out << ',' << (err < 5.0e-12 ? "near machine floor" : "") << '\n';
    prev = err;
  }
  return out.str();
}

namespace detail
{
// mesh level at which each scheme's CFL number has stabilized to the printed
// two decimals; the sparse columns converge from below in N
inline int cfl_auto_n(scheme_kind sk, int k, int nu)
{
  if (!is_sparse(sk))
    return k == 1 ? 3 : 2;
  if (sk == scheme_kind::sparse_dg && k == 1)
    return 5;
  if (k == 2)
    return 3;
  return 4;
}
} // namespace detail

// maximum CFL numbers of the four schemes for u_t + u_x1 + u_x2 = 0, one row
// per (scheme, k, nu) cell of the reference table
inline std::string run_cfl(config const &cfg)
{
  detail::check_keys(cfg, {"scheme", "N", "output", "threads"});
  std::string const which = detail::get(cfg, "scheme", "sparse_cdg");
  int const n_fixed = detail::get_int(cfg, "N", 0);
  std::map<std::string, scheme_kind> const names = {
      {"dg", scheme_kind::dg},
      {"cdg", scheme_kind::cdg},
      {"sparse_dg", scheme_kind::sparse_dg},
      {"sparse_cdg", scheme_kind::sparse_cdg}};
  std::vector<std::pair<std::string, scheme_kind>> schemes;
  if (which == "all")
    schemes.assign(names.begin(), names.end());
  else if (names.count(which))
    schemes.emplace_back(which, names.at(which));
  else
    throw config_error("config key 'scheme': expected dg, cdg, sparse_dg, "
                       "sparse_cdg or all, got '" + which + "'");

  config resolved = cfg;
  resolved["scheme"] = which;
  resolved["N"] = n_fixed > 0 ? std::to_string(n_fixed) : "auto";
  resolved["equation"] = "u_t + u_x1 + u_x2 = 0";

  std::ostringstream out;
  out << detail::metadata("cfl", resolved);
  out << "scheme,k,nu,N,cfl\n";
  for (auto const &[sname, sk] : schemes)
    for (int k = 1; k <= 3; ++k)
      for (int nu = 2; nu <= 4; ++nu)
      {
        if (nu == 2 && k > 1)
          continue; // second-order time marching is unstable there
        int const N = n_fixed > 0 ? n_fixed : detail::cfl_auto_n(sk, k, nu);
        dense_operator const op =
            build_dense_operator(sk, 2, N, k, {1.0, 1.0});
        double const c = max_cfl(op, nu, level_h(N), {1.0, 1.0});
        out << sname << ',' << k << ',' << nu << ',' << N << ','
            << detail::fixed2(c) << '\n';
      }
  return out.str();
}

// discrete energy of the evolving solution sampled along the march; the
// drift column is energy(t) - energy(0), exactly zero on the first row
inline std::string run_energy(config const &cfg)
{
  detail::check_keys(cfg, {"problem", "d", "k", "N", "T", "rk_order",
                           "cfl_safety", "sample_every", "output", "threads"});
  std::string const name = detail::get(cfg, "problem", "advection");
  int const d = detail::get_int(cfg, "d", 2);
  int const k = detail::require_int(cfg, "k");
  int const N = detail::require_int(cfg, "N");
  double const T = detail::get_double(cfg, "T", 100.0);
  int const rk_order = detail::get_int(cfg, "rk_order", 3);
  double const cfl_safety = detail::get_double(cfg, "cfl_safety", 0.1);
  int const sample_every = detail::get_int(cfg, "sample_every", 100);
  if (sample_every < 1)
    throw config_error("need sample_every >= 1");

  problem_spec const p = [&]() {
    try
    {
      return make_problem(name, d);
    }
    catch (std::invalid_argument const &e)
    {
      throw config_error(e.what());
    }
  }();

  double const h = level_h(N);
  double const dt = detail::dt_rule(k, cfl_safety, h, p.speeds);
  auto const op = make_cdg_operator(p.system, N, k);
  projector const pu = make_projector(op.sp_u);
  projector const pv = make_projector(op.sp_v);

  config resolved = cfg;
  resolved["problem"] = p.name;
  resolved["d"] = std::to_string(d);
  resolved["T"] = detail::sci(T);
  resolved["rk_order"] = std::to_string(rk_order);
  resolved["cfl_safety"] = detail::sci(cfl_safety);
  resolved["sample_every"] = std::to_string(sample_every);
  resolved["dt_rule"] = detail::dt_rule_name(k);
  resolved["dt"] = detail::sci(dt);
  resolved["tau_max"] = detail::sci(op.tau_max);
  resolved["quadrature_ppc"] = std::to_string(k + 2);

  std::ostringstream out;
  out << detail::metadata("energy", resolved);
  out << "t,energy,drift\n";
  solution_state s = exact_state(p, 0.0, op, pu, pv);
  double const e0 = op.energy(s);
  auto const rhs = [&](solution_state const &x) { return op.rhs(x); };
  long step = 0;
  out << detail::sci(0.0) << ',' << detail::sci(e0) << ',' << detail::sci(0.0)
      << '\n';
  while (s.t < T - 1.0e-12 * std::max(1.0, T))
  {
    double const stride = std::min(dt * sample_every, T - s.t);
    s = integrate_to(s, s.t + stride, dt, rhs, rk_order);
    step += sample_every;
    double const e = op.energy(s);
    if (!std::isfinite(e))
      throw std::runtime_error("run_energy: non-finite energy at t = " +
                               std::to_string(s.t));
    out << detail::sci(s.t) << ',' << detail::sci(e) << ','
        << detail::sci(e - e0) << '\n';
  }
  return out.str();
}

// uniform raster of one solution component of a state on the primal mesh;
// fixed = pairs (dim, coordinate) pinning all but two dimensions
inline std::string
export_slice(projector const &pr, Eigen::VectorXd const &c_ord, int resolution,
             std::vector<std::pair<int, double>> const &fixed,
             std::string const &header)
{
  int const d = pr.space.d;
  std::vector<bool> pinned(d, false);
  std::array<double, max_dim> x{};
  for (auto const &[dim, coord] : fixed)
  {
    if (dim < 0 || dim >= d || pinned[dim])
      throw config_error("slice plane: bad or repeated dimension");
    pinned[dim] = true;
    x[dim] = coord;
  }
  std::vector<int> free;
  for (int i = 0; i < d; ++i)
    if (!pinned[i])
      free.push_back(i);
  if (free.size() != 2)
    throw config_error("slice plane must leave exactly two free dimensions");

  std::ostringstream out;
  out << header;
  out << "x" << free[0] + 1 << ",x" << free[1] + 1 << ",value\n";
  for (int i = 0; i < resolution; ++i)
  {
    x[free[0]] = (i + 0.5) / resolution;
    for (int j = 0; j < resolution; ++j)
    {
      x[free[1]] = (j + 0.5) / resolution;
      out << detail::sci(x[free[0]]) << ',' << detail::sci(x[free[1]]) << ','
          << detail::sci(pr.evaluate(c_ord, x)) << '\n';
    }
  }
  return out.str();
}

// evolve the configured problem and raster one component of the primal-mesh
// solution on the requested plane
inline std::string run_slice(config const &cfg)
{
  detail::check_keys(cfg, {"problem", "d", "k", "N", "T", "boundary",
                           "rk_order", "cfl_safety", "component", "plane",
                           "resolution", "output", "threads"});
  std::string name = detail::require(cfg, "problem");
  int const d = detail::get_int(cfg, "d", 2);
  int const k = detail::require_int(cfg, "k");
  int const N = detail::require_int(cfg, "N");
  std::string const boundary = detail::get(cfg, "boundary", "periodic");
  int const rk_order = detail::get_int(cfg, "rk_order", 3);
  double const cfl_safety = detail::get_double(cfg, "cfl_safety", 0.1);
  int const component = detail::get_int(cfg, "component", 0);
  int const resolution = detail::get_int(cfg, "resolution", 128);
  if (resolution < 2)
    throw config_error("need resolution >= 2");
  if (boundary == "dirichlet")
  {
    if (name != "advection")
      throw config_error("boundary=dirichlet is only available for the "
                         "advection problem");
    name = "advection-dirichlet";
  }
  else if (boundary != "periodic")
    throw config_error("config key 'boundary': expected periodic or "
                       "dirichlet, got '" + boundary + "'");

  problem_spec const p = [&]() {
    try
    {
      return make_problem(name, d);
    }
    catch (std::invalid_argument const &e)
    {
      throw config_error(e.what());
    }
  }();
  double const T = detail::get_double(cfg, "T", p.T);
  if (component < 0 || component >= p.system.m)
    throw config_error("config key 'component': out of range");

  // plane: comma-separated pins like "x3=0.5"; all but two dims pinned
  std::vector<std::pair<int, double>> fixed;
  std::string const plane = detail::get(cfg, "plane", "");
  std::istringstream ps(plane);
  std::string pin;
  while (std::getline(ps, pin, ','))
  {
    pin = detail::trim(pin);
    if (pin.size() < 4 || pin[0] != 'x' || pin.find('=') == std::string::npos)
      throw config_error("config key 'plane': expected pins like x3=0.5");
    auto const eq = pin.find('=');
    try
    {
      fixed.emplace_back(std::stoi(pin.substr(1, eq - 1)) - 1,
                         std::stod(pin.substr(eq + 1)));
    }
    catch (std::exception const &)
    {
      throw config_error("config key 'plane': cannot parse pin '" + pin +
                         "'");
    }
  }

  double const dt = detail::dt_rule(k, cfl_safety, level_h(N), p.speeds);
  auto const op = make_cdg_operator(p.system, N, k);
  projector const pu = make_projector(op.sp_u);
  projector const pv = make_projector(op.sp_v);
  solution_state s = exact_state(p, 0.0, op, pu, pv);
  s = integrate_to(s, T, dt,
                   [&](solution_state const &x) { return op.rhs(x); },
                   rk_order);

  config resolved = cfg;
  resolved["problem"] = p.name;
  resolved["d"] = std::to_string(d);
  resolved["boundary"] = boundary;
  resolved["T"] = detail::sci(T);
  resolved["rk_order"] = std::to_string(rk_order);
  resolved["cfl_safety"] = detail::sci(cfl_safety);
  resolved["component"] = std::to_string(component);
  resolved["resolution"] = std::to_string(resolution);
  resolved["plane"] = plane;
  resolved["mesh"] = "primal";
  resolved["dt_rule"] = detail::dt_rule_name(k);

  return export_slice(pu, to_ordinal(op.sp_u, s.u[component]), resolution,
                      fixed, detail::metadata("slice", resolved));
}

} // namespace sgcdg
