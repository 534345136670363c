#pragma once

#include "time_integration.hpp"

namespace sgcdg
{
namespace detail
{
// substitute x_dim = value: the factor folds into the coefficients and the
// slot becomes free, turning a d-dimensional separable function into a
// function of the remaining coordinates (used for boundary traces)
inline separable_fn substitute(separable_fn f, int dim, double value)
{
  for (auto &t : f.terms)
  {
    if (t.factor[dim])
      t.coeff *= t.factor[dim](value);
    t.factor[dim] = {};
  }
  std::erase_if(f.terms, [](separable_term const &t) { return t.coeff == 0.0; });
  if (f.terms.empty())
    f.terms.push_back({0.0, {}});
  return f;
}

inline separable_fn scale(separable_fn f, double c)
{
  for (auto &t : f.terms)
    t.coeff *= c;
  return f;
}

inline separable_fn sum(separable_fn a, separable_fn const &b)
{
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  return a;
}

// multiply every term by a 1D factor in dimension `dim`
inline separable_fn scale_dim(separable_fn f, int dim, scalar_fn g)
{
  for (auto &t : f.terms)
    t.factor[dim] = factor_product(t.factor[dim], g);
  return f;
}

inline Eigen::Matrix3d rodrigues(Eigen::Vector3d const &n, double angle)
{
  Eigen::Matrix3d k;
  k << 0, -n(2), n(1), n(2), 0, -n(0), -n(1), n(0), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k +
         (1.0 - std::cos(angle)) * k * k;
}

// integral over [0,1] with a composite Gauss rule, for the exact norms of
// the plane-wave profiles (periodic in the diagonal coordinate)
inline double line_integral(std::function<double(double)> const &f)
{
  quadrature const ref = gauss_rule(10, 0.0, 1.0);
  int const cells = 64;
  double acc = 0.0;
  for (int c = 0; c < cells; ++c)
    for (int q = 0; q < ref.size(); ++q)
      acc += ref.weights[q] / cells * f((c + ref.nodes[q]) / cells);
  return acc;
}
} // namespace detail

// One component of initial data or exact solution: separable when an exact
// expansion exists, otherwise a black-box point function with its exact
// squared L2 norm for error reporting (the separable path derives the norm
// itself).
struct component_fn
{
  bool separable = false;
  separable_fn sep;
  point_fn pt;
  double l2sq = 0.0; // used by the black-box path only
};

struct problem_spec
{
  std::string name;
  hyperbolic_system system;
  double T = 1.0;
  std::vector<double> speeds;  // maximum wave speed per direction
  bool exact_any_time = true;  // false: exact known only at t = 0 and t = T
  std::function<std::vector<component_fn>(double t)> exact;
  double lambda = 0.0, mu = 0.0, rho = 0.0, c_p = 0.0, c_s = 0.0;
};

// smooth cosine bell of C^5 smoothness: b^{d-1} cos^6(pi r / 2b) inside
// radius b around xc
inline point_fn cosine_bell(int d, std::array<double, max_dim> xc, double b)
{
  return [d, xc, b](std::array<double, max_dim> const &x) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i)
      r2 += (x[i] - xc[i]) * (x[i] - xc[i]);
    double const r = std::sqrt(r2);
    if (r > b)
      return 0.0;
    double const c = std::cos(0.5 * M_PI * r / b);
    return std::pow(b, d - 1) * std::pow(c, 6);
  };
}

inline double cosine_bell_l2sq(int d, double b)
{
  double const surf = (d == 2) ? 2.0 * M_PI : 4.0 * M_PI;
  quadrature const ref = gauss_rule(100, 0.0, b);
  double acc = 0.0;
  for (int q = 0; q < ref.size(); ++q)
  {
    double const r = ref.nodes[q];
    double const c = std::cos(0.5 * M_PI * r / b);
    acc += ref.weights[q] * std::pow(c, 12) * std::pow(r, d - 1);
  }
  return std::pow(b, 2 * (d - 1)) * surf * acc;
}

namespace detail
{
inline coeff_term scalar_term(int dir, double a)
{
  coeff_term t;
  t.direction = dir;
  t.coupling = Eigen::MatrixXd::Constant(1, 1, a);
  return t;
}

inline component_fn from_separable(separable_fn f)
{
  component_fn c;
  c.separable = true;
  c.sep = std::move(f);
  return c;
}

inline problem_spec advection(int d, bool dirichlet)
{
  if (d < 2 || d > 4 || (dirichlet && d > 3))
    throw std::invalid_argument("problems: advection supports d=2..4 "
                                "(dirichlet d=2,3)");
  problem_spec p;
  p.name = dirichlet ? "advection-dirichlet" : "advection";
  p.system.d = d;
  p.system.m = 1;
  p.system.boundary =
      dirichlet ? boundary_type::nonperiodic : boundary_type::periodic;
  for (int i = 0; i < d; ++i)
    p.system.terms.push_back(scalar_term(i, 1.0));
  p.T = (d == 2) ? 1.0 : (d == 3 ? 2.0 / 3.0 : 0.5);
  p.speeds.assign(d, 1.0);

  std::array<double, max_dim> freq{};
  for (int i = 0; i < d; ++i)
    freq[i] = 2.0 * M_PI;
  auto wave = [d, freq](double t) {
    return sin_of_sum(d, freq, -2.0 * M_PI * d * t);
  };
  p.exact = [wave](double t) {
    return std::vector<component_fn>{from_separable(wave(t))};
  };
  if (dirichlet)
  {
    for (int i = 0; i < d; ++i)
    {
      p.system.flow_sign[i] = 1;
      p.system.inflow[i].g = [i, d, wave](double t) {
        return std::vector<separable_fn>{substitute(wave(t), i, 0.0)};
      };
    }
  }
  return p;
}

inline problem_spec rotation(int d)
{
  if (d != 2 && d != 3)
    throw std::invalid_argument("problems: rotation supports d=2,3");
  problem_spec p;
  p.name = "rotation";
  p.system.d = d;
  p.system.m = 1;
  auto lin = [](double c) {
    return scalar_fn([c](double x) { return x - c; });
  };
  double const s2 = std::sqrt(2.0) / 2.0;
  if (d == 2)
  {
    coeff_term t = scalar_term(0, -1.0);
    t.factor[1] = lin(0.5);
    p.system.terms.push_back(t); // A1 = -(x2 - 1/2)
    t = scalar_term(1, 1.0);
    t.factor[0] = lin(0.5);
    p.system.terms.push_back(t); // A2 = x1 - 1/2
    p.speeds = {0.5, 0.5};
  }
  else
  {
    coeff_term t = scalar_term(0, -s2);
    t.factor[1] = lin(0.5);
    p.system.terms.push_back(t);
    t = scalar_term(1, s2);
    t.factor[0] = lin(0.5);
    p.system.terms.push_back(t);
    t = scalar_term(1, s2);
    t.factor[0] = {};
    t.factor[2] = lin(0.5);
    p.system.terms.push_back(t);
    t = scalar_term(2, -s2);
    t.factor[2] = {};
    t.factor[1] = lin(0.5);
    p.system.terms.push_back(t);
    p.speeds = {s2 / 2, s2, s2 / 2};
  }
  p.T = 2.0 * M_PI;

  double const b = (d == 2) ? 0.23 : 0.45;
  std::array<double, max_dim> const xc =
      (d == 2) ? std::array<double, max_dim>{0.75, 0.5}
               : std::array<double, max_dim>{0.5, 0.55, 0.5};
  double const l2 = cosine_bell_l2sq(d, b);
  p.exact = [d, b, xc, l2](double t) {
    component_fn c;
    c.l2sq = l2; // rigid rotation preserves the norm
    if (d == 2)
    {
      c.pt = [b, xc, t](std::array<double, max_dim> const &x) {
        double const ca = std::cos(-t), sa = std::sin(-t);
        double const dx = x[0] - 0.5, dy = x[1] - 0.5;
        std::array<double, max_dim> y{0.5 + ca * dx - sa * dy,
                                      0.5 + sa * dx + ca * dy};
        return cosine_bell(2, xc, b)(y);
      };
    }
    else
    {
      double const s2 = std::sqrt(2.0) / 2.0;
      Eigen::Matrix3d const r =
          rodrigues(Eigen::Vector3d(-s2, 0.0, s2), -t);
      c.pt = [b, xc, r](std::array<double, max_dim> const &x) {
        Eigen::Vector3d const y =
            r * Eigen::Vector3d(x[0] - 0.5, x[1] - 0.5, x[2] - 0.5);
        std::array<double, max_dim> z{y(0) + 0.5, y(1) + 0.5, y(2) + 0.5};
        return cosine_bell(3, xc, b)(z);
      };
    }
    return std::vector<component_fn>{c};
  };
  return p;
}

inline problem_spec deformational()
{
  problem_spec p;
  p.name = "deformational";
  p.system.d = 2;
  p.system.m = 1;
  p.T = 1.5;
  double const T = p.T;
  auto g = [T](double t) { return std::cos(M_PI * t / T); };

  coeff_term t = scalar_term(0, 1.0);
  t.factor[0] = [](double x) { return std::pow(std::sin(M_PI * x), 2); };
  t.factor[1] = [](double x) { return std::sin(2.0 * M_PI * x); };
  t.time_factor = g;
  p.system.terms.push_back(t);
  t = scalar_term(1, -1.0);
  t.factor[0] = [](double x) { return std::sin(2.0 * M_PI * x); };
  t.factor[1] = [](double x) { return std::pow(std::sin(M_PI * x), 2); };
  t.time_factor = g;
  p.system.terms.push_back(t);
  p.speeds = {1.0, 1.0};

  double const b = 0.35;
  std::array<double, max_dim> const xc{0.65, 0.5};
  double const l2 = cosine_bell_l2sq(2, b);
  p.exact_any_time = false; // the flow reverses: exact only at t = 0 and T
  p.exact = [b, xc, l2, T](double t) {
    if (std::min(std::abs(t), std::abs(t - T)) > 1.0e-12)
      throw std::invalid_argument("deformational: exact solution known only "
                                  "at t = 0 and t = T");
    component_fn c;
    c.l2sq = l2;
    c.pt = cosine_bell(2, xc, b);
    return std::vector<component_fn>{c};
  };
  return p;
}

inline problem_spec acoustic(bool traveling)
{
  problem_spec p;
  p.name = traveling ? "acoustic-traveling" : "acoustic-standing";
  p.system.d = 2;
  p.system.m = 3;
  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(3, 3);
  a1(0, 1) = a1(1, 0) = -1.0; // u_t = div(v), v_t = grad(u)
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(3, 3);
  a2(0, 2) = a2(2, 0) = -1.0;
  p.system.terms.push_back({0, a1, {}, {}});
  p.system.terms.push_back({1, a2, {}, {}});
  p.T = 1.0;
  p.speeds = {1.0, 1.0};

  double const w = 2.0 * std::sqrt(2.0) * M_PI;
  auto sin1 = [](double x) { return std::sin(2.0 * M_PI * x); };
  auto cos1 = [](double x) { return std::cos(2.0 * M_PI * x); };
  p.exact = [traveling, w, sin1, cos1](double t) {
    std::vector<component_fn> out(3);
    if (!traveling)
    {
      separable_term u{-std::sqrt(2.0) * std::sin(w * t), {}};
      u.factor[0] = sin1;
      u.factor[1] = sin1;
      separable_term v1{std::cos(w * t), {}};
      v1.factor[0] = cos1;
      v1.factor[1] = sin1;
      separable_term v2{std::cos(w * t), {}};
      v2.factor[0] = sin1;
      v2.factor[1] = cos1;
      out[0] = from_separable(separable_fn{{u}});
      out[1] = from_separable(separable_fn{{v1}});
      out[2] = from_separable(separable_fn{{v2}});
      return out;
    }
    // sin(wt + 2 pi x1) and cos(wt + 2 pi x1) profiles along x1
    separable_fn const s1 = sin_of_sum(1, {2.0 * M_PI}, w * t);
    separable_fn const c1 = sin_of_sum(1, {2.0 * M_PI}, w * t + 0.5 * M_PI);
    out[0] = from_separable(scale_dim(scale(s1, std::sqrt(2.0)), 1, cos1));
    out[1] = from_separable(scale_dim(s1, 1, cos1));
    out[2] = from_separable(scale_dim(c1, 1, sin1));
    return out;
  };
  return p;
}

inline problem_spec elastic2d()
{
  problem_spec p;
  p.name = "elastic-2d";
  p.lambda = 2.0;
  p.mu = 1.0;
  p.rho = 1.0;
  p.c_p = std::sqrt((p.lambda + 2.0 * p.mu) / p.rho);
  p.c_s = std::sqrt(p.mu / p.rho);
  p.system.d = 2;
  p.system.m = 5;
  double const la = p.lambda, mu = p.mu, ir = 1.0 / p.rho;

  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(5, 5);
  a1(0, 3) = la + 2 * mu;
  a1(1, 3) = la;
  a1(2, 4) = mu;
  a1(3, 0) = ir;
  a1(4, 2) = ir;
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(5, 5);
  a2(0, 4) = la;
  a2(1, 4) = la + 2 * mu;
  a2(2, 3) = mu;
  a2(3, 2) = ir;
  a2(4, 1) = ir;
  p.system.terms.push_back({0, -a1, {}, {}});
  p.system.terms.push_back({1, -a2, {}, {}});
  p.T = 1.0;
  p.speeds = {p.c_p, p.c_p};

  double const k = 2.0 * std::sqrt(2.0) * M_PI; // wave number, n = diagonal
  Eigen::VectorXd rs(5), rp(5);
  double const s2 = std::sqrt(2.0) / 2.0;
  rs << -mu, mu, 0.0, -s2 * p.c_s, s2 * p.c_s;
  rp << la + mu, la + mu, mu, -s2 * p.c_p, -s2 * p.c_p;
  double const cs = p.c_s, cp = p.c_p;
  p.exact = [rs, rp, k, cs, cp](double t) {
    double const alpha = k * cs * t, beta = -k * cp * t;
    std::vector<component_fn> out(5);
    for (int l = 0; l < 5; ++l)
    {
      double const a = rs(l), b = rp(l);
      out[l].pt = [a, b, alpha, beta](std::array<double, max_dim> const &x) {
        double const s = 2.0 * M_PI * (x[0] + x[1]);
        return a * std::exp(std::sin(s + alpha)) +
               b * std::exp(std::sin(s + beta));
      };
      // the profile depends on x through x1 + x2 only and is 1-periodic in
      // it, so the box integral of the square reduces to one period
      out[l].l2sq = line_integral([a, b, alpha, beta](double s) {
        double const th = 2.0 * M_PI * s;
        double const f = a * std::exp(std::sin(th + alpha)) +
                         b * std::exp(std::sin(th + beta));
        return f * f;
      });
    }
    return out;
  };
  return p;
}

inline problem_spec elastic3d()
{
  problem_spec p;
  p.name = "elastic-3d";
  p.lambda = 2.0;
  p.mu = 1.0;
  p.rho = 1.0;
  p.c_p = std::sqrt((p.lambda + 2.0 * p.mu) / p.rho);
  p.c_s = std::sqrt(p.mu / p.rho);
  p.system.d = 3;
  p.system.m = 9;
  double const la = p.lambda, mu = p.mu, ir = 1.0 / p.rho;

  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(9, 9);
  a1(0, 6) = la + 2 * mu;
  a1(1, 6) = la;
  a1(2, 6) = la;
  a1(3, 7) = mu;
  a1(5, 8) = mu;
  a1(6, 0) = ir;
  a1(7, 3) = ir;
  a1(8, 5) = ir;
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(9, 9);
  a2(0, 7) = la;
  a2(1, 7) = la + 2 * mu;
  a2(2, 7) = la;
  a2(3, 6) = mu;
  a2(4, 8) = mu;
  a2(6, 3) = ir;
  a2(7, 1) = ir;
  a2(8, 4) = ir;
  Eigen::MatrixXd a3 = Eigen::MatrixXd::Zero(9, 9);
  a3(0, 8) = la;
  a3(1, 8) = la;
  a3(2, 8) = la + 2 * mu;
  a3(4, 7) = mu;
  a3(5, 6) = mu;
  a3(6, 5) = ir;
  a3(7, 4) = ir;
  a3(8, 2) = ir;
  p.system.terms.push_back({0, -a1, {}, {}});
  p.system.terms.push_back({1, -a2, {}, {}});
  p.system.terms.push_back({2, -a3, {}, {}});
  p.T = 1.0;
  p.speeds = {p.c_p, p.c_p, p.c_p};

  double const k = -2.0 * std::sqrt(3.0) * M_PI; // n = -diag(1)/sqrt(3)
  Eigen::VectorXd rs(9), rp(9);
  double const i3 = 1.0 / std::sqrt(3.0);
  rs << -2.0 / 3 * mu, 2.0 / 3 * mu, 0, 0, mu / 3, -mu / 3, -i3 * p.c_s,
      i3 * p.c_s, 0;
  rp << la + 2.0 / 3 * mu, la + 2.0 / 3 * mu, la + 2.0 / 3 * mu, 2.0 / 3 * mu,
      2.0 / 3 * mu, 2.0 / 3 * mu, -i3 * p.c_p, -i3 * p.c_p, -i3 * p.c_p;
  double const cs = p.c_s, cp = p.c_p;
  p.exact = [rs, rp, k, cs, cp](double t) {
    // k n_i = 2 pi per direction: plane waves expand separably
    std::array<double, max_dim> const freq{2.0 * M_PI, 2.0 * M_PI,
                                           2.0 * M_PI};
    separable_fn const ws = sin_of_sum(3, freq, -k * cs * t);
    separable_fn const wp = sin_of_sum(3, freq, k * cp * t);
    std::vector<component_fn> out(9);
    for (int l = 0; l < 9; ++l)
      out[l] = from_separable(sum(scale(ws, rs(l)), scale(wp, rp(l))));
    return out;
  };
  return p;
}
} // namespace detail

// named catalogue of the test problems; d selects the dimension where a
// problem supports several
inline problem_spec make_problem(std::string const &name, int d)
{
  if (name == "advection")
    return detail::advection(d, false);
  if (name == "advection-dirichlet")
    return detail::advection(d, true);
  if (name == "rotation")
    return detail::rotation(d);
  if (name == "deformational")
    return detail::deformational();
  if (name == "acoustic-standing")
    return detail::acoustic(false);
  if (name == "acoustic-traveling")
    return detail::acoustic(true);
  if (name == "elastic-2d")
    return detail::elastic2d();
  if (name == "elastic-3d")
    return detail::elastic3d();
  throw std::invalid_argument("make_problem: unknown problem '" + name + "'");
}

// projections of the exact solution onto both sparse spaces at time t
inline solution_state exact_state(problem_spec const &p, double t,
                                  cdg_operator const &op, projector const &pu,
                                  projector const &pv)
{
  if (!p.exact)
    throw std::invalid_argument("exact_state: no exact solution");
  solution_state s = make_state(op, t);
  auto const comps = p.exact(t);
  int const ppc = op.sp_u.k() + 2;
  for (int l = 0; l < p.system.m; ++l)
  {
    if (comps[l].separable)
    {
      s.u[l] = to_slot(op.sp_u, pu.project(comps[l].sep));
      s.v[l] = to_slot(op.sp_v, pv.project(comps[l].sep));
    }
    else
    {
      s.u[l] = to_slot(op.sp_u, pu.project(comps[l].pt, ppc));
      s.v[l] = to_slot(op.sp_v, pv.project(comps[l].pt, ppc));
    }
  }
  return s;
}

// L2 error of a state against the exact solution at the state's time:
// primal-mesh error for periodic problems, the primal/dual mean square for
// non-periodic ones
inline double solution_error(problem_spec const &p, solution_state const &s,
                             cdg_operator const &op, projector const &pu,
                             projector const &pv)
{
  auto const comps = p.exact(s.t);
  int const ppc = op.sp_u.k() + 3;
  bool const both = p.system.boundary == boundary_type::nonperiodic;
  double ep = 0.0, ed = 0.0;
  for (int l = 0; l < p.system.m; ++l)
  {
    auto err = [&](projector const &pr, Eigen::VectorXd const &c_slot) {
      Eigen::VectorXd const c = to_ordinal(pr.space, c_slot);
      return comps[l].separable
                 ? pr.l2_error(c, comps[l].sep)
                 : pr.l2_error(c, comps[l].pt, comps[l].l2sq, ppc);
    };
    double const e = err(pu, s.u[l]);
    ep += e * e;
    if (both)
    {
      double const f = err(pv, s.v[l]);
      ed += f * f;
    }
  }
  if (both)
    return std::sqrt(0.5 * (ep + ed));
  return std::sqrt(ep);
}

} // namespace sgcdg
