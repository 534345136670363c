#pragma once

#include "cdg_operator.hpp"

namespace sgcdg
{
using rhs_fn = std::function<solution_state(solution_state const &)>;

namespace detail
{
inline solution_state state_comb(double ca, solution_state const &a, double cb,
                                 solution_state const &b, double t)
{
  solution_state out;
  out.t = t;
  out.u.resize(a.u.size());
  out.v.resize(a.v.size());
  for (std::size_t l = 0; l < a.u.size(); ++l)
  {
    out.u[l] = ca * a.u[l] + cb * b.u[l];
    out.v[l] = ca * a.v[l] + cb * b.v[l];
  }
  return out;
}

inline void check_stage(solution_state const &s, int stage)
{
  for (auto const &c : s.u)
    if (!c.allFinite())
      throw std::runtime_error("tvd_rk_step: non-finite state after stage " +
                               std::to_string(stage));
  for (auto const &c : s.v)
    if (!c.allFinite())
      throw std::runtime_error("tvd_rk_step: non-finite state after stage " +
                               std::to_string(stage));
}
} // namespace detail

// One step of a TVD Runge-Kutta method of order 2 or 3 (convex-combination
// forms) or the classical fourth-order method (used for CFL studies only).
inline solution_state tvd_rk_step(solution_state const &s, double dt,
                                  rhs_fn const &rhs, int order)
{
  using detail::state_comb;
  double const t = s.t;
  if (order == 2)
  {
    solution_state const s1 = state_comb(1.0, s, dt, rhs(s), t + dt);
    detail::check_stage(s1, 1);
    solution_state out =
        state_comb(0.5, s, 0.5, state_comb(1.0, s1, dt, rhs(s1), 0.0), t + dt);
    detail::check_stage(out, 2);
    return out;
  }
  if (order == 3)
  {
    solution_state const s1 = state_comb(1.0, s, dt, rhs(s), t + dt);
    detail::check_stage(s1, 1);
    solution_state const s2 = state_comb(
        0.75, s, 0.25, state_comb(1.0, s1, dt, rhs(s1), 0.0), t + 0.5 * dt);
    detail::check_stage(s2, 2);
    solution_state out = state_comb(
        1.0 / 3.0, s, 2.0 / 3.0, state_comb(1.0, s2, dt, rhs(s2), 0.0), t + dt);
    detail::check_stage(out, 3);
    return out;
  }
  if (order == 4)
  {
    solution_state const k1 = rhs(s);
    solution_state const s2 = state_comb(1.0, s, 0.5 * dt, k1, t + 0.5 * dt);
    detail::check_stage(s2, 1);
    solution_state const k2 = rhs(s2);
    solution_state const s3 = state_comb(1.0, s, 0.5 * dt, k2, t + 0.5 * dt);
    detail::check_stage(s3, 2);
    solution_state const k3 = rhs(s3);
    solution_state const s4 = state_comb(1.0, s, dt, k3, t + dt);
    detail::check_stage(s4, 3);
    solution_state const k4 = rhs(s4);
    solution_state out = state_comb(
        1.0, s, dt / 6.0,
        state_comb(1.0, state_comb(1.0, k1, 2.0, k2, 0.0), 1.0,
                   state_comb(2.0, k3, 1.0, k4, 0.0), 0.0),
        t + dt);
    detail::check_stage(out, 4);
    return out;
  }
  throw std::invalid_argument("tvd_rk_step: order must be 2, 3 or 4");
}

// dt = c / sum_i (c_i / h_N) with safety factor c
inline double select_dt(std::vector<double> const &speeds, double h_N,
                        double c)
{
  double s = 0.0;
  for (double ci : speeds)
  {
    if (ci < 0.0)
      throw std::invalid_argument("select_dt: negative speed");
    s += ci / h_N;
  }
  if (s == 0.0)
    throw std::invalid_argument("select_dt: all speeds zero");
  return c / s;
}

// march from the state's time to T, clipping the last step to land on T
inline solution_state integrate_to(solution_state s, double T, double dt,
                                   rhs_fn const &rhs, int order)
{
  while (s.t < T - 1.0e-14 * std::max(1.0, T))
  {
    double const step = std::min(dt, T - s.t);
    double const t_next = s.t + step;
    s = tvd_rk_step(s, step, rhs, order);
    s.t = t_next; // guard accumulation drift
  }
  s.t = T;
  return s;
}

} // namespace sgcdg
