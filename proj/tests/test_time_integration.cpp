#include "sgcdg/time_integration.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace sgcdg;

namespace
{
// scalar ODE wrapped in the state container
solution_state scalar_state(double x, double t = 0.0)
{
  solution_state s;
  s.t = t;
  s.u.push_back(Eigen::VectorXd::Constant(1, x));
  s.v.push_back(Eigen::VectorXd::Zero(1));
  return s;
}

hyperbolic_system advection(int d, std::vector<double> const &speeds)
{
  hyperbolic_system s;
  s.d = d;
  s.m = 1;
  for (int i = 0; i < d; ++i)
  {
    coeff_term t;
    t.direction = i;
    t.coupling = Eigen::MatrixXd::Constant(1, 1, speeds[i]);
    s.terms.push_back(t);
  }
  return s;
}

double state_dist(solution_state const &a, solution_state const &b)
{
  double acc = 0.0;
  for (std::size_t l = 0; l < a.u.size(); ++l)
    acc += (a.u[l] - b.u[l]).squaredNorm() + (a.v[l] - b.v[l]).squaredNorm();
  return std::sqrt(acc);
}
} // namespace

TEST_CASE("zero right-hand side leaves the state unchanged")
{
  solution_state const s0 = scalar_state(1.375, 0.5);
  auto zero = [](solution_state const &s) {
    solution_state z = s;
    z.u[0].setZero();
    z.v[0].setZero();
    return z;
  };
  for (int order : {2, 3, 4})
  {
    solution_state const s1 = tvd_rk_step(s0, 0.25, zero, order);
    REQUIRE(s1.u[0](0) == s0.u[0](0));
    REQUIRE(s1.t == Catch::Approx(0.75));
  }
}

TEST_CASE("amplification factors of the linear scalar ODE")
{
  double const lambda = -0.8, dt = 0.5;
  double const z = lambda * dt;
  auto rhs = [lambda](solution_state const &s) {
    solution_state r = s;
    r.u[0] *= lambda;
    r.v[0] *= lambda;
    return r;
  };
  auto amp = [&](int order) {
    return tvd_rk_step(scalar_state(1.0), dt, rhs, order).u[0](0);
  };
  REQUIRE(amp(2) == Catch::Approx(1.0 + z + z * z / 2).epsilon(1.0e-15));
  REQUIRE(amp(3) ==
          Catch::Approx(1.0 + z + z * z / 2 + z * z * z / 6).epsilon(1.0e-15));
  REQUIRE(amp(4) == Catch::Approx(1.0 + z + z * z / 2 + z * z * z / 6 +
                                  z * z * z * z / 24)
                        .epsilon(1.0e-15));
}

TEST_CASE("step is linear in the state for linear problems")
{
  std::mt19937 rng(5);
  cdg_operator const op = make_cdg_operator(advection(2, {1.0, 0.7}), 3, 1);
  auto rhs = [&op](solution_state const &s) { return op.rhs(s); };
  std::normal_distribution<double> dist;

  solution_state a = make_state(op), b = make_state(op);
  for (int i = 0; i < a.u[0].size(); ++i)
  {
    a.u[0](i) = dist(rng);
    b.u[0](i) = dist(rng);
  }
  for (int i = 0; i < a.v[0].size(); ++i)
  {
    a.v[0](i) = dist(rng);
    b.v[0](i) = dist(rng);
  }
  solution_state combo = detail::state_comb(1.5, a, -0.25, b, 0.0);

  double const dt = 0.3 * op.tau_max;
  solution_state const ra = tvd_rk_step(a, dt, rhs, 3);
  solution_state const rb = tvd_rk_step(b, dt, rhs, 3);
  solution_state const rc = tvd_rk_step(combo, dt, rhs, 3);
  solution_state const expect = detail::state_comb(1.5, ra, -0.25, rb, 0.0);
  REQUIRE(state_dist(rc, expect) < 1.0e-12 * (1.0 + state_dist(ra, rb)));
}

TEST_CASE("temporal self-convergence of the third-order method")
{
  cdg_operator const op = make_cdg_operator(advection(2, {1.0, 1.0}), 5, 3);
  auto rhs = [&op](solution_state const &s) { return op.rhs(s); };
  projector const pu = make_projector(op.sp_u);
  projector const pv = make_projector(op.sp_v);
  separable_fn const f = sin_of_sum(2, {2.0 * M_PI, 2.0 * M_PI}, 0.0);
  solution_state s0 = make_state(op);
  s0.u[0] = to_slot(op.sp_u, pu.project(f));
  s0.v[0] = to_slot(op.sp_v, pv.project(f));

  double const T = 0.032;
  std::array<solution_state, 3> sol;
  double dt = 0.002; // below the CFL limit of this mesh

  for (int i = 0; i < 3; ++i, dt *= 0.5)
    sol[i] = integrate_to(s0, T, dt, rhs, 3);
  double const e0 = state_dist(sol[0], sol[1]);
  double const e1 = state_dist(sol[1], sol[2]);
  double const order = std::log2(e0 / e1);
  REQUIRE(order >= 2.8);
}

TEST_CASE("discrete energy is non-increasing at a safe time step")
{
  cdg_operator const op = make_cdg_operator(advection(2, {1.0, 1.0}), 3, 1);
  auto rhs = [&op](solution_state const &s) { return op.rhs(s); };
  projector const pu = make_projector(op.sp_u);
  projector const pv = make_projector(op.sp_v);
  separable_fn const f = sin_of_sum(2, {2.0 * M_PI, 4.0 * M_PI}, 0.4);
  solution_state s = make_state(op);
  s.u[0] = to_slot(op.sp_u, pu.project(f));
  s.v[0] = to_slot(op.sp_v, pv.project(f));

  double const dt = select_dt({1.0, 1.0}, level_h(3), 0.1);
  double e_prev = op.energy(s);
  for (int step = 0; step < 1000; ++step)
  {
    s = tvd_rk_step(s, dt, rhs, 3);
    double const e = op.energy(s);
    REQUIRE(e <= e_prev + 1.0e-9);
    e_prev = e;
  }
}

TEST_CASE("time step selection")
{
  REQUIRE(select_dt({1.0, 1.0}, 1.0 / 64, 0.1) ==
          Catch::Approx(7.8125e-4).epsilon(1.0e-14));
  REQUIRE(select_dt({1.0}, 1.0 / 32, 1.0) == Catch::Approx(1.0 / 32));
  REQUIRE(select_dt({2.0, 4.0, 1.0}, 0.125, 0.3) ==
          Catch::Approx(0.5 * select_dt({1.0, 2.0, 0.5}, 0.125, 0.3)));
  REQUIRE_THROWS_AS(select_dt({0.0, 0.0}, 0.5, 0.1), std::invalid_argument);
}

TEST_CASE("non-finite stages abort with the stage index")
{
  auto bad = [](solution_state const &s) {
    solution_state r = s;
    r.u[0].setConstant(std::numeric_limits<double>::quiet_NaN());
    return r;
  };
  REQUIRE_THROWS_WITH(tvd_rk_step(scalar_state(1.0), 0.1, bad, 3),
                      Catch::Matchers::ContainsSubstring("stage 1"));
}

TEST_CASE("integration clips the final step onto the target time")
{
  double const lambda = -1.0;
  auto rhs = [lambda](solution_state const &s) {
    solution_state r = s;
    r.u[0] *= lambda;
    r.v[0] *= lambda;
    return r;
  };
  solution_state const s = integrate_to(scalar_state(1.0), 1.0, 0.3, rhs, 4);
  REQUIRE(s.t == 1.0);
  REQUIRE(s.u[0](0) == Catch::Approx(std::exp(-1.0)).epsilon(1.0e-4));
}
