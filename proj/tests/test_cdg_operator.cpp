#include "sgcdg/cdg_operator.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dense_reference.hpp"

using namespace sgcdg;
using namespace dense_reference;

namespace
{

void compare_to_oracle(cdg_operator const &op, solution_state const &st,
                       double tol)
{
  solution_state const der = op.rhs(st);
  auto const wu = oracle_weak_impl(op, st, true);
  auto const wv = oracle_weak_impl(op, st, false);
  for (int l = 0; l < op.sys.m; ++l)
  {
    double const su = std::max(1.0, wu[l].norm());
    REQUIRE((der.u[l] - wu[l]).norm() <= tol * su);
    double const sv = std::max(1.0, wv[l].norm());
    REQUIRE((op.mass_v(der.v[l]) - wv[l]).norm() <= tol * sv);
  }
}

} // namespace

TEST_CASE("constant states are steady under periodic constant coefficients")
{
  hyperbolic_system const sys = constant_scalar(0.7, -0.3);
  cdg_operator const op = make_cdg_operator(sys, 3, 1);
  projector const pu = make_projector(op.sp_u);
  projector const pv = make_projector(op.sp_v);
  separable_fn const one{{{2.5, {}}}};

  solution_state st = make_state(op);
  st.u[0] = to_slot(op.sp_u, pu.project(one));
  st.v[0] = to_slot(op.sp_v, pv.project(one));
  solution_state const der = op.rhs(st);
  REQUIRE(der.u[0].norm() < 1.0e-11);
  REQUIRE(der.v[0].norm() < 1.0e-11);
}

TEST_CASE("rhs matches the dense reference assembly")
{
  std::mt19937 rng(99);

  SECTION("scalar, constant coefficients, periodic")
  {
    cdg_operator const op = make_cdg_operator(constant_scalar(1.0, 0.6), 3, 1);
    compare_to_oracle(op, random_state(op, rng), 1.0e-11);
  }
  SECTION("scalar, solid-body rotation coefficients with a time factor")
  {
    hyperbolic_system const sys =
        rotation_system([](double t) { return std::cos(0.5 * t); });
    cdg_operator const op = make_cdg_operator(sys, 3, 1);
    solution_state st = random_state(op, rng);
    st.t = 0.73;
    compare_to_oracle(op, st, 1.0e-11);
  }
  SECTION("scalar, dirichlet boundary with inflow data")
  {
    hyperbolic_system sys =
        constant_scalar(1.0, 0.4, boundary_type::nonperiodic);
    for (int i = 0; i < 2; ++i)
      sys.inflow[i].g = [](double t) {
        separable_fn g = cos_of_sum(2, {2.0, 2.0}, 0.3 * t);
        g.terms.push_back({0.25, {}});
        return std::vector<separable_fn>{g};
      };
    cdg_operator const op = make_cdg_operator(sys, 3, 1);
    REQUIRE(op.sign[0] == 1);
    REQUIRE(op.sign[1] == 1);
    solution_state st = random_state(op, rng);
    st.t = 0.31;
    compare_to_oracle(op, st, 1.0e-11);
  }
  SECTION("acoustic system, three components, periodic")
  {
    cdg_operator const op = make_cdg_operator(acoustic_system(), 2, 1);
    compare_to_oracle(op, random_state(op, rng), 1.0e-11);
  }
}

TEST_CASE("rhs is linear in the state")
{
  std::mt19937 rng(7);
  cdg_operator const op = make_cdg_operator(rotation_system(), 3, 1);
  solution_state const a = random_state(op, rng);
  solution_state const b = random_state(op, rng);
  solution_state combo = make_state(op);
  combo.u[0] = 2.0 * a.u[0] - 0.5 * b.u[0];
  combo.v[0] = 2.0 * a.v[0] - 0.5 * b.v[0];

  solution_state const ra = op.rhs(a);
  solution_state const rb = op.rhs(b);
  solution_state const rc = op.rhs(combo);
  double const scale = std::max(1.0, ra.u[0].norm() + rb.u[0].norm());
  REQUIRE((rc.u[0] - 2.0 * ra.u[0] + 0.5 * rb.u[0]).norm() < 1.0e-12 * scale);
  REQUIRE((rc.v[0] - 2.0 * ra.v[0] + 0.5 * rb.v[0]).norm() < 1.0e-12 * scale);
}

TEST_CASE("energy identity and conservation, periodic constant coefficients")
{
  std::mt19937 rng(11);
  cdg_operator const op = make_cdg_operator(constant_scalar(1.0, 1.0), 3, 2);
  projector const pu = make_projector(op.sp_u);
  projector const pv = make_projector(op.sp_v);
  separable_fn const one{{{1.0, {}}}};
  Eigen::VectorXd const one_u = to_slot(op.sp_u, pu.project(one));
  Eigen::VectorXd const one_v = to_slot(op.sp_v, pv.project(one));

  for (int trial = 0; trial < 10; ++trial)
  {
    solution_state const st = random_state(op, rng);
    solution_state const der = op.rhs(st);
    double const lhs =
        st.u[0].dot(der.u[0]) + st.v[0].dot(op.mass_v(der.v[0]));
    double const rhs = -op.mismatch_norm_sq(st) / op.tau_max;
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1.0e-10).margin(1.0e-10));

    double const total =
        one_u.dot(der.u[0]) + one_v.dot(op.mass_v(der.v[0]));
    REQUIRE(std::abs(total) < 1.0e-11 * std::max(1.0, der.u[0].norm()));
  }
}

TEST_CASE("semi-discrete dissipation for divergence-free coefficients")
{
  std::mt19937 rng(13);
  cdg_operator const op = make_cdg_operator(rotation_system(), 3, 1);
  for (int trial = 0; trial < 5; ++trial)
  {
    solution_state const st = random_state(op, rng);
    solution_state const der = op.rhs(st);
    double const lhs = st.u[0].dot(der.u[0]) +
                       st.v[0].dot(op.mass_v(der.v[0])) +
                       op.mismatch_norm_sq(st) / op.tau_max;
    REQUIRE(std::abs(lhs) < 1.0e-10 * std::max(1.0, op.energy(st)));
  }
}

TEST_CASE("energy of simple states")
{
  cdg_operator const op = make_cdg_operator(constant_scalar(1.0, 1.0), 3, 1);
  REQUIRE(op.energy(make_state(op)) == 0.0);

  projector const pu = make_projector(op.sp_u);
  projector const pv = make_projector(op.sp_v);
  separable_fn const one{{{1.0, {}}}};
  solution_state st = make_state(op);
  st.u[0] = to_slot(op.sp_u, pu.project(one));
  st.v[0] = to_slot(op.sp_v, pv.project(one));
  REQUIRE(op.energy(st) == Catch::Approx(2.0).epsilon(1.0e-12));
}

TEST_CASE("dirichlet mode requires a classifiable coefficient sign")
{
  hyperbolic_system sys = rotation_system();
  sys.boundary = boundary_type::nonperiodic;
  for (int i = 0; i < 2; ++i)
    sys.inflow[i].g = [](double) {
      return std::vector<separable_fn>{separable_fn{{{0.0, {}}}}};
    };
  REQUIRE_THROWS_AS(make_cdg_operator(sys, 2, 1), std::invalid_argument);
}
