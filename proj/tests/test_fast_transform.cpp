#include "sgcdg/fast_transform.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dense_reference.hpp"

using namespace sgcdg;
using dense_reference::naive_apply;

namespace
{

void check_split(Eigen::MatrixXd const &t, space1d const &trial,
                 space1d const &test)
{
  lu_split_1d f = lu_split(t, trial, test);
  REQUIRE(f.ok);
  REQUIRE((f.pl * f.uq - t).cwiseAbs().maxCoeff() <
          1.0e-11 * std::max(1.0, t.cwiseAbs().maxCoeff()));
  for (int s = 0; s < f.pl.rows(); ++s)
    for (int m = 0; m < f.pl.cols(); ++m)
      if (std::abs(f.pl(s, m)) > 1.0e-11)
        REQUIRE(level_of_flat(trial, m) <= level_of_flat(trial, s));
  for (int m = 0; m < f.uq.rows(); ++m)
    for (int j = 0; j < f.uq.cols(); ++j)
      if (std::abs(f.uq(m, j)) > 1.0e-11)
        REQUIRE(level_of_flat(trial, m) <= level_of_flat(test, j));
}

scalar_fn smooth_weight()
{
  return [](double x) { return 1.5 + std::sin(2.0 * M_PI * x) * 0.7; };
}
} // namespace

TEST_CASE("triangular splits reconstruct the matrix with block structure")
{
  int const N = 3;
  for (int k = 0; k <= 2; ++k)
  {
    space1d const prim{mesh_role::primal, boundary_type::periodic, N, k};
    space1d const dual{mesh_role::dual, boundary_type::periodic, N, k};
    space1d const prim_n{mesh_role::primal, boundary_type::nonperiodic, N, k};
    space1d const dual_n{mesh_role::dual, boundary_type::nonperiodic, N, k};

    // rows are trial entries: transpose the assembled (test x trial) forms
    check_split(coupling_matrix(coupling_kind::mass, prim, dual)
                    .entries.transpose(),
                dual, prim);
    check_split(coupling_matrix(coupling_kind::weighted_mass, prim, dual,
                                smooth_weight())
                    .entries.transpose(),
                dual, prim);
    check_split(coupling_matrix(coupling_kind::stiffness, prim, dual)
                    .entries.transpose(),
                dual, prim);
    check_split(coupling_matrix(coupling_kind::flux, prim, dual)
                    .entries.transpose(),
                dual, prim);
    check_split(coupling_matrix(coupling_kind::mass, prim_n, dual_n)
                    .entries.transpose(),
                dual_n, prim_n);
    check_split(coupling_matrix(coupling_kind::mass, dual_n, dual_n)
                    .entries.transpose(),
                dual_n, dual_n);

    // couplings into the non-periodic dual test space have no triangular
    // split: its right edge cell is fine scale but filed at level zero
    lu_split_1d f = lu_split(coupling_matrix(coupling_kind::mass, dual_n,
                                             prim_n)
                                 .entries.transpose(),
                             prim_n, dual_n);
    REQUIRE_FALSE(f.ok);
  }
}

TEST_CASE("fast transform agrees with the direct double loop")
{
  std::mt19937 gen(40193);
  std::normal_distribution<double> dist;

  SECTION("2D, periodic primal to dual, weighted couplings")
  {
    space1d const prim{mesh_role::primal, boundary_type::periodic, 3, 1};
    space1d const dual{mesh_role::dual, boundary_type::periodic, 3, 1};
    sparse_space trial = enumerate(2, dual);
    sparse_space test = enumerate(2, prim);

    std::array<Eigen::MatrixXd, max_dim> t{};
    t[0] = coupling_matrix(coupling_kind::weighted_mass, prim, dual,
                           smooth_weight())
               .entries.transpose();
    t[1] = coupling_matrix(coupling_kind::stiffness, prim, dual)
               .entries.transpose();

    std::array<space1d, max_dim> test_dims{};
    test_dims.fill(prim);
    tensor_op op = make_tensor_op(trial.layout, t, test_dims);
    REQUIRE(op.all_split);

    Eigen::VectorXd in(trial.dofs());
    for (int i = 0; i < in.size(); ++i)
      in(i) = dist(gen);
    Eigen::VectorXd fast =
        to_ordinal(test, op.apply(to_slot(trial, in)));
    Eigen::VectorXd ref = naive_apply(trial, test, t, in);
    REQUIRE((fast - ref).cwiseAbs().maxCoeff() <
            1.0e-11 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }

  SECTION("3D, non-periodic dual to primal with an identity dimension")
  {
    space1d const prim{mesh_role::primal, boundary_type::nonperiodic, 2, 1};
    space1d const dual{mesh_role::dual, boundary_type::nonperiodic, 2, 1};
    sparse_space trial = enumerate(3, dual);
    sparse_space test = enumerate(3, prim);

    std::array<Eigen::MatrixXd, max_dim> t{};
    t[0] = coupling_matrix(coupling_kind::mass, prim, dual)
               .entries.transpose();
    t[1] = coupling_matrix(coupling_kind::flux, prim, dual)
               .entries.transpose();
    t[2] = coupling_matrix(coupling_kind::weighted_mass, prim, dual,
                           smooth_weight())
               .entries.transpose();

    std::array<space1d, max_dim> test_dims{};
    test_dims.fill(prim);
    tensor_op op = make_tensor_op(trial.layout, t, test_dims);
    REQUIRE(op.all_split);

    Eigen::VectorXd in(trial.dofs());
    for (int i = 0; i < in.size(); ++i)
      in(i) = dist(gen);
    Eigen::VectorXd fast =
        to_ordinal(test, op.apply(to_slot(trial, in)));
    Eigen::VectorXd ref = naive_apply(trial, test, t, in);
    REQUIRE((fast - ref).cwiseAbs().maxCoeff() <
            1.0e-11 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }

  SECTION("2D full-grid layout")
  {
    space1d const prim{mesh_role::primal, boundary_type::periodic, 2, 1};
    space1d const dual{mesh_role::dual, boundary_type::periodic, 2, 1};
    sparse_space trial = enumerate(2, prim, truncation::full);
    sparse_space test = enumerate(2, dual, truncation::full);

    std::array<Eigen::MatrixXd, max_dim> t{};
    t[0] = coupling_matrix(coupling_kind::mass, dual, prim)
               .entries.transpose();
    t[1] = coupling_matrix(coupling_kind::stiffness, dual, prim)
               .entries.transpose();

    std::array<space1d, max_dim> test_dims{};
    test_dims.fill(dual);
    tensor_op op = make_tensor_op(trial.layout, t, test_dims);
    REQUIRE(op.all_split);

    Eigen::VectorXd in(trial.dofs());
    for (int i = 0; i < in.size(); ++i)
      in(i) = dist(gen);
    Eigen::VectorXd fast =
        to_ordinal(test, op.apply(to_slot(trial, in)));
    Eigen::VectorXd ref = naive_apply(trial, test, t, in);
    REQUIRE((fast - ref).cwiseAbs().maxCoeff() <
            1.0e-11 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }

  SECTION("identity dimensions pass data through")
  {
    space1d const prim{mesh_role::primal, boundary_type::periodic, 3, 2};
    sparse_space sp = enumerate(2, prim);
    std::array<Eigen::MatrixXd, max_dim> t{}; // all identity
    std::array<space1d, max_dim> test_dims{};
    test_dims.fill(prim);
    tensor_op op = make_tensor_op(sp.layout, t, test_dims);
    Eigen::VectorXd in(sp.dofs());
    for (int i = 0; i < in.size(); ++i)
      in(i) = dist(gen);
    REQUIRE((op.apply(in) - in).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("couplings into the non-periodic dual test space match the direct loop")
{
  // the direction without a triangular split: all dimensions fall back to
  // the lower-plus-upper decomposition with subset passes
  space1d const prim_n{mesh_role::primal, boundary_type::nonperiodic, 3, 1};
  space1d const dual_n{mesh_role::dual, boundary_type::nonperiodic, 3, 1};
  for (int d : {2, 3})
  {
    sparse_space trial = enumerate(d, prim_n);
    sparse_space test = enumerate(d, dual_n);
    std::array<Eigen::MatrixXd, max_dim> t{};
    t[0] = coupling_matrix(coupling_kind::mass, dual_n, prim_n)
               .entries.transpose();
    t[1] = coupling_matrix(coupling_kind::stiffness, dual_n, prim_n)
               .entries.transpose();
    if (d == 3)
      t[2] = coupling_matrix(coupling_kind::flux, dual_n, prim_n)
                 .entries.transpose();
    std::array<space1d, max_dim> test_dims{};
    test_dims.fill(dual_n);
    tensor_op op = make_tensor_op(trial.layout, t, test_dims);
    REQUIRE_FALSE(op.all_split);

    std::mt19937 gen(555 + d);
    std::normal_distribution<double> dist;
    Eigen::VectorXd in(trial.dofs());
    for (int i = 0; i < in.size(); ++i)
      in(i) = dist(gen);
    Eigen::VectorXd fast = to_ordinal(test, op.apply(to_slot(trial, in)));
    Eigen::VectorXd ref = naive_apply(trial, test, t, in);
    REQUIRE((fast - ref).cwiseAbs().maxCoeff() <
            1.0e-11 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("failed splits fall back to the subset decomposition")
{
  // a matrix whose split must fail: couples deep test levels only to deep
  // trial rows in a way that in-level pivoting cannot reach
  space1d const prim{mesh_role::primal, boundary_type::periodic, 2, 0};
  int const n = space_dim(prim);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  t(n - 1, 0) = 1.0; // deep trial row active in a level-0 test column
  lu_split_1d f = lu_split(t, prim, prim);
  REQUIRE_FALSE(f.ok);

  sparse_space sp = enumerate(2, prim);
  std::array<Eigen::MatrixXd, max_dim> ts{};
  ts[0] = t;
  ts[1] = Eigen::MatrixXd::Identity(n, n) * 2.0;
  std::array<space1d, max_dim> test_dims{};
  test_dims.fill(prim);
  tensor_op op = make_tensor_op(sp.layout, ts, test_dims);
  REQUIRE_FALSE(op.all_split);

  std::mt19937 gen(11);
  std::normal_distribution<double> dist;
  Eigen::VectorXd in(sp.dofs());
  for (int i = 0; i < in.size(); ++i)
    in(i) = dist(gen);
  Eigen::VectorXd slow = to_ordinal(sp, op.apply(to_slot(sp, in)));
  Eigen::VectorXd ref = naive_apply(sp, sp, ts, in);
  REQUIRE((slow - ref).cwiseAbs().maxCoeff() < 1.0e-12);
}

TEST_CASE("mass solver inverts the non-periodic dual Gram matrix")
{
  space1d const dual{mesh_role::dual, boundary_type::nonperiodic, 3, 1};
  sparse_space sp = enumerate(2, dual);
  Eigen::MatrixXd g =
      coupling_matrix(coupling_kind::mass, dual, dual).entries;
  mass_solver ms = make_mass_solver(sp.layout, g);
  REQUIRE_FALSE(ms.trivial);

  std::mt19937 gen(321);
  std::normal_distribution<double> dist;
  Eigen::VectorXd x(sp.dofs());
  for (int i = 0; i < x.size(); ++i)
    x(i) = dist(gen);
  Eigen::VectorXd b = ms.op.apply(x);
  Eigen::VectorXd y = ms.solve(b);
  REQUIRE((x - y).cwiseAbs().maxCoeff() < 1.0e-8);

  // orthonormal hierarchies make the solve a no-op
  space1d const prim{mesh_role::primal, boundary_type::periodic, 3, 1};
  sparse_space pp = enumerate(2, prim);
  Eigen::MatrixXd gi =
      coupling_matrix(coupling_kind::mass, prim, prim).entries;
  mass_solver trivial = make_mass_solver(pp.layout, gi);
  REQUIRE(trivial.trivial);
}
