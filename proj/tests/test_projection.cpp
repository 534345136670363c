#include "sgcdg/projection.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace sgcdg;

namespace
{
double eval_sep(int d, separable_fn const &f, std::array<double, max_dim> x)
{
  double acc = 0.0;
  for (auto const &t : f.terms)
  {
    double v = t.coeff;
    for (int i = 0; i < d; ++i)
      if (t.factor[i])
        v *= t.factor[i](x[i]);
    acc += v;
  }
  return acc;
}

// naive expansion evaluation straight from the basis definition
double eval_naive(sparse_space const &sp, Eigen::VectorXd const &c,
                  std::array<double, max_dim> x)
{
  double acc = 0.0;
  for (int o = 0; o < sp.dofs(); ++o)
  {
    multi_index mi = index_at(sp, o);
    double v = c(o);
    for (int i = 0; i < sp.d && v != 0.0; ++i)
      v *= eval_hier_basis(sp.sp1, {mi.l[i], mi.j[i], mi.p[i]}, x[i],
                           side::right);
    acc += v;
  }
  return acc;
}
} // namespace

TEST_CASE("angle addition expansion reproduces sin of a sum")
{
  std::mt19937 gen(2026);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int d = 2; d <= 4; ++d)
  {
    std::array<double, max_dim> freq{};
    for (int i = 0; i < d; ++i)
      freq[i] = 2.0 * M_PI * (1.0 + 0.5 * i);
    for (double phase : {0.0, 0.4, -1.3})
    {
      separable_fn f = sin_of_sum(d, freq, phase);
      REQUIRE(static_cast<int>(f.terms.size()) <= (1 << d));
      for (int trial = 0; trial < 20; ++trial)
      {
        std::array<double, max_dim> x{};
        double arg = phase;
        for (int i = 0; i < d; ++i)
        {
          x[i] = uni(gen);
          arg += freq[i] * x[i];
        }
        REQUIRE_THAT(eval_sep(d, f, x),
                     Catch::Matchers::WithinAbs(std::sin(arg), 1.0e-13));
      }
    }
  }
}

TEST_CASE("Taylor expansion reproduces exp of a product")
{
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int d : {2, 3, 4})
  {
    separable_fn f = exp_of_product(d);
    for (int trial = 0; trial < 20; ++trial)
    {
      std::array<double, max_dim> x{};
      double prod = 1.0;
      for (int i = 0; i < d; ++i)
      {
        x[i] = uni(gen);
        prod *= x[i];
      }
      REQUIRE_THAT(eval_sep(d, f, x),
                   Catch::Matchers::WithinAbs(std::exp(prod), 1.0e-14));
    }
  }
}

TEST_CASE("polynomials inside the space project with zero error")
{
  space1d const s1{mesh_role::primal, boundary_type::nonperiodic, 3, 2};
  sparse_space sp = enumerate(2, s1);
  projector pr = make_projector(sp);

  separable_fn f;
  separable_term t;
  t.coeff = 2.5;
  t.factor[0] = [](double x) { return x * x - 0.3 * x; };
  t.factor[1] = [](double y) { return 1.0 + y; };
  f.terms.push_back(t);

  Eigen::VectorXd c = pr.project(f);
  REQUIRE(pr.l2_error(c, f) < 1.0e-12);

  std::mt19937 gen(5);
  std::uniform_real_distribution<double> uni(0.01, 0.99);
  for (int trial = 0; trial < 10; ++trial)
  {
    std::array<double, max_dim> x{uni(gen), uni(gen)};
    REQUIRE_THAT(pr.evaluate(c, x),
                 Catch::Matchers::WithinAbs(eval_sep(2, f, x), 1.0e-11));
  }
}

TEST_CASE("fast evaluation matches the naive expansion sum")
{
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto role : {mesh_role::primal, mesh_role::dual})
    for (auto bc : {boundary_type::periodic, boundary_type::nonperiodic})
    {
      space1d const s1{role, bc, 3, 1};
      sparse_space sp = enumerate(2, s1);
      projector pr = make_projector(sp);
      Eigen::VectorXd c(sp.dofs());
      std::normal_distribution<double> dist;
      for (int i = 0; i < c.size(); ++i)
        c(i) = dist(gen);
      for (int trial = 0; trial < 15; ++trial)
      {
        std::array<double, max_dim> x{uni(gen), uni(gen)};
        REQUIRE_THAT(pr.evaluate(c, x),
                     Catch::Matchers::WithinAbs(eval_naive(sp, c, x), 1.0e-10));
      }
    }
}

TEST_CASE("black-box projection agrees with the separable path")
{
  space1d const s1{mesh_role::primal, boundary_type::periodic, 3, 1};
  sparse_space sp = enumerate(2, s1);
  projector pr = make_projector(sp);

  separable_fn f;
  separable_term t;
  t.factor[0] = [](double x) { return x * (1.0 - x); };
  t.factor[1] = [](double y) { return 0.5 + y * y; };
  f.terms.push_back(t);
  point_fn g = [](std::array<double, max_dim> const &x) {
    return x[0] * (1.0 - x[0]) * (0.5 + x[1] * x[1]);
  };

  Eigen::VectorXd cs = pr.project(f);
  Eigen::VectorXd cb = pr.project(g, s1.k + 3);
  REQUIRE((cs - cb).cwiseAbs().maxCoeff() < 1.0e-12);
}

TEST_CASE("projection onto the non-periodic dual space satisfies Galerkin orthogonality")
{
  space1d const s1{mesh_role::dual, boundary_type::nonperiodic, 3, 1};
  sparse_space sp = enumerate(2, s1);
  projector pr = make_projector(sp);

  std::array<double, max_dim> freq{2.0 * M_PI, 2.0 * M_PI};
  separable_fn f = sin_of_sum(2, freq, 0.3);
  Eigen::VectorXd c = pr.project(f);
  Eigen::VectorXd resid = pr.apply_mass(c) - pr.inner(f);
  REQUIRE(resid.cwiseAbs().maxCoeff() < 1.0e-10);
  REQUIRE(pr.l2_error(c, f) < 0.1);
}

TEST_CASE("Pythagoras: projection norm and error split the function norm")
{
  space1d const s1{mesh_role::primal, boundary_type::periodic, 4, 1};
  sparse_space sp = enumerate(2, s1);
  projector pr = make_projector(sp);
  std::array<double, max_dim> freq{2.0 * M_PI, 4.0 * M_PI};
  separable_fn f = sin_of_sum(2, freq, 0.0);
  Eigen::VectorXd c = pr.project(f);
  double const e = pr.l2_error(c, f);
  double const fn2 = l2sq_of(2, f);
  REQUIRE_THAT(pr.norm_sq(c) + e * e, Catch::Matchers::WithinAbs(fn2, 1.0e-8));
  REQUIRE_THAT(fn2, Catch::Matchers::WithinAbs(0.5, 1.0e-12));
}

TEST_CASE("projection error decreases with refinement at the expected rate")
{
  std::array<double, max_dim> freq{2.0 * M_PI, 2.0 * M_PI};
  separable_fn f = sin_of_sum(2, freq, 0.0);
  for (int k : {1, 2})
  {
    std::vector<double> err;
    for (int N : {4, 5, 6})
    {
      space1d const s1{mesh_role::primal, boundary_type::periodic, N, k};
      projector pr = make_projector(enumerate(2, s1));
      err.push_back(pr.l2_error(pr.project(f), f));
    }
    for (std::size_t i = 1; i < err.size(); ++i)
    {
      double const order = std::log2(err[i - 1] / err[i]);
      // sparse-grid rates carry |log h|^{d-1} factors; they approach k+1
      // from below
      REQUIRE(order > k + 0.45);
    }
  }
}
