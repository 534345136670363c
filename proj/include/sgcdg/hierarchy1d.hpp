#pragma once

#include "basis1d.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace sgcdg
{
using scalar_fn = std::function<double(double)>;

// partition of [0,1] used by the non-periodic dual hierarchy at level l:
// a left cell [0, h_l - h_N/2], 2^l - 1 interior cells of width h_l, and a
// right cell [1 - h_N/2, 1]
inline std::vector<std::pair<double, double>> dual_cells(int N, int l)
{
  if (l < 0 || l > N)
    throw std::out_of_range("dual_cells: level outside [0,N]");
  double const hl = level_h(l);
  double const hs = 0.5 * level_h(N);
  std::vector<std::pair<double, double>> cells;
  cells.reserve((1 << l) + 1);
  cells.emplace_back(0.0, hl - hs);
  for (int j = 1; j < (1 << l); ++j)
    cells.emplace_back(j * hl - hs, (j + 1) * hl - hs);
  cells.emplace_back(1.0 - hs, 1.0);
  return cells;
}

// composite Gauss grid over the half-cells of width h_N/2 (the common
// refinement of the primal and dual finest meshes)
struct quad_grid
{
  int cells = 0;
  int per_cell = 0;
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

inline quad_grid make_half_grid(int N, int pts_per_cell)
{
  quad_grid g;
  g.cells = 1 << (N + 1);
  g.per_cell = pts_per_cell;
  quadrature const ref = gauss_rule(pts_per_cell, 0.0, 1.0);
  double const h = 1.0 / g.cells;
  g.points.reserve(g.cells * pts_per_cell);
  g.weights.reserve(g.cells * pts_per_cell);
  for (int c = 0; c < g.cells; ++c)
    for (int p = 0; p < pts_per_cell; ++p)
    {
      g.points.push_back((c + ref.nodes[p]) * h);
      g.weights.push_back(ref.weights[p] * h);
    }
  return g;
}

// values and derivatives of every hierarchical basis function of a 1D space
// on a shared quadrature grid
struct basis_table
{
  space1d space;
  quad_grid grid;
  std::vector<piecewise_poly> polys;
  Eigen::MatrixXd values; // n x nq
  Eigen::MatrixXd derivs; // n x nq
};

inline basis_table make_basis_table(space1d const &s, int pts_per_cell)
{
  basis_table t;
  t.space = s;
  t.grid = make_half_grid(s.N, pts_per_cell);
  int const n = space_dim(s);
  int const nq = t.grid.size();
  t.polys.reserve(n);
  t.values.resize(n, nq);
  t.derivs.resize(n, nq);
  for (int b = 0; b < n; ++b)
  {
    t.polys.push_back(hier_basis_poly(s, unflatten_index(s, b)));
    piecewise_poly const &pp = t.polys.back();
    for (int q = 0; q < nq; ++q)
    {
      t.values(b, q) = pp.value(t.grid.points[q]);
      t.derivs(b, q) = pp.derivative(t.grid.points[q]);
    }
  }
  return t;
}

enum class coupling_kind
{
  mass,
  stiffness,
  flux,
  weighted_mass,
  weighted_stiffness,
  weighted_flux
};

inline bool is_weighted(coupling_kind k)
{
  return k == coupling_kind::weighted_mass ||
         k == coupling_kind::weighted_stiffness ||
         k == coupling_kind::weighted_flux;
}

// 1D coupling matrix between two hierarchical spaces; rows are test
// indices, columns trial indices
struct coupling1d
{
  coupling_kind kind;
  space1d test;
  space1d trial;
  Eigen::MatrixXd entries;
};

// interior interface positions of a space's finest mesh (domain-boundary
// interfaces included only with periodic wraparound)
inline std::vector<double> interface_points(space1d const &s)
{
  double const h = level_h(s.N);
  std::vector<double> pts;
  if (s.role == mesh_role::primal)
  {
    int const j0 = (s.boundary == boundary_type::periodic) ? 0 : 1;
    for (int j = j0; j < (1 << s.N); ++j)
      pts.push_back(j * h);
  }
  else
  {
    for (int j = 0; j < (1 << s.N); ++j)
      pts.push_back((j + 0.5) * h);
  }
  return pts;
}

namespace detail
{
inline double weight_or_one(std::optional<scalar_fn> const &w, double x)
{
  return w ? (*w)(x) : 1.0;
}
} // namespace detail

// Assemble a coupling matrix from prebuilt tables sharing a quadrature grid.
inline coupling1d assemble_coupling(coupling_kind kind, basis_table const &test,
                                    basis_table const &trial,
                                    std::optional<scalar_fn> weight = {})
{
  if (test.space.N != trial.space.N || test.space.k != trial.space.k)
    throw std::invalid_argument("assemble_coupling: mismatched N or k");
  if (is_weighted(kind) != weight.has_value())
    throw std::invalid_argument(is_weighted(kind)
                                    ? "assemble_coupling: weighted kind needs a weight"
                                    : "assemble_coupling: weight supplied for unweighted kind");

  coupling1d c{kind, test.space, trial.space, {}};
  int const nt = space_dim(test.space);
  int const ns = space_dim(trial.space);

  if (kind == coupling_kind::flux || kind == coupling_kind::weighted_flux)
  {
    c.entries = Eigen::MatrixXd::Zero(nt, ns);
    bool const wrap = test.space.boundary == boundary_type::periodic &&
                      test.space.role == mesh_role::primal;
    for (double xe : interface_points(test.space))
    {
      bool const at_wrap = wrap && xe == 0.0;
      double const w = detail::weight_or_one(weight, xe);
      Eigen::VectorXd jump(nt), trace(ns);
      for (int b = 0; b < nt; ++b)
      {
        double const minus =
            at_wrap ? test.polys[b].value(1.0, side::left)
                    : test.polys[b].value(xe, side::left);
        double const plus = test.polys[b].value(xe, side::right);
        jump(b) = minus - plus;
      }
      for (int b = 0; b < ns; ++b)
        trace(b) = trial.polys[b].value(xe, side::right);
      c.entries.noalias() += w * jump * trace.transpose();
    }
    return c;
  }

  bool const use_derivs =
      kind == coupling_kind::stiffness || kind == coupling_kind::weighted_stiffness;
  Eigen::MatrixXd const &tv = use_derivs ? test.derivs : test.values;

  Eigen::VectorXd wq(test.grid.size());
  for (int q = 0; q < test.grid.size(); ++q)
    wq(q) = test.grid.weights[q] *
            detail::weight_or_one(weight, test.grid.points[q]);

  c.entries.noalias() = tv * wq.asDiagonal() * trial.values.transpose();
  return c;
}

// Convenience entry point building the tables on the fly with the default
// rule of k+2 Gauss points per half cell.
inline coupling1d coupling_matrix(coupling_kind kind, space1d const &test,
                                  space1d const &trial,
                                  std::optional<scalar_fn> weight = {})
{
  if (test.N != trial.N || test.k != trial.k)
    throw std::invalid_argument("coupling_matrix: mismatched N or k");
  basis_table const tt = make_basis_table(test, test.k + 2);
  basis_table const st = make_basis_table(trial, trial.k + 2);
  return assemble_coupling(kind, tt, st, std::move(weight));
}

// One-sided boundary face matrix at a domain end (x = 0 or 1) for
// non-periodic problems, oriented like the interior flux sum: entry
// (s,t) = w(xb) * trial_t(xb) * test_s(xb) * n with n = -1 at x=0, +1 at x=1.
inline Eigen::MatrixXd boundary_flux_matrix(basis_table const &test,
                                            basis_table const &trial, int end,
                                            std::optional<scalar_fn> const &weight)
{
  double const xb = (end == 0) ? 0.0 : 1.0;
  side const inward = (end == 0) ? side::right : side::left;
  double const n = (end == 0) ? -1.0 : 1.0;
  double const w = detail::weight_or_one(weight, xb);

  int const nt = space_dim(test.space);
  int const ns = space_dim(trial.space);
  Eigen::VectorXd tr(nt), sr(ns);
  for (int b = 0; b < nt; ++b)
    tr(b) = test.polys[b].value(xb, inward);
  for (int b = 0; b < ns; ++b)
    sr(b) = trial.polys[b].value(xb, inward);
  return (w * n) * tr * sr.transpose();
}

// Boundary trace vector: entry s = w(xb) * test_s(xb) * n.
inline Eigen::VectorXd boundary_trace_vector(basis_table const &test, int end,
                                             std::optional<scalar_fn> const &weight)
{
  double const xb = (end == 0) ? 0.0 : 1.0;
  side const inward = (end == 0) ? side::right : side::left;
  double const n = (end == 0) ? -1.0 : 1.0;
  double const w = detail::weight_or_one(weight, xb);

  int const nt = space_dim(test.space);
  Eigen::VectorXd tr(nt);
  for (int b = 0; b < nt; ++b)
    tr(b) = w * n * test.polys[b].value(xb, inward);
  return tr;
}

// inner products of a pointwise function against every basis function
inline Eigen::VectorXd inner_products(basis_table const &t, scalar_fn const &f)
{
  Eigen::VectorXd fw(t.grid.size());
  for (int q = 0; q < t.grid.size(); ++q)
    fw(q) = f(t.grid.points[q]) * t.grid.weights[q];
  return t.values * fw;
}

} // namespace sgcdg
