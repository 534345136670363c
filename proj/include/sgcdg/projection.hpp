#pragma once

#include "fast_transform.hpp"

#include <Eigen/Sparse>

namespace sgcdg
{
// separable scalar function: sum of products of 1D factors; a null factor
// means the constant 1
struct separable_term
{
  double coeff = 1.0;
  std::array<scalar_fn, max_dim> factor{};
};

struct separable_fn
{
  std::vector<separable_term> terms;
};

// black-box scalar function of a point
using point_fn = std::function<double(std::array<double, max_dim> const &)>;

// sin(sum_i freq[i] * x_i + phase) expanded by the angle addition formula
// into at most 2^d separable products of 1D sines and cosines
inline separable_fn sin_of_sum(int d, std::array<double, max_dim> const &freq,
                               double phase)
{
  // maintain sin(S) and cos(S) expansions over accumulated dims; S0 = phase
  separable_fn f;
  std::vector<separable_term> sinS = {{std::sin(phase), {}}};
  std::vector<separable_term> cosS = {{std::cos(phase), {}}};
  for (int i = 0; i < d; ++i)
  {
    double const w = freq[i];
    auto sin_i = [w](double x) { return std::sin(w * x); };
    auto cos_i = [w](double x) { return std::cos(w * x); };
    std::vector<separable_term> nsin, ncos;
    for (auto const &t : sinS)
    {
      separable_term a = t;
      a.factor[i] = cos_i;
      nsin.push_back(a);
      separable_term b = t;
      b.factor[i] = sin_i;
      b.coeff = -b.coeff;
      ncos.push_back(b);
    }
    for (auto const &t : cosS)
    {
      separable_term a = t;
      a.factor[i] = sin_i;
      nsin.push_back(a);
      separable_term b = t;
      b.factor[i] = cos_i;
      ncos.push_back(b);
    }
    sinS = std::move(nsin);
    cosS = std::move(ncos);
  }
  f.terms = std::move(sinS);
  std::erase_if(f.terms, [](separable_term const &t) { return t.coeff == 0.0; });
  if (f.terms.empty())
    f.terms.push_back({0.0, {}});
  return f;
}

inline separable_fn cos_of_sum(int d, std::array<double, max_dim> const &freq,
                               double phase)
{
  return sin_of_sum(d, freq, phase + 0.5 * M_PI);
}

// exp(prod_i x_i) on [0,1]^d expanded as the truncated Taylor series
// sum_n (prod_i x_i^n) / n!, exact to machine precision with 26 terms
inline separable_fn exp_of_product(int d, int nterms = 26)
{
  separable_fn f;
  double fact = 1.0;
  for (int n = 0; n < nterms; ++n)
  {
    if (n > 0)
      fact *= n;
    separable_term t;
    t.coeff = 1.0 / fact;
    for (int i = 0; i < d; ++i)
      t.factor[i] = [n](double x) { return std::pow(x, n); };
    f.terms.push_back(t);
  }
  return f;
}

// integral over [0,1] of a product of factors, on a composite Gauss rule
// fine enough for all smooth factors used here
inline double integrate_product(std::vector<scalar_fn> const &fns)
{
  int const cells = 256, ppc = 10;
  quadrature const ref = gauss_rule(ppc, 0.0, 1.0);
  double acc = 0.0;
  double const h = 1.0 / cells;
  for (int c = 0; c < cells; ++c)
    for (int q = 0; q < ppc; ++q)
    {
      double const x = (c + ref.nodes[q]) * h;
      double v = ref.weights[q] * h;
      for (auto const &f : fns)
        if (f)
          v *= f(x);
      acc += v;
    }
  return acc;
}

// exact squared L2 norm of a separable function over [0,1]^d
inline double l2sq_of(int d, separable_fn const &f)
{
  double acc = 0.0;
  for (auto const &a : f.terms)
    for (auto const &b : f.terms)
    {
      double v = a.coeff * b.coeff;
      for (int i = 0; i < d && v != 0.0; ++i)
        v *= integrate_product({a.factor[i], b.factor[i]});
      acc += v;
    }
  return acc;
}

namespace detail
{
// quadrature confined to the nonzero pieces of one basis function, with the
// basis values folded into the weights
struct support_quad
{
  std::vector<double> x;
  std::vector<double> wphi;
};

inline std::vector<support_quad> make_support_quads(basis_table const &t,
                                                    int ppc)
{
  std::vector<support_quad> out(t.polys.size());
  quadrature const ref = gauss_rule(ppc, 0.0, 1.0);
  for (std::size_t b = 0; b < t.polys.size(); ++b)
  {
    piecewise_poly const &p = t.polys[b];
    auto const &br = p.breakpoints();
    for (int piece = 0; piece < p.num_pieces(); ++piece)
    {
      if (p.coefficients().row(piece).cwiseAbs().maxCoeff() == 0.0)
        continue;
      double const a = br[piece], w = br[piece + 1] - br[piece];
      for (int q = 0; q < ppc; ++q)
      {
        double const x = a + ref.nodes[q] * w;
        out[b].x.push_back(x);
        out[b].wphi.push_back(ref.weights[q] * w * p.value(x));
      }
    }
  }
  return out;
}
} // namespace detail

// Projection, inner products, norms, errors and point evaluation over one
// sparse space, with the 1D tables and the dual mass factorization cached.
struct projector
{
  sparse_space space;
  basis_table table;      // k+2 points per half cell, for projections
  basis_table table_fine; // k+6 points, for error inner products
  mass_solver msolve;

  // <f, phi_s> for every basis function, ordinal numbering
  Eigen::VectorXd inner(separable_fn const &f, bool fine = false) const
  {
    basis_table const &t = fine ? table_fine : table;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dofs());
    for (auto const &term : f.terms)
    {
      if (term.coeff == 0.0)
        continue;
      std::array<Eigen::VectorXd, max_dim> g;
      for (int i = 0; i < space.d; ++i)
        g[i] = term.factor[i]
                   ? inner_products(t, term.factor[i])
                   : inner_products(t, [](double) { return 1.0; });
      for (auto const &blk : space.layout.blocks)
      {
        std::array<int, max_dim> s{};
        for (int a = 0; a < blk.size; ++a)
        {
          int rem = a;
          double v = term.coeff;
          for (int i = space.d - 1; i >= 0; --i)
          {
            s[i] = rem % blk.esize[i];
            rem /= blk.esize[i];
          }
          for (int i = 0; i < space.d; ++i)
            v *= g[i](level_offset(space.sp1, blk.lvl[i]) + s[i]);
          out(blk.offset + a) += v;
        }
      }
    }
    return to_ordinal(space, out);
  }

  Eigen::VectorXd inner(point_fn const &f, int ppc) const
  {
    auto const sq = detail::make_support_quads(table, ppc);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dofs());
    for (auto const &blk : space.layout.blocks)
      for (int a = 0; a < blk.size; ++a)
      {
        std::array<int, max_dim> e{};
        int rem = a;
        for (int i = space.d - 1; i >= 0; --i)
        {
          e[i] = level_offset(space.sp1, blk.lvl[i]) + rem % blk.esize[i];
          rem /= blk.esize[i];
        }
        // tensor quadrature over the support of this basis function
        std::array<double, max_dim> x{};
        double acc = 0.0;
        auto loop = [&](auto &&self, int dim, double w) -> void {
          if (dim == space.d)
          {
            acc += w * f(x);
            return;
          }
          detail::support_quad const &q = sq[e[dim]];
          for (std::size_t i = 0; i < q.x.size(); ++i)
          {
            x[dim] = q.x[i];
            self(self, dim + 1, w * q.wphi[i]);
          }
        };
        loop(loop, 0, 1.0);
        out(blk.offset + a) = acc;
      }
    return to_ordinal(space, out);
  }

  // L2 projection: solve M c = <f, phi>; M is the identity except for the
  // non-periodic dual hierarchy
  Eigen::VectorXd project(separable_fn const &f) const
  {
    return solve_mass(inner(f));
  }

  Eigen::VectorXd project(point_fn const &f, int ppc) const
  {
    return solve_mass(inner(f, ppc));
  }

  Eigen::VectorXd solve_mass(Eigen::VectorXd const &b_ord) const
  {
    if (msolve.trivial)
      return b_ord;
    return to_ordinal(space, msolve.solve(to_slot(space, b_ord)));
  }

  Eigen::VectorXd apply_mass(Eigen::VectorXd const &c_ord) const
  {
    if (msolve.trivial)
      return c_ord;
    return to_ordinal(space, msolve.op.apply(to_slot(space, c_ord)));
  }

  double norm_sq(Eigen::VectorXd const &c_ord) const
  {
    return c_ord.dot(apply_mass(c_ord));
  }

  // || u_h - f ||^2 = c'Mc - 2 c'<f,phi> + ||f||^2, never negative up to
  // roundoff; clamped at zero
  double l2_error(Eigen::VectorXd const &c_ord, separable_fn const &f) const
  {
    double const e2 = norm_sq(c_ord) - 2.0 * c_ord.dot(inner(f, true)) +
                      l2sq_of(space.d, f);
    return std::sqrt(std::max(0.0, e2));
  }

  double l2_error(Eigen::VectorXd const &c_ord, point_fn const &f,
                  double f_l2sq, int ppc) const
  {
    double const e2 = norm_sq(c_ord) - 2.0 * c_ord.dot(inner(f, ppc)) + f_l2sq;
    return std::sqrt(std::max(0.0, e2));
  }

  // pointwise evaluation of the expansion; per level only the translations
  // covering x contribute
  double evaluate(Eigen::VectorXd const &c_ord, std::array<double, max_dim> x,
                  side s = side::right) const
  {
    Eigen::VectorXd const c = to_slot(space, c_ord);
    int const k = space.sp1.k;
    double const hs = 0.5 * level_h(space.sp1.N);
    bool const dual = space.sp1.role == mesh_role::dual;
    double acc = 0.0;
    for (auto const &blk : space.layout.blocks)
    {
      std::array<int, max_dim> base{}, cnt{};
      bool alive = true;
      for (int i = 0; i < space.d && alive; ++i)
      {
        int const l = blk.lvl[i];
        if (l == 0)
        {
          base[i] = 0;
          cnt[i] = level_dim(space.sp1, 0);
          continue;
        }
        double xs = x[i];
        if (dual)
        {
          xs += hs;
          if (space.sp1.boundary == boundary_type::periodic && xs >= 1.0)
            xs -= 1.0;
        }
        int const cells = 1 << (l - 1);
        int j = static_cast<int>(xs * cells);
        if (j >= cells)
        {
          if (space.sp1.boundary == boundary_type::nonperiodic)
          {
            alive = false; // beyond the last shifted cell: no support
            continue;
          }
          j = cells - 1;
        }
        base[i] = j * (k + 1);
        cnt[i] = k + 1;
      }
      if (!alive)
        continue;
      auto loop = [&](auto &&self, int dim, double v, int slot) -> void {
        if (v == 0.0)
          return;
        if (dim == space.d)
        {
          acc += v * c(blk.offset + slot);
          return;
        }
        int const off1 = level_offset(space.sp1, blk.lvl[dim]);
        for (int q = 0; q < cnt[dim]; ++q)
        {
          int const entry = base[dim] + q;
          double const phi = table.polys[off1 + entry].value(x[dim], s);
          self(self, dim + 1, v * phi, slot * blk.esize[dim] + entry);
        }
      };
      loop(loop, 0, 1.0, 0);
    }
    return acc;
  }
};

namespace detail
{
// evaluation matrix of every 1D basis function at every grid point, plus the
// quadrature weights of the grid
struct grid_eval
{
  Eigen::MatrixXd e; // points x basis entries
  Eigen::VectorXd x;
  Eigen::VectorXd w;
};

inline grid_eval make_grid_eval(space1d const &sp, basis_table const &t,
                                int ppc)
{
  // cell edges of the finest mesh of the hierarchy itself: every coarser
  // basis function is polynomial on these cells, so a k+2 point Gauss rule
  // per cell integrates products of expansion members exactly
  int const n = 1 << sp.N;
  double const h = 1.0 / n;
  std::vector<double> edges;
  edges.push_back(0.0);
  if (sp.role == mesh_role::dual)
    for (int j = 0; j <= n - 1; ++j)
      edges.push_back((j + 0.5) * h);
  else
    for (int j = 1; j <= n - 1; ++j)
      edges.push_back(j * h);
  edges.push_back(1.0);

  quadrature const ref = gauss_rule(ppc, 0.0, 1.0);
  int const cells = static_cast<int>(edges.size()) - 1;
  int const npts = cells * ppc;
  int const nb = static_cast<int>(t.polys.size());
  grid_eval g;
  g.x.resize(npts);
  g.w.resize(npts);
  g.e.resize(npts, nb);
  for (int c = 0; c < cells; ++c)
  {
    double const len = edges[c + 1] - edges[c];
    for (int q = 0; q < ppc; ++q)
    {
      int const p = c * ppc + q;
      g.x(p) = edges[c] + ref.nodes[q] * len;
      g.w(p) = ref.weights[q] * len;
    }
  }
  for (int b = 0; b < nb; ++b)
    for (int p = 0; p < npts; ++p)
      g.e(p, b) = t.polys[b].value(g.x(p));
  return g;
}
} // namespace detail

// || u_h - f || by quadrature on the tensor Gauss grid of the hierarchy's
// finest mesh (the mesh on which the expansion is piecewise polynomial).
// Unlike the expanded form c'Mc - 2c'b + ||f||^2 this does not cancel near
// machine precision, at the cost of sweeping the full tensor grid; d <= 3.
inline double l2_error_grid(projector const &pr, Eigen::VectorXd const &c_ord,
                            point_fn const &f, int ppc = 0)
{
  sparse_space const &sp = pr.space;
  int const d = sp.d;
  if (d < 1 || d > 3)
    throw std::invalid_argument("l2_error_grid: dimension out of range");
  if (ppc <= 0)
    ppc = sp.sp1.k + 2; // resolves the square of the local residual
  detail::grid_eval const g = detail::make_grid_eval(sp.sp1, pr.table, ppc);
  int const npts = static_cast<int>(g.x.size());
  int const nb = static_cast<int>(g.e.cols());
  Eigen::VectorXd const c = to_slot(sp, c_ord);

  auto entry_offset = [&](int lvl, int local) {
    return level_offset(sp.sp1, lvl) + local;
  };

  double acc = 0.0;
  std::array<double, max_dim> x{};
  if (d == 1)
  {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nb);
    for (auto const &blk : sp.layout.blocks)
      for (int q = 0; q < blk.size; ++q)
        a(entry_offset(blk.lvl[0], q)) += c(blk.offset + q);
    Eigen::VectorXd const u = g.e * a;
    for (int p = 0; p < npts; ++p)
    {
      x[0] = g.x(p);
      double const r = f(x) - u(p);
      acc += g.w(p) * r * r;
    }
    return std::sqrt(acc);
  }

  // basis functions above level 0 live on a single cell, so the evaluation
  // matrix is sparse; the slab products below ride on that
  Eigen::SparseMatrix<double> const es = g.e.sparseView(0.0, 0.0);

  if (d == 2)
  {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nb, nb);
    for (auto const &blk : sp.layout.blocks)
      for (int q = 0; q < blk.size; ++q)
        a(entry_offset(blk.lvl[0], q / blk.esize[1]),
          entry_offset(blk.lvl[1], q % blk.esize[1])) += c(blk.offset + q);
    Eigen::MatrixXd const u = es * (a * es.transpose()).eval();
    for (int p0 = 0; p0 < npts; ++p0)
    {
      x[0] = g.x(p0);
      for (int p1 = 0; p1 < npts; ++p1)
      {
        x[1] = g.x(p1);
        double const r = f(x) - u(p0, p1);
        acc += g.w(p0) * g.w(p1) * r * r;
      }
    }
    return std::sqrt(acc);
  }

  // d == 3: contract the third dimension one grid slab at a time so the
  // working set stays two-dimensional
  Eigen::MatrixXd a(nb, nb), u(npts, npts);
  for (int p2 = 0; p2 < npts; ++p2)
  {
    a.setZero();
    for (auto const &blk : sp.layout.blocks)
    {
      int const e2 = blk.esize[2];
      for (int q = 0; q < blk.size; q += e2)
      {
        double s = 0.0;
        for (int j = 0; j < e2; ++j)
          s += g.e(p2, entry_offset(blk.lvl[2], j)) * c(blk.offset + q + j);
        int const plane = q / e2;
        a(entry_offset(blk.lvl[0], plane / blk.esize[1]),
          entry_offset(blk.lvl[1], plane % blk.esize[1])) += s;
      }
    }
    u = es * (a * es.transpose()).eval();
    x[2] = g.x(p2);
    double slab = 0.0;
    for (int p0 = 0; p0 < npts; ++p0)
    {
      x[0] = g.x(p0);
      for (int p1 = 0; p1 < npts; ++p1)
      {
        x[1] = g.x(p1);
        double const r = f(x) - u(p0, p1);
        slab += g.w(p0) * g.w(p1) * r * r;
      }
    }
    acc += g.w(p2) * slab;
  }
  return std::sqrt(acc);
}

inline projector make_projector(sparse_space const &sp)
{
  projector p;
  p.space = sp;
  p.table = make_basis_table(sp.sp1, sp.sp1.k + 2);
  p.table_fine = make_basis_table(sp.sp1, sp.sp1.k + 6);
  if (sp.sp1.role == mesh_role::dual &&
      sp.sp1.boundary == boundary_type::nonperiodic)
  {
    Eigen::MatrixXd const g =
        assemble_coupling(coupling_kind::mass, p.table, p.table).entries;
    p.msolve = make_mass_solver(sp.layout, g);
  }
  else
    p.msolve.trivial = true;
  return p;
}

} // namespace sgcdg
