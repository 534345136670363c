#pragma once

#include "sparse_space.hpp"

#include <iostream>

namespace sgcdg
{
// One-dimensional coupling matrix t (trial entries x test entries) split as
// t = Pl * uQ where Pl is block lower triangular over the trial hierarchy
// (Pl(s,m) != 0 implies level(m) <= level(s)) and uQ is block upper
// triangular across the trial/test hierarchies (uQ(m,j) != 0 implies
// level(m) <= level(j)). The split lets a d-dimensional application run as
// 2d directional sweeps that never leave the truncated index set.
struct lu_split_1d
{
  Eigen::MatrixXd pl; // n_trial x n_trial
  Eigen::MatrixXd uq; // n_trial x n_test
  space1d trial;
  space1d test;
  bool ok = false;       // block structure achieved with in-level pivoting
  bool identity = false; // both factors are the identity
};

// Level-by-level construction of the split. For each trial level L, the
// diagonal block of Pl is the identity and the sub-diagonal blocks are the
// minimum-norm solution of
//   Pl(rows L, rows < L) * uQ(rows < L, cols < L) = t(rows L, cols < L),
// which zeroes the strictly block lower part of uQ. The split exists
// exactly when each such system is consistent; an inconsistent residual
// marks the split failed and callers fall back to a dense application.
inline lu_split_1d lu_split(Eigen::MatrixXd const &t, space1d const &trial,
                            space1d const &test)
{
  int const nr = static_cast<int>(t.rows());
  int const nc = static_cast<int>(t.cols());
  if (nr != space_dim(trial) || nc != space_dim(test))
    throw std::invalid_argument("lu_split: matrix shape does not match spaces");

  lu_split_1d f;
  f.trial = trial;
  f.test = test;
  f.pl = Eigen::MatrixXd::Identity(nr, nr);
  f.uq = Eigen::MatrixXd::Zero(nr, nc);
  f.ok = true;

  if (t.isIdentity(1.0e-14))
  {
    f.uq = Eigen::MatrixXd::Identity(nr, nc);
    f.identity = true;
    return f;
  }

  double const tol = 1.0e-11 * std::max(1.0, t.cwiseAbs().maxCoeff());

  for (int lev = 0; lev <= trial.N; ++lev)
  {
    int const r0 = level_offset(trial, lev);
    int const rn = level_dim(trial, lev);
    int const c0 = level_offset(test, lev);
    if (r0 == 0)
    {
      f.uq.block(r0, 0, rn, nc) = t.block(r0, 0, rn, nc);
      continue;
    }
    // X * U_prev = T_left, solved through the transposed system
    Eigen::MatrixXd const uprev = f.uq.topLeftCorner(r0, c0);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(
        uprev.transpose());
    Eigen::MatrixXd const x =
        cod.solve(t.block(r0, 0, rn, c0).transpose()).transpose();
    double const resid =
        (x * uprev - t.block(r0, 0, rn, c0)).cwiseAbs().maxCoeff();
    if (resid > tol)
    {
      f.ok = false;
      return f;
    }
    f.pl.block(r0, 0, rn, r0) = x;
    f.uq.block(r0, c0, rn, nc - c0) =
        t.block(r0, c0, rn, nc - c0) - x * f.uq.topRightCorner(r0, nc - c0);
  }
  return f;
}

namespace detail
{
// nonzero entries of a 1D factor grouped by (input level, output level), so
// a sweep does work proportional to the factor's sparsity; the coupling
// matrices between hierarchical bases are sparse across levels even though
// their triangular split factors are not
struct level_entry
{
  int s, m; // local indices inside the level blocks
  double c;
};

struct factor_nnz
{
  int n_in = 0, n_out = 0;
  std::vector<std::vector<level_entry>> at; // [li * n_out + lo]
  long total = 0;

  std::vector<level_entry> const &block(int li, int lo) const
  {
    return at[li * n_out + lo];
  }
};

inline factor_nnz make_factor_nnz(Eigen::MatrixXd const &f,
                                  space1d const &sp_in, space1d const &sp_out)
{
  factor_nnz z;
  z.n_in = sp_in.N + 1;
  z.n_out = sp_out.N + 1;
  z.at.resize(static_cast<std::size_t>(z.n_in) * z.n_out);
  for (int r = 0; r < f.rows(); ++r)
  {
    int const li = level_of_flat(sp_in, r);
    int const s = r - level_offset(sp_in, li);
    for (int c = 0; c < f.cols(); ++c)
      if (f(r, c) != 0.0)
      {
        int const lo = level_of_flat(sp_out, c);
        z.at[li * z.n_out + lo].push_back(
            {s, c - level_offset(sp_out, lo), f(r, c)});
        ++z.total;
      }
  }
  return z;
}

// b_out += sum_s in[s] * F(s, m) contracted over dimension `dim`, visiting
// only level-block pairs allowed by the factor's triangular structure
inline void sweep(sparse_layout const &lin, Eigen::VectorXd const &in,
                  sparse_layout const &lout, Eigen::VectorXd &out,
                  factor_nnz const &f, int dim, bool lower)
{
  out.setZero(lout.dofs);
  for (auto const &bo : lout.blocks)
  {
    int const lo = bo.lvl[dim];
    level_vec lv = bo.lvl;
    for (int li = 0; li < f.n_in; ++li)
    {
      if (lower ? (li < lo) : (li > lo))
        continue;
      std::vector<level_entry> const &nz = f.block(li, lo);
      if (nz.empty())
        continue;
      lv[dim] = li;
      auto it = lin.block_of.find(lv);
      if (it == lin.block_of.end())
        continue;
      level_block const &bi = lin.blocks[it->second];

      int pre = 1, post = 1;
      for (int r = 0; r < dim; ++r)
        pre *= bo.esize[r];
      for (int r = dim + 1; r < lout.d; ++r)
        post *= bo.esize[r];
      int const ni = bi.esize[dim];
      int const no = bo.esize[dim];

      double const *src = in.data() + bi.offset;
      double *dst = out.data() + bo.offset;
      for (auto const &e : nz)
        for (int a = 0; a < pre; ++a)
        {
          double const *srow = src + (a * ni + e.s) * post;
          double *drow = dst + (a * no + e.m) * post;
          for (int b = 0; b < post; ++b)
            drow[b] += e.c * srow[b];
        }
    }
  }
}
} // namespace detail

// Per-dimension application strategy. When the triangular split does not
// exist (couplings into the non-periodic dual hierarchy, whose right edge
// cell is a fine-scale function filed at level zero), the matrix is written
// as t = t_low + t_up with t_low strictly block lower (deeper trial level
// than test level) and t_up block upper. Each part is a single level-safe
// sweep; the d-dimensional product then expands into one pass per subset of
// such dimensions, all on the truncated set.
enum class dim_mode
{
  identity,
  split,
  lower_upper
};

// Unidirectional fast transform: applies the tensor product of 1D coupling
// matrices (one per dimension, possibly identity) to a coefficient vector,
// with every intermediate living on the truncated set.
struct tensor_op
{
  int d = 0;
  std::array<dim_mode, max_dim> mode{};
  std::array<lu_split_1d, max_dim> factor{};
  std::array<Eigen::MatrixXd, max_dim> tlow{}, tup{};
  std::array<detail::factor_nnz, max_dim> pl_nz{}, uq_nz{};
  std::array<detail::factor_nnz, max_dim> low_nz{}, up_nz{};
  std::array<space1d, max_dim> trial_dims{}, test_dims{};
  sparse_layout lin;
  // layouts reached while dimensions move to the test space, keyed by the
  // bitmask of already-transitioned dimensions
  std::vector<sparse_layout> lay_cache;
  bool all_split = true; // every dimension admits the triangular split

  Eigen::VectorXd apply(Eigen::VectorXd const &in_slot) const
  {
    std::vector<int> lu_dims; // subset-expanded dims
    for (int i = 0; i < d; ++i)
      if (mode[i] == dim_mode::lower_upper)
        lu_dims.push_back(i);

    Eigen::VectorXd out;
    bool first = true;
    for (int mask = 0; mask < (1 << lu_dims.size()); ++mask)
    {
      auto in_subset = [&](int i) {
        for (std::size_t b = 0; b < lu_dims.size(); ++b)
          if (lu_dims[b] == i)
            return (mask >> b & 1) == 1;
        return false;
      };

      Eigen::VectorXd cur = in_slot, nxt;
      int moved = 0; // dimensions already in the test space
      // descending phase: Pl factors stay in the trial space, the strictly
      // lower parts transition their dimension to the test space
      for (int i = 0; i < d; ++i)
      {
        if (mode[i] == dim_mode::split && !factor[i].identity)
        {
          detail::sweep(lay_cache[moved], cur, lay_cache[moved], nxt,
                        pl_nz[i], i, true);
          std::swap(cur, nxt);
        }
        else if (mode[i] == dim_mode::lower_upper && in_subset(i))
        {
          detail::sweep(lay_cache[moved], cur, lay_cache[moved | 1 << i],
                        nxt, low_nz[i], i, true);
          std::swap(cur, nxt);
          moved |= 1 << i;
        }
      }
      // ascending phase
      for (int i = 0; i < d; ++i)
      {
        if (mode[i] == dim_mode::split && !factor[i].identity)
        {
          detail::sweep(lay_cache[moved], cur, lay_cache[moved | 1 << i],
                        nxt, uq_nz[i], i, false);
          std::swap(cur, nxt);
          moved |= 1 << i;
        }
        else if (mode[i] == dim_mode::lower_upper && !in_subset(i))
        {
          detail::sweep(lay_cache[moved], cur, lay_cache[moved | 1 << i],
                        nxt, up_nz[i], i, false);
          std::swap(cur, nxt);
          moved |= 1 << i;
        }
      }
      if (first)
      {
        out = cur;
        first = false;
      }
      else
        out += cur;
    }
    return out;
  }
};

// Build the transform for per-dimension matrices t[i] (trial x test entries).
// Pass an empty matrix for an identity dimension.  Each dimension runs
// whichever strategy costs less: the two dense triangular split sweeps, or
// the subset-expanded lower/upper sweeps over the sparse matrix itself.
inline tensor_op make_tensor_op(sparse_layout const &lin,
                                std::array<Eigen::MatrixXd, max_dim> const &t,
                                std::array<space1d, max_dim> const &test_dims)
{
  tensor_op op;
  op.d = lin.d;
  op.lin = lin;
  for (int i = 0; i < lin.d; ++i)
  {
    op.trial_dims[i] = lin.dims[i];
    op.test_dims[i] = test_dims[i];
    if (t[i].size() == 0)
    {
      op.factor[i].identity = true;
      op.factor[i].ok = true;
      op.factor[i].trial = lin.dims[i];
      op.factor[i].test = test_dims[i];
      op.mode[i] = dim_mode::split; // handled as an identity split
      continue;
    }
    op.factor[i] = lu_split(t[i], lin.dims[i], test_dims[i]);
    if (!op.factor[i].ok)
      op.all_split = false;

    int const nr = static_cast<int>(t[i].rows());
    int const nc = static_cast<int>(t[i].cols());
    op.tlow[i] = Eigen::MatrixXd::Zero(nr, nc);
    op.tup[i] = t[i];
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c)
        if (level_of_flat(lin.dims[i], r) > level_of_flat(test_dims[i], c))
        {
          op.tlow[i](r, c) = t[i](r, c);
          op.tup[i](r, c) = 0.0;
        }
    op.low_nz[i] =
        detail::make_factor_nnz(op.tlow[i], lin.dims[i], test_dims[i]);
    op.up_nz[i] =
        detail::make_factor_nnz(op.tup[i], lin.dims[i], test_dims[i]);

    if (op.factor[i].ok)
    {
      op.pl_nz[i] =
          detail::make_factor_nnz(op.factor[i].pl, lin.dims[i], lin.dims[i]);
      op.uq_nz[i] =
          detail::make_factor_nnz(op.factor[i].uq, lin.dims[i], test_dims[i]);
      // the subset expansion multiplies the lower/upper work by up to 2^d
      long const cost_lu =
          (op.low_nz[i].total + op.up_nz[i].total) << lin.d;
      long const cost_split = op.pl_nz[i].total + op.uq_nz[i].total;
      op.mode[i] =
          cost_split <= cost_lu ? dim_mode::split : dim_mode::lower_upper;
    }
    else
      op.mode[i] = dim_mode::lower_upper;
  }

  op.lay_cache.resize(std::size_t(1) << lin.d);
  int trans_mask = 0;
  for (int i = 0; i < lin.d; ++i)
    if (!op.factor[i].identity)
      trans_mask |= 1 << i;
  for (int mask = 0; mask < (1 << lin.d); ++mask)
  {
    if ((mask & ~trans_mask) != 0)
      continue; // identity dimensions never transition
    std::array<space1d, max_dim> dims = lin.dims;
    for (int i = 0; i < lin.d; ++i)
      if (mask >> i & 1)
        dims[i] = test_dims[i];
    op.lay_cache[mask] = mask == 0 ? lin : make_layout(lin.d, dims, lin.rule);
  }
  return op;
}

// Conjugate gradient solve of M x = b where M is the (symmetric positive
// definite) d-dimensional Gram matrix applied through a tensor_op. Needed
// for the non-periodic dual space, whose hierarchy is not orthonormal.
struct mass_solver
{
  tensor_op op;
  Eigen::VectorXd inv_diag; // Jacobi preconditioner, slot ordering
  bool trivial = false;     // orthonormal hierarchy: M is the identity

  Eigen::VectorXd solve(Eigen::VectorXd const &b) const
  {
    if (trivial)
      return b;
    int const n = static_cast<int>(b.size());
    double const bnorm = b.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (bnorm == 0.0)
      return x;
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    int const maxit = 10 * static_cast<int>(std::sqrt(double(n))) + 50;
    for (int it = 0; it < maxit; ++it)
    {
      Eigen::VectorXd mp = op.apply(p);
      double const alpha = rz / p.dot(mp);
      x += alpha * p;
      r -= alpha * mp;
      if (r.norm() < 1.0e-14 * bnorm)
        return x;
      z = inv_diag.cwiseProduct(r);
      double const rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    throw std::runtime_error("mass_solver: conjugate gradient did not reach "
                             "the requested residual");
  }
};

inline mass_solver make_mass_solver(sparse_layout const &lay,
                                    Eigen::MatrixXd const &gram1d)
{
  mass_solver ms;
  if (gram1d.isIdentity(1.0e-13))
  {
    ms.trivial = true;
    return ms;
  }
  std::array<Eigen::MatrixXd, max_dim> t{};
  for (int i = 0; i < lay.d; ++i)
    t[i] = gram1d;
  ms.op = make_tensor_op(lay, t, lay.dims);
  ms.inv_diag.resize(lay.dofs);
  for (auto const &b : lay.blocks)
  {
    std::array<int, max_dim> s{};
    for (int a = 0; a < b.size; ++a)
    {
      int rem = a;
      double dg = 1.0;
      for (int r = lay.d - 1; r >= 0; --r)
      {
        s[r] = rem % b.esize[r];
        rem /= b.esize[r];
      }
      for (int r = 0; r < lay.d; ++r)
      {
        int const e = level_offset(lay.dims[r], b.lvl[r]) + s[r];
        dg *= gram1d(e, e);
      }
      ms.inv_diag(b.offset + a) = 1.0 / dg;
    }
  }
  return ms;
}

} // namespace sgcdg
