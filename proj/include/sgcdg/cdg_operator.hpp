#pragma once

#include "projection.hpp"

#include <random>

namespace sgcdg
{
// One separable term of the coefficient matrices: in direction `direction`
// the matrix A_i(t, x) picks up
//   coupling * time_factor(t) * prod_r factor[r](x_r)
// with null entries standing for the constant 1.
struct coeff_term
{
  int direction = 0;
  Eigen::MatrixXd coupling; // m x m constant matrix
  std::array<scalar_fn, max_dim> factor{};
  scalar_fn time_factor{};
};

// Dirichlet inflow data for one direction: at a stage time, one separable
// function of the transverse coordinates per component (the direction's own
// factor slot is ignored).
struct boundary_data
{
  std::function<std::vector<separable_fn>(double t)> g;
};

struct hyperbolic_system
{
  int d = 2;
  int m = 1;
  boundary_type boundary = boundary_type::periodic;
  std::vector<coeff_term> terms;
  // flow direction of A_i: +1 or -1; 0 requests inference by sampling
  // (scalar systems only). Used to classify inflow/outflow faces.
  std::array<int, max_dim> flow_sign{};
  std::array<boundary_data, max_dim> inflow{};
};

// Coefficient vectors in slot (internal fast-transform) ordering.
struct solution_state
{
  double t = 0.0;
  std::vector<Eigen::VectorXd> u, v; // one vector per component
};

namespace detail
{
// slot-ordered vector whose entry at multi-index e is
// coeff * prod_i g[i](flat entry e_i)
inline Eigen::VectorXd tensor_vector(sparse_layout const &lay,
                                     space1d const &sp1,
                                     std::array<Eigen::VectorXd, max_dim> const &g,
                                     double coeff)
{
  Eigen::VectorXd out(lay.dofs);
  for (auto const &blk : lay.blocks)
  {
    std::array<int, max_dim> s{};
    for (int a = 0; a < blk.size; ++a)
    {
      int rem = a;
      double v = coeff;
      for (int i = lay.d - 1; i >= 0; --i)
      {
        s[i] = rem % blk.esize[i];
        rem /= blk.esize[i];
      }
      for (int i = 0; i < lay.d; ++i)
        v *= g[i](level_offset(sp1, blk.lvl[i]) + s[i]);
      out(blk.offset + a) = v;
    }
  }
  return out;
}

inline std::optional<scalar_fn> as_weight(scalar_fn const &f)
{
  if (f)
    return std::optional<scalar_fn>(f);
  return std::nullopt;
}

// product of two optional 1D factors, null meaning 1
inline scalar_fn factor_product(scalar_fn const &a, scalar_fn const &b)
{
  if (a && b)
    return [a, b](double x) { return a(x) * b(x); };
  if (a)
    return a;
  if (b)
    return b;
  return [](double) { return 1.0; };
}
} // namespace detail

// One assembled separable term: the tensor transform plus the scalar parts
// applied at evaluation time.
struct term_op
{
  Eigen::MatrixXd coupling; // m x m
  scalar_fn time_factor;
  tensor_op op;
};

// Inflow boundary source for one term: the face integral of the Dirichlet
// data against the test basis, evaluated per call since g depends on time.
struct inflow_source
{
  int direction = 0;
  Eigen::MatrixXd coupling;
  scalar_fn time_factor;
  std::array<scalar_fn, max_dim> factor{}; // the A-term's spatial factors
  Eigen::VectorXd trace; // 1D boundary trace in dim `direction`, sign folded
};

// Semi-discrete CDG operator: weak form on the primal mesh tested against
// primal bases with the dual solution in the flux role, and vice versa,
// plus the mesh-coupling dissipation term (1/tau_max)(v - u).
struct cdg_operator
{
  hyperbolic_system sys;
  sparse_space sp_u, sp_v;
  double tau_max = 0.0;
  basis_table table_u, table_v;
  mass_solver msolve_v; // dual Gram; trivial unless non-periodic
  tensor_op cross_uv;   // dual solution tested against primal bases
  tensor_op cross_vu;   // primal solution tested against dual bases
  std::vector<term_op> vol_u, vol_v;   // weighted stiffness minus flux
  std::vector<term_op> bdry_u, bdry_v; // outflow faces, own-mesh trace
  std::vector<inflow_source> inflow_u, inflow_v;
  std::array<int, max_dim> sign{}; // resolved flow directions

  solution_state rhs(solution_state const &state) const
  {
    solution_state out;
    out.t = state.t;
    out.u.resize(sys.m);
    out.v.resize(sys.m);
    double const itau = 1.0 / tau_max;

    for (int l = 0; l < sys.m; ++l)
    {
      out.u[l] = itau * (cross_uv.apply(state.v[l]) - state.u[l]);
      out.v[l] = itau * (cross_vu.apply(state.u[l]) - mass_v(state.v[l]));
    }
    accumulate_terms(vol_u, state.v, state.t, out.u);
    accumulate_terms(bdry_u, state.u, state.t, out.u);
    accumulate_terms(vol_v, state.u, state.t, out.v);
    accumulate_terms(bdry_v, state.v, state.t, out.v);
    accumulate_inflow(inflow_u, table_u, sp_u, state.t, out.u);
    accumulate_inflow(inflow_v, table_v, sp_v, state.t, out.v);

    for (int l = 0; l < sys.m; ++l)
    {
      if (!out.u[l].allFinite() || !out.v[l].allFinite())
        throw std::runtime_error("cdg_operator: non-finite derivative in "
                                 "component " +
                                 std::to_string(l));
      out.v[l] = msolve_v.solve(out.v[l]);
    }
    return out;
  }

  // sum over components of ||u_h||^2 + ||v_h||^2
  double energy(solution_state const &state) const
  {
    double acc = 0.0;
    for (int l = 0; l < sys.m; ++l)
      acc += state.u[l].squaredNorm() + state.v[l].dot(mass_v(state.v[l]));
    return acc;
  }

  // sum over components of ||u_h - v_h||^2, via the cross mass operator
  double mismatch_norm_sq(solution_state const &state) const
  {
    double acc = 0.0;
    for (int l = 0; l < sys.m; ++l)
      acc += state.u[l].squaredNorm() + state.v[l].dot(mass_v(state.v[l])) -
             2.0 * state.u[l].dot(cross_uv.apply(state.v[l]));
    return acc;
  }

  Eigen::VectorXd mass_v(Eigen::VectorXd const &v) const
  {
    return msolve_v.trivial ? v : msolve_v.op.apply(v);
  }

private:
  void accumulate_terms(std::vector<term_op> const &terms,
                        std::vector<Eigen::VectorXd> const &trial, double t,
                        std::vector<Eigen::VectorXd> &acc) const
  {
    for (auto const &tm : terms)
    {
      double const tf = tm.time_factor ? tm.time_factor(t) : 1.0;
      if (tf == 0.0)
        continue;
      for (int r = 0; r < sys.m; ++r)
      {
        if (tm.coupling.col(r).isZero(0.0))
          continue;
        Eigen::VectorXd const w = tm.op.apply(trial[r]);
        for (int l = 0; l < sys.m; ++l)
          if (double const c = tm.coupling(l, r); c != 0.0)
            acc[l] += (tf * c) * w;
      }
    }
  }

  void accumulate_inflow(std::vector<inflow_source> const &sources,
                         basis_table const &table, sparse_space const &sp,
                         double t, std::vector<Eigen::VectorXd> &acc) const
  {
    for (auto const &src : sources)
    {
      double const tf = src.time_factor ? src.time_factor(t) : 1.0;
      if (tf == 0.0)
        continue;
      std::vector<separable_fn> const g = sys.inflow[src.direction].g(t);
      for (int r = 0; r < sys.m; ++r)
      {
        if (src.coupling.col(r).isZero(0.0))
          continue;
        Eigen::VectorXd face = Eigen::VectorXd::Zero(sp.dofs());
        for (auto const &gt : g[r].terms)
        {
          std::array<Eigen::VectorXd, max_dim> e{};
          for (int i = 0; i < sys.d; ++i)
            e[i] = (i == src.direction)
                       ? src.trace
                       : inner_products(table, detail::factor_product(
                                                   src.factor[i], gt.factor[i]));
          face += detail::tensor_vector(sp.layout, sp.sp1, e, gt.coeff);
        }
        for (int l = 0; l < sys.m; ++l)
          if (double const c = src.coupling(l, r); c != 0.0)
            acc[l] += (tf * c) * face;
      }
    }
  }
};

namespace detail
{
// flow direction of A_i from its sign over the domain; defined for scalar
// systems with a single term per direction, otherwise the caller must
// provide the sign explicitly
inline int infer_flow_sign(hyperbolic_system const &sys, int dir,
                           quad_grid const &grid)
{
  if (sys.m != 1)
    throw std::invalid_argument("cdg_operator: flow_sign must be given for "
                                "systems with more than one component");
  std::vector<coeff_term const *> terms;
  for (auto const &tm : sys.terms)
    if (tm.direction == dir)
      terms.push_back(&tm);
  if (terms.empty())
    throw std::invalid_argument("cdg_operator: no coefficient term in "
                                "direction " +
                                std::to_string(dir));

  std::mt19937 rng(12345 + dir);
  std::uniform_int_distribution<int> pick(0, grid.size() - 1);
  int sgn = 0;
  int const samples = 4096;
  for (int s = 0; s < samples; ++s)
  {
    std::array<double, max_dim> x{};
    for (int i = 0; i < sys.d; ++i)
      x[i] = grid.points[pick(rng)];
    double val = 0.0;
    for (auto const *tm : terms)
    {
      double v = tm->coupling(0, 0) *
                 (tm->time_factor ? tm->time_factor(0.0) : 1.0);
      for (int i = 0; i < sys.d; ++i)
        if (tm->factor[i])
          v *= tm->factor[i](x[i]);
      val += v;
    }
    int const here = (val > 0.0) - (val < 0.0);
    if (here == 0)
      continue;
    if (sgn == 0)
      sgn = here;
    else if (sgn != here)
      throw std::invalid_argument("cdg_operator: coefficient sign indefinite "
                                  "in direction " +
                                  std::to_string(dir));
  }
  if (sgn == 0)
    throw std::invalid_argument("cdg_operator: coefficient vanishes in "
                                "direction " +
                                std::to_string(dir));
  return sgn;
}

// per-dimension matrices for one term, already transposed to the
// trial-rows-by-test-columns orientation of the fast transform
inline std::array<Eigen::MatrixXd, max_dim>
term_matrices(coeff_term const &tm, int d, basis_table const &test,
              basis_table const &trial)
{
  std::array<Eigen::MatrixXd, max_dim> t{};
  for (int i = 0; i < d; ++i)
  {
    auto const w = as_weight(tm.factor[i]);
    if (i == tm.direction)
    {
      coupling_kind const sk =
          w ? coupling_kind::weighted_stiffness : coupling_kind::stiffness;
      coupling_kind const fk =
          w ? coupling_kind::weighted_flux : coupling_kind::flux;
      t[i] = (assemble_coupling(sk, test, trial, w).entries -
              assemble_coupling(fk, test, trial, w).entries)
                 .transpose();
    }
    else
    {
      coupling_kind const mk =
          w ? coupling_kind::weighted_mass : coupling_kind::mass;
      t[i] = assemble_coupling(mk, test, trial, w).entries.transpose();
    }
  }
  return t;
}

// outflow face matrix for one term, own-mesh trial, with the flux sign
// (the face sum enters the right-hand side negated) already folded in
inline std::array<Eigen::MatrixXd, max_dim>
outflow_matrices(coeff_term const &tm, int d, basis_table const &table,
                 int end)
{
  std::array<Eigen::MatrixXd, max_dim> t{};
  for (int i = 0; i < d; ++i)
  {
    auto const w = as_weight(tm.factor[i]);
    if (i == tm.direction)
      t[i] = -boundary_flux_matrix(table, table, end, w).transpose();
    else
    {
      coupling_kind const mk =
          w ? coupling_kind::weighted_mass : coupling_kind::mass;
      t[i] = assemble_coupling(mk, table, table, w).entries.transpose();
    }
  }
  return t;
}
} // namespace detail

inline cdg_operator make_cdg_operator(hyperbolic_system const &sys, int N,
                                      int k, double tau_max = 0.0,
                                      truncation rule = truncation::sparse)
{
  if (sys.d < 2 || sys.d > max_dim)
    throw std::invalid_argument("make_cdg_operator: dimension out of range");
  if (sys.m < 1)
    throw std::invalid_argument("make_cdg_operator: need at least one "
                                "component");
  for (auto const &tm : sys.terms)
    if (tm.coupling.rows() != sys.m || tm.coupling.cols() != sys.m ||
        tm.direction < 0 || tm.direction >= sys.d)
      throw std::invalid_argument("make_cdg_operator: malformed term");

  cdg_operator op;
  op.sys = sys;
  op.tau_max = (tau_max > 0.0) ? tau_max : level_h(N) / (2 * k + 1);

  space1d const pu{mesh_role::primal, sys.boundary, N, k};
  space1d const pv{mesh_role::dual, sys.boundary, N, k};
  op.sp_u = enumerate(sys.d, pu, rule);
  op.sp_v = enumerate(sys.d, pv, rule);
  op.table_u = make_basis_table(pu, k + 2);
  op.table_v = make_basis_table(pv, k + 2);

  if (pv.boundary == boundary_type::nonperiodic)
  {
    Eigen::MatrixXd const gram =
        assemble_coupling(coupling_kind::mass, op.table_v, op.table_v).entries;
    op.msolve_v = make_mass_solver(op.sp_v.layout, gram);
  }
  else
    op.msolve_v.trivial = true;

  std::array<space1d, max_dim> test_u{}, test_v{};
  for (int i = 0; i < sys.d; ++i)
  {
    test_u[i] = pu;
    test_v[i] = pv;
  }

  {
    std::array<Eigen::MatrixXd, max_dim> tu{}, tv{};
    Eigen::MatrixXd const m_uv =
        assemble_coupling(coupling_kind::mass, op.table_u, op.table_v).entries;
    for (int i = 0; i < sys.d; ++i)
    {
      tu[i] = m_uv.transpose();
      tv[i] = m_uv; // transpose of the dual-test, primal-trial coupling
    }
    op.cross_uv = make_tensor_op(op.sp_v.layout, tu, test_u);
    op.cross_vu = make_tensor_op(op.sp_u.layout, tv, test_v);
  }

  for (auto const &tm : sys.terms)
  {
    term_op t;
    t.coupling = tm.coupling;
    t.time_factor = tm.time_factor;
    t.op = make_tensor_op(
        op.sp_v.layout, detail::term_matrices(tm, sys.d, op.table_u, op.table_v),
        test_u);
    op.vol_u.push_back(t);
    t.op = make_tensor_op(
        op.sp_u.layout, detail::term_matrices(tm, sys.d, op.table_v, op.table_u),
        test_v);
    op.vol_v.push_back(std::move(t));
  }

  if (sys.boundary == boundary_type::nonperiodic)
  {
    for (int i = 0; i < sys.d; ++i)
      op.sign[i] = sys.flow_sign[i] != 0
                       ? sys.flow_sign[i]
                       : detail::infer_flow_sign(sys, i, op.table_u.grid);
    for (auto const &tm : sys.terms)
    {
      int const in_end = op.sign[tm.direction] > 0 ? 0 : 1;
      int const out_end = 1 - in_end;

      term_op bt;
      bt.coupling = tm.coupling;
      bt.time_factor = tm.time_factor;
      bt.op = make_tensor_op(
          op.sp_u.layout,
          detail::outflow_matrices(tm, sys.d, op.table_u, out_end), test_u);
      op.bdry_u.push_back(bt);
      bt.op = make_tensor_op(
          op.sp_v.layout,
          detail::outflow_matrices(tm, sys.d, op.table_v, out_end), test_v);
      op.bdry_v.push_back(std::move(bt));

      if (!sys.inflow[tm.direction].g)
        throw std::invalid_argument("make_cdg_operator: missing inflow data "
                                    "in direction " +
                                    std::to_string(tm.direction));
      inflow_source su;
      su.direction = tm.direction;
      su.coupling = tm.coupling;
      su.time_factor = tm.time_factor;
      su.factor = tm.factor;
      auto const w = detail::as_weight(tm.factor[tm.direction]);
      su.trace = -boundary_trace_vector(op.table_u, in_end, w);
      op.inflow_u.push_back(su);
      su.trace = -boundary_trace_vector(op.table_v, in_end, w);
      op.inflow_v.push_back(std::move(su));
    }
  }
  return op;
}

// zero state on the operator's spaces at time t
inline solution_state make_state(cdg_operator const &op, double t = 0.0)
{
  solution_state s;
  s.t = t;
  s.u.assign(op.sys.m, Eigen::VectorXd::Zero(op.sp_u.dofs()));
  s.v.assign(op.sys.m, Eigen::VectorXd::Zero(op.sp_v.dofs()));
  return s;
}

} // namespace sgcdg
