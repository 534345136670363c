#pragma once

#include "time_integration.hpp"

#include <complex>

namespace sgcdg
{
enum class scheme_kind
{
  dg,
  cdg,
  sparse_dg,
  sparse_cdg
};

inline bool is_cdg(scheme_kind s)
{
  return s == scheme_kind::cdg || s == scheme_kind::sparse_cdg;
}

inline bool is_sparse(scheme_kind s)
{
  return s == scheme_kind::sparse_dg || s == scheme_kind::sparse_cdg;
}

// Dense semi-discrete operator dX/dt = (l_adv + (1/tau_max) k_cpl) X. The
// advection and mesh-coupling parts are kept separate because the stability
// model ties tau_max to the time step: the amplification argument is
// dt * l_adv + k_cpl. For the DG schemes k_cpl is empty.
struct dense_operator
{
  Eigen::MatrixXd l_adv;
  Eigen::MatrixXd k_cpl;
};

namespace detail
{
// per-slot 1D entry indices of every degree of freedom
inline std::vector<std::array<int, max_dim>> slot_entries(sparse_space const &sp)
{
  std::vector<std::array<int, max_dim>> out(sp.dofs());
  for (auto const &blk : sp.layout.blocks)
    for (int a = 0; a < blk.size; ++a)
    {
      std::array<int, max_dim> e{};
      int rem = a;
      for (int i = sp.d - 1; i >= 0; --i)
      {
        e[i] = level_offset(sp.sp1, blk.lvl[i]) + rem % blk.esize[i];
        rem /= blk.esize[i];
      }
      out[blk.offset + a] = e;
    }
  return out;
}

// upwind flux matrix on the periodic primal mesh for positive speed:
// entry (s,t) = sum_faces jump_s(xe) * trial_t(xe^-), wrapping at x = 0
inline Eigen::MatrixXd upwind_flux_matrix(basis_table const &t)
{
  int const n = space_dim(t.space);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  for (double xe : interface_points(t.space))
  {
    double const xm = xe == 0.0 ? 1.0 : xe;
    Eigen::VectorXd jump(n), trace(n);
    for (int b = 0; b < n; ++b)
    {
      jump(b) = t.polys[b].value(xm, side::left) -
                t.polys[b].value(xe, side::right);
      trace(b) = t.polys[b].value(xm, side::left);
    }
    f.noalias() += jump * trace.transpose();
  }
  return f;
}

inline hyperbolic_system advection_system(int d,
                                          std::vector<double> const &speeds)
{
  hyperbolic_system sys;
  sys.d = d;
  sys.m = 1;
  for (int i = 0; i < d; ++i)
  {
    coeff_term t;
    t.direction = i;
    t.coupling = Eigen::MatrixXd::Constant(1, 1, speeds[i]);
    sys.terms.push_back(t);
  }
  return sys;
}

// probe the CDG rhs column by column at a fixed tau
inline Eigen::MatrixXd probe_cdg(cdg_operator const &op)
{
  int const nu = op.sp_u.dofs();
  int const nv = op.sp_v.dofs();
  Eigen::MatrixXd l(nu + nv, nu + nv);
  solution_state probe = make_state(op);
  for (int c = 0; c < nu + nv; ++c)
  {
    probe.u[0].setZero();
    probe.v[0].setZero();
    if (c < nu)
      probe.u[0](c) = 1.0;
    else
      probe.v[0](c - nu) = 1.0;
    solution_state const der = op.rhs(probe);
    l.col(c).head(nu) = der.u[0];
    l.col(c).tail(nv) = der.v[0];
  }
  return l;
}
} // namespace detail

inline dense_operator build_dense_operator(scheme_kind sk, int d, int N, int k,
                                           std::vector<double> const &speeds)
{
  if (static_cast<int>(speeds.size()) != d)
    throw std::invalid_argument("build_dense_operator: need one speed per "
                                "direction");
  truncation const rule = is_sparse(sk) ? truncation::sparse : truncation::full;
  space1d const sp{mesh_role::primal, boundary_type::periodic, N, k};
  long const dofs =
      dof_count(d, sp, rule) * (is_cdg(sk) ? 2 : 1);
  if (dofs > 20000)
    throw std::invalid_argument("build_dense_operator: " +
                                std::to_string(dofs) +
                                " degrees of freedom exceed the dense guard");

  dense_operator out;
  if (is_cdg(sk))
  {
    hyperbolic_system const sys = detail::advection_system(d, speeds);
    // L(tau) = l_adv + (1/tau) k_cpl: two probes separate the parts
    Eigen::MatrixXd const l1 =
        detail::probe_cdg(make_cdg_operator(sys, N, k, 1.0, rule));
    Eigen::MatrixXd const l2 =
        detail::probe_cdg(make_cdg_operator(sys, N, k, 0.5, rule));
    out.k_cpl = l2 - l1;
    out.l_adv = 2.0 * l1 - l2;
    return out;
  }

  // upwind DG on the primal mesh, assembled directly
  sparse_space const space = enumerate(d, sp, rule);
  basis_table const tbl = make_basis_table(sp, k + 2);
  Eigen::MatrixXd const k1 =
      assemble_coupling(coupling_kind::stiffness, tbl, tbl).entries -
      detail::upwind_flux_matrix(tbl);
  auto const entries = detail::slot_entries(space);
  int const n = space.dofs();
  out.l_adv = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < d; ++i)
      {
        if (speeds[i] == 0.0)
          continue;
        double v = speeds[i] * k1(entries[r][i], entries[c][i]);
        for (int j = 0; j < d && v != 0.0; ++j)
          if (j != i && entries[r][j] != entries[c][j])
            v = 0.0;
        out.l_adv(r, c) += v;
      }
  return out;
}

namespace detail
{
inline std::complex<double> rk_amp(std::complex<double> z, int nu)
{
  std::complex<double> acc(1.0, 0.0), term(1.0, 0.0);
  for (int j = 1; j <= nu; ++j)
  {
    term *= z / double(j);
    acc += term;
  }
  return acc;
}
} // namespace detail

// Largest CFL number c such that every eigenvalue of dt*l_adv + k_cpl stays
// inside the order-nu stability region, with dt = c / sum_i (speeds_i/h_N).
// Bisection to resolution 0.005, reported rounded to 0.01.
inline double max_cfl(dense_operator const &op, int nu, double h_N,
                      std::vector<double> const &speeds)
{
  auto stable = [&](double c) {
    double const dt = select_dt(speeds, h_N, c);
    Eigen::MatrixXd m = dt * op.l_adv;
    if (op.k_cpl.size() > 0)
      m += op.k_cpl;
    Eigen::EigenSolver<Eigen::MatrixXd> eig(m, false);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("max_cfl: eigenvalue solver failed");
    for (auto const &lam : eig.eigenvalues())
      if (std::abs(detail::rk_amp(lam, nu)) > 1.0 + 1.0e-10)
        return false;
    return true;
  };

  double lo = 0.0, hi = 0.02;
  while (hi < 8.0 && stable(hi))
  {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 0.005)
  {
    double const mid = 0.5 * (lo + hi);
    (stable(mid) ? lo : hi) = mid;
  }
  return std::round(lo * 100.0) / 100.0;
}

} // namespace sgcdg
