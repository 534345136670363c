#pragma once

#include "quadrature.hpp"
#include "piecewise_poly.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgcdg
{
enum class mesh_role
{
  primal,
  dual
};

enum class boundary_type
{
  periodic,
  nonperiodic
};

// One-dimensional hierarchical space descriptor on [0,1].
struct space1d
{
  mesh_role role = mesh_role::primal;
  boundary_type boundary = boundary_type::periodic;
  int N = 1; // finest level
  int k = 1; // polynomial degree

  bool operator==(space1d const &) const = default;
};

inline double level_h(int l) { return std::ldexp(1.0, -l); } // 2^{-l}

// label of a hierarchical basis function: level, translation, degree
struct index1d
{
  int l = 0;
  int j = 0;
  int p = 0;
};

// dimension of the level-l increment space
inline int level_dim(space1d const &s, int l)
{
  if (l < 0 || l > s.N)
    throw std::out_of_range("level_dim: level " + std::to_string(l) +
                            " outside [0," + std::to_string(s.N) + "]");
  int const kp1 = s.k + 1;
  if (l == 0)
    return (s.role == mesh_role::dual && s.boundary == boundary_type::nonperiodic)
               ? 2 * kp1
               : kp1;
  return (1 << (l - 1)) * kp1;
}

inline int level_offset(space1d const &s, int l)
{
  int off = 0;
  for (int m = 0; m < l; ++m)
    off += level_dim(s, m);
  return off;
}

inline int space_dim(space1d const &s)
{
  return level_offset(s, s.N) + level_dim(s, s.N);
}

// number of translations at level l (each carrying k+1 degrees)
inline int num_cells_in_level(space1d const &s, int l)
{
  return level_dim(s, l) / (s.k + 1);
}

inline void check_index(space1d const &s, index1d idx)
{
  auto fail = [&](std::string const &what) {
    std::ostringstream os;
    os << "invalid basis index (l=" << idx.l << ", j=" << idx.j
       << ", p=" << idx.p << "): " << what;
    throw std::out_of_range(os.str());
  };
  if (idx.l < 0 || idx.l > s.N)
    fail("level outside [0," + std::to_string(s.N) + "]");
  if (idx.p < 0 || idx.p > s.k)
    fail("degree outside [0," + std::to_string(s.k) + "]");
  int const jmax = num_cells_in_level(s, idx.l);
  if (idx.j < 0 || idx.j >= jmax)
    fail("translation outside [0," + std::to_string(jmax) + ")");
}

// flat position of (l,j,p) within the hierarchical numbering of the space
inline int flat_index(space1d const &s, index1d idx)
{
  check_index(s, idx);
  return level_offset(s, idx.l) + idx.j * (s.k + 1) + idx.p;
}

inline index1d unflatten_index(space1d const &s, int flat)
{
  int l = 0;
  while (flat >= level_dim(s, l))
  {
    flat -= level_dim(s, l);
    ++l;
  }
  return {l, flat / (s.k + 1), flat % (s.k + 1)};
}

inline int level_of_flat(space1d const &s, int flat)
{
  return unflatten_index(s, flat).l;
}

namespace detail
{
// Coefficients (orthonormal Legendre basis of [ta,tb]) of the restriction to
// [ta,tb] of a polynomial given on the source interval [sa,sb] in the
// orthonormal Legendre basis there. Requires [ta,tb] inside [sa,sb].
inline Eigen::RowVectorXd restrict_poly(Eigen::RowVectorXd const &src,
                                        double sa, double sb, double ta,
                                        double tb)
{
  int const k = static_cast<int>(src.size()) - 1;
  quadrature const q = gauss_rule(k + 1, ta, tb);
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(k + 1);
  std::vector<double> tgt(k + 1), svals(k + 1);
  for (int g = 0; g < q.size(); ++g)
  {
    double const x = q.nodes[g];
    legendre_orthonormal_values(x, k, sa, sb, svals.data());
    double f = 0.0;
    for (int p = 0; p <= k; ++p)
      f += src(p) * svals[p];
    legendre_orthonormal_values(x, k, ta, tb, tgt.data());
    for (int p = 0; p <= k; ++p)
      out(p) += q.weights[g] * f * tgt[p];
  }
  return out;
}
} // namespace detail

// The k+1 orthonormal Legendre polynomials on a cell inside [0,1], returned
// as piecewise polynomials on [0,1] vanishing outside the cell. The p-th has
// degree exactly p and unit L2 norm.
inline std::vector<piecewise_poly> legendre_orthonormal(int k, double a,
                                                        double b)
{
  if (k < 0)
    throw std::invalid_argument("legendre_orthonormal: negative degree");
  if (!(b > a))
    throw std::invalid_argument("legendre_orthonormal: degenerate cell");

  std::vector<double> breaks;
  std::vector<int> live; // index of the cell piece
  breaks.push_back(0.0);
  if (a > 0.0)
    breaks.push_back(a);
  int const cell_piece = static_cast<int>(breaks.size()) - 1;
  if (b < 1.0)
    breaks.push_back(b);
  breaks.push_back(1.0);

  std::vector<piecewise_poly> out;
  out.reserve(k + 1);
  for (int p = 0; p <= k; ++p)
  {
    Eigen::MatrixXd coeffs =
        Eigen::MatrixXd::Zero(static_cast<int>(breaks.size()) - 1, k + 1);
    coeffs(cell_piece, p) = 1.0;
    out.emplace_back(breaks, coeffs);
  }
  return out;
}

// Alpert multiwavelets of degree k on [0,1]: k+1 orthonormal functions,
// piecewise polynomial on [0,1/2] and [1/2,1], orthogonal to all
// polynomials of degree <= k. The p-th has vanishing moments through
// degree k+p; signs fixed so the leading coefficient on [0,1/2] is
// positive (this makes the k=0 member the Haar function +1/-1).
inline std::vector<piecewise_poly> alpert_mother(int k)
{
  if (k < 0)
    throw std::invalid_argument("alpert_mother: negative degree");

  int const nb = 2 * (k + 1); // dimension of the two-half Legendre basis

  // moments M(q, b) = \int_0^1 x^q phi_b dx for q = 0..2k+1, where phi_b are
  // the orthonormal Legendre functions on [0,1/2] then [1/2,1]
  Eigen::MatrixXd moments(nb, nb);
  for (int half = 0; half < 2; ++half)
  {
    double const a = half * 0.5, b = a + 0.5;
    quadrature const q = gauss_rule(2 * k + 2, a, b);
    std::vector<double> vals(k + 1);
    for (int p = 0; p <= k; ++p)
    {
      for (int mom = 0; mom < nb; ++mom)
      {
        double acc = 0.0;
        for (int g = 0; g < q.size(); ++g)
        {
          legendre_orthonormal_values(q.nodes[g], k, a, b, vals.data());
          acc += q.weights[g] * std::pow(q.nodes[g], mom) * vals[p];
        }
        moments(mom, half * (k + 1) + p) = acc;
      }
    }
  }

  // solve for the wavelet coefficient vectors, highest moment count first
  std::vector<Eigen::VectorXd> w(k + 1);
  for (int p = k; p >= 0; --p)
  {
    int const nmom = k + p + 1;
    Eigen::MatrixXd constraints(nmom + (k - p), nb);
    constraints.topRows(nmom) = moments.topRows(nmom);
    for (int r = p + 1; r <= k; ++r)
      constraints.row(nmom + (r - p - 1)) = w[r].transpose();

    Eigen::FullPivLU<Eigen::MatrixXd> lu(constraints);
    lu.setThreshold(1e-10);
    Eigen::MatrixXd kern = lu.kernel();
    if (kern.cols() != 1)
      throw std::runtime_error("alpert_mother: unexpected kernel dimension");
    Eigen::VectorXd v = kern.col(0);

    // re-orthogonalization pass against the already constructed wavelets
    for (int r = p + 1; r <= k; ++r)
      v -= w[r].dot(v) * w[r];
    v.normalize();
    w[p] = v;
  }

  // sign convention: leading nonzero coefficient on the left half positive
  for (int p = 0; p <= k; ++p)
  {
    double lead = 0.0;
    for (int c = k; c >= 0 && std::abs(lead) < 1e-12; --c)
      lead = w[p](c);
    for (int c = k; c >= 0 && std::abs(lead) < 1e-12; --c)
      lead = w[p](k + 1 + c);
    if (lead < 0.0)
      w[p] = -w[p];
  }

  std::vector<double> const breaks = {0.0, 0.5, 1.0};
  std::vector<piecewise_poly> out;
  out.reserve(k + 1);
  for (int p = 0; p <= k; ++p)
  {
    Eigen::MatrixXd coeffs(2, k + 1);
    coeffs.row(0) = w[p].head(k + 1).transpose();
    coeffs.row(1) = w[p].tail(k + 1).transpose();
    out.emplace_back(breaks, coeffs);
  }
  return out;
}

namespace detail
{
// memoized Alpert mothers per degree
inline std::vector<piecewise_poly> const &alpert_cache(int k)
{
  static std::vector<std::vector<piecewise_poly>> cache;
  if (static_cast<int>(cache.size()) <= k)
    cache.resize(k + 1);
  if (cache[k].empty())
    cache[k] = alpert_mother(k);
  return cache[k];
}

// Primal hierarchical basis function as a piecewise polynomial on [0,1].
inline piecewise_poly primal_basis_poly(space1d const &s, index1d idx)
{
  if (idx.l == 0)
    return legendre_orthonormal(s.k, 0.0, 1.0)[idx.p];

  // L2-scaled translate of the mother wavelet onto cell I_{l-1}^j;
  // orthonormal-Legendre coefficient rows are invariant under the scaling
  piecewise_poly const &mother = alpert_cache(s.k)[idx.p];
  double const h = level_h(idx.l - 1);
  double const a = idx.j * h;

  std::vector<double> breaks;
  std::vector<Eigen::RowVectorXd> rows;
  Eigen::RowVectorXd const zero = Eigen::RowVectorXd::Zero(s.k + 1);
  breaks.push_back(0.0);
  if (a > 0.0)
  {
    rows.push_back(zero);
    breaks.push_back(a);
  }
  rows.push_back(mother.coefficients().row(0));
  breaks.push_back(a + 0.5 * h);
  rows.push_back(mother.coefficients().row(1));
  breaks.push_back(a + h);
  if (a + h < 1.0)
  {
    rows.push_back(zero);
    breaks.push_back(1.0);
  }
  else
    breaks.back() = 1.0; // guard against roundoff at the right end

  Eigen::MatrixXd coeffs(static_cast<int>(rows.size()), s.k + 1);
  for (std::size_t r = 0; r < rows.size(); ++r)
    coeffs.row(static_cast<int>(r)) = rows[r];
  return piecewise_poly(std::move(breaks), std::move(coeffs));
}

// Shift a piecewise polynomial left by delta with periodic wrap on [0,1].
inline piecewise_poly shift_wrap(piecewise_poly const &src, double delta)
{
  int const k = src.degree();
  auto frac = [](double x) {
    double f = x - std::floor(x);
    return (f < 0.0 || f >= 1.0) ? 0.0 : f;
  };

  std::vector<double> breaks = {0.0, 1.0};
  for (double b : src.breakpoints())
  {
    double nb = frac(b - delta);
    if (nb > 1e-14 && nb < 1.0 - 1e-14)
      breaks.push_back(nb);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return b - a < 1e-14; }),
               breaks.end());

  int const np = static_cast<int>(breaks.size()) - 1;
  Eigen::MatrixXd coeffs(np, k + 1);
  for (int piece = 0; piece < np; ++piece)
  {
    double const ta = breaks[piece], tb = breaks[piece + 1];
    double const mid = frac(0.5 * (ta + tb) + delta);
    int const sp = src.locate(mid);
    auto const &sb = src.breakpoints();
    // source piece [sb[sp], sb[sp+1]] maps onto the target piece by the
    // same translation; re-expand in the target piece's Legendre basis
    double const wrap = (0.5 * (ta + tb) + delta) - mid; // 0 or 1
    coeffs.row(piece) =
        restrict_poly(src.coefficients().row(sp), sb[sp] - delta + wrap,
                      sb[sp + 1] - delta + wrap, ta, tb);
  }
  return piecewise_poly(std::move(breaks), std::move(coeffs));
}

// Dual-mesh basis function (shift by -h_N/2 of the primal hierarchy, with
// periodic wrap or truncation plus the boundary Legendre block).
inline piecewise_poly dual_basis_poly(space1d const &s, index1d idx)
{
  double const hs = 0.5 * level_h(s.N); // h_N / 2

  if (s.boundary == boundary_type::periodic)
  {
    space1d primal{mesh_role::primal, boundary_type::periodic, s.N, s.k};
    return shift_wrap(primal_basis_poly(primal, idx), hs);
  }

  // non-periodic: Type 2 boundary Legendre block at l = 0, j = 1
  if (idx.l == 0 && idx.j == 1)
    return legendre_orthonormal(s.k, 1.0 - hs, 1.0)[idx.p];

  // Type 1: shifted multiwavelet truncated to [0,1]
  if (idx.l == 0)
  {
    // Legendre on [-hs, 1-hs], truncated at the left end
    std::vector<double> breaks = {0.0, 1.0 - hs, 1.0};
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(2, s.k + 1);
    Eigen::RowVectorXd unit = Eigen::RowVectorXd::Zero(s.k + 1);
    unit(idx.p) = 1.0;
    coeffs.row(0) = restrict_poly(unit, -hs, 1.0 - hs, 0.0, 1.0 - hs);
    return piecewise_poly(std::move(breaks), std::move(coeffs));
  }

  piecewise_poly const &mother = alpert_cache(s.k)[idx.p];
  double const h = level_h(idx.l - 1);
  double const a = idx.j * h - hs; // left end of the shifted cell

  std::vector<double> breaks = {0.0};
  std::vector<Eigen::RowVectorXd> rows;
  Eigen::RowVectorXd const zero = Eigen::RowVectorXd::Zero(s.k + 1);
  if (idx.j > 0)
  {
    rows.push_back(zero);
    breaks.push_back(a);
    rows.push_back(mother.coefficients().row(0));
  }
  else
  {
    // leftmost cell: first half is cut at x = 0 and not renormalized
    rows.push_back(restrict_poly(mother.coefficients().row(0), a, a + 0.5 * h,
                                 0.0, a + 0.5 * h));
  }
  breaks.push_back(a + 0.5 * h);
  rows.push_back(mother.coefficients().row(1));
  breaks.push_back(a + h);
  rows.push_back(zero);
  breaks.push_back(1.0);

  Eigen::MatrixXd coeffs(static_cast<int>(rows.size()), s.k + 1);
  for (std::size_t r = 0; r < rows.size(); ++r)
    coeffs.row(static_cast<int>(r)) = rows[r];
  return piecewise_poly(std::move(breaks), std::move(coeffs));
}
} // namespace detail

// Hierarchical basis function of a 1D space as a piecewise polynomial.
inline piecewise_poly hier_basis_poly(space1d const &s, index1d idx)
{
  check_index(s, idx);
  return (s.role == mesh_role::primal) ? detail::primal_basis_poly(s, idx)
                                       : detail::dual_basis_poly(s, idx);
}

inline double eval_hier_basis(space1d const &s, index1d idx, double x,
                              side lim = side::right)
{
  return hier_basis_poly(s, idx).value(x, lim);
}

} // namespace sgcdg
