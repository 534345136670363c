#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <vector>

namespace sgcdg
{
// which one-sided limit to take when evaluating at a breakpoint
enum class side
{
  left,
  right
};

namespace legendre
{
// Legendre polynomials P_0..P_k at xi in [-1,1]
inline void values(double xi, int k, double *out)
{
  out[0] = 1.0;
  if (k >= 1)
    out[1] = xi;
  for (int p = 2; p <= k; ++p)
    out[p] = ((2 * p - 1) * xi * out[p - 1] - (p - 1) * out[p - 2]) / p;
}

// derivatives P_0'..P_k' at xi
inline void derivatives(double xi, int k, double *out)
{
  std::vector<double> p(k + 1);
  values(xi, k, p.data());
  out[0] = 0.0;
  if (k >= 1)
    out[1] = 1.0;
  for (int q = 2; q <= k; ++q)
    out[q] = out[q - 2] + (2 * q - 1) * p[q - 1];
}
} // namespace legendre

// Evaluate the orthonormal Legendre basis of degree <= k on [a,b];
// the p-th function has unit L2 norm on [a,b] and degree exactly p.
inline void legendre_orthonormal_values(double x, int k, double a, double b,
                                        double *out)
{
  assert(b > a);
  double const xi = 2.0 * (x - a) / (b - a) - 1.0;
  legendre::values(xi, k, out);
  for (int p = 0; p <= k; ++p)
    out[p] *= std::sqrt((2 * p + 1) / (b - a));
}

inline void legendre_orthonormal_derivs(double x, int k, double a, double b,
                                        double *out)
{
  assert(b > a);
  double const xi = 2.0 * (x - a) / (b - a) - 1.0;
  legendre::derivatives(xi, k, out);
  for (int p = 0; p <= k; ++p)
    out[p] *= std::sqrt((2 * p + 1) / (b - a)) * 2.0 / (b - a);
}

// A piecewise polynomial on [0,1]: strictly increasing breakpoints with
// first = 0 and last = 1, and one coefficient row per interval in the
// orthonormal Legendre basis of that interval.
class piecewise_poly
{
public:
  piecewise_poly() = default;

  piecewise_poly(std::vector<double> breaks, Eigen::MatrixXd coeffs)
      : breaks_(std::move(breaks)), coeffs_(std::move(coeffs))
  {
    if (breaks_.size() < 2 || breaks_.front() != 0.0 || breaks_.back() != 1.0)
      throw std::invalid_argument("piecewise_poly: breakpoints must span [0,1]");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
      if (!(breaks_[i] > breaks_[i - 1]))
        throw std::invalid_argument("piecewise_poly: breakpoints not increasing");
    if (coeffs_.rows() != static_cast<Eigen::Index>(breaks_.size()) - 1)
      throw std::invalid_argument("piecewise_poly: one coefficient row per cell");
  }

  int degree() const { return static_cast<int>(coeffs_.cols()) - 1; }
  int num_pieces() const { return static_cast<int>(coeffs_.rows()); }
  std::vector<double> const &breakpoints() const { return breaks_; }
  Eigen::MatrixXd const &coefficients() const { return coeffs_; }

  // index of the interval containing x, honoring the one-sided limit
  int locate(double x, side s = side::right) const
  {
    assert(x >= 0.0 && x <= 1.0);
    if (x <= 0.0)
      return 0;
    if (x >= 1.0)
      return num_pieces() - 1;
    auto it = (s == side::right)
                  ? std::upper_bound(breaks_.begin(), breaks_.end(), x)
                  : std::lower_bound(breaks_.begin(), breaks_.end(), x);
    return static_cast<int>(it - breaks_.begin()) - 1;
  }

  double value(double x, side s = side::right) const
  {
    int const j = locate(x, s);
    int const k = degree();
    double vals[32];
    legendre_orthonormal_values(x, k, breaks_[j], breaks_[j + 1], vals);
    double acc = 0.0;
    for (int p = 0; p <= k; ++p)
      acc += coeffs_(j, p) * vals[p];
    return acc;
  }

  double derivative(double x, side s = side::right) const
  {
    int const j = locate(x, s);
    int const k = degree();
    double vals[32];
    legendre_orthonormal_derivs(x, k, breaks_[j], breaks_[j + 1], vals);
    double acc = 0.0;
    for (int p = 0; p <= k; ++p)
      acc += coeffs_(j, p) * vals[p];
    return acc;
  }

private:
  std::vector<double> breaks_;
  Eigen::MatrixXd coeffs_;
};

} // namespace sgcdg
