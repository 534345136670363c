#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sgcdg
{
// Gauss-Legendre rule on a reference interval. A rule with n points
// integrates polynomials of degree 2n-1 exactly.
struct quadrature
{
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

// n-point Gauss-Legendre rule on [-1,1]. Nodes are roots of the Legendre
// polynomial P_n, found by Newton iteration from the Chebyshev guess.
inline quadrature gauss_rule(int n)
{
  if (n < 1)
    throw std::invalid_argument("gauss_rule: need at least one point");

  quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);

  for (int i = 0; i < n; ++i)
  {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter)
    {
      // evaluate P_n and P_n' by the three-term recurrence
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j)
      {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? x : p1;
      if (n == 1)
        dp = 1.0;
      else
        dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15)
        break;
    }
    q.nodes[n - 1 - i] = x;
    q.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

// the same rule mapped onto [a,b]
inline quadrature gauss_rule(int n, double a, double b)
{
  assert(b > a);
  quadrature q = gauss_rule(n);
  double const mid = 0.5 * (a + b);
  double const half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i)
  {
    q.nodes[i] = mid + half * q.nodes[i];
    q.weights[i] *= half;
  }
  return q;
}

} // namespace sgcdg
