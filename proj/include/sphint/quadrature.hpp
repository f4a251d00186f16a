#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace sphint {

// Gauss-Legendre nodes and weights on [-1, 1]. Nodes found by Newton iteration
// on P_n from the Chebyshev-like initial guess; accurate to machine precision
// for n up to several thousand.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
  if (n == 0) throw SizeError("gauss_legendre needs at least one node");
  std::vector<double> x(n), w(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Three-term recurrence for P_n(z) and P_{n-1}(z).
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 -
              static_cast<double>(j) * p2) /
             (static_cast<double>(j) + 1.0);
      }
      pp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  return {std::move(x), std::move(w)};
}

// Nodes and weights mapped affinely to [a, b].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_on(
    std::size_t n, double a, double b) {
  auto [x, w] = gauss_legendre(n);
  const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = mid + rad * x[i];
    w[i] *= rad;
  }
  return {std::move(x), std::move(w)};
}

}  // namespace sphint
