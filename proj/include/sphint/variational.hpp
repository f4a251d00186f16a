#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "measure.hpp"
#include "rate.hpp"

namespace sphint {

// Point of the probability simplex over the atom index set.
struct SimplexPoint {
  std::vector<double> gamma;

  explicit SimplexPoint(std::vector<double> g) : gamma(std::move(g)) {
    if (gamma.empty()) throw SizeError("simplex point must be nonempty");
    double sum = 0.0;
    for (double x : gamma) {
      if (!(x >= 0.0)) throw DomainError("simplex coordinates must be nonnegative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("simplex coordinates must sum to one");
  }

  std::size_t size() const { return gamma.size(); }
};

struct VariationalSolution {
  SimplexPoint gamma_star;
  double c = 0.0;
  double f_value = 0.0;
  Regime regime = Regime::STransform;
};

// Dirichlet large-deviation rate H(gamma) = -sum_i alpha_i log(gamma_i/alpha_i)
// over indices with alpha_i > 0; +infinity when gamma vanishes where alpha
// carries mass. No beta/2 prefactor.
inline double dirichlet_rate(const SimplexPoint& gamma, const std::vector<double>& alpha) {
  if (gamma.size() != alpha.size())
    throw SizeError("dirichlet_rate needs matching gamma and alpha lengths");
  double h = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] <= 0.0) continue;
    if (gamma.gamma[i] <= 0.0) return std::numeric_limits<double>::infinity();
    h -= alpha[i] * std::log(gamma.gamma[i] / alpha[i]);
  }
  return h;
}

// Rank-1 variational objective f_theta(gamma) = theta log(sum gamma_i mu_i) - H(gamma).
inline double objective_f(double theta, const SimplexPoint& gamma, const DiscreteMeasure& mu) {
  if (gamma.size() != mu.size())
    throw SizeError("objective_f needs gamma matching the atom count");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += gamma.gamma[i] * mu.atoms()[i];
  const double h = dirichlet_rate(gamma, mu.weights());
  if (std::isinf(h)) return -std::numeric_limits<double>::infinity();
  return theta * std::log(s) - h;
}

namespace detail {

// Indices entering the reduced rank-1 problem: atoms with positive weight plus
// the designated edge atom (largest for theta >= 0, smallest for theta < 0).
inline std::vector<std::size_t> reduced_indices(double theta, const DiscreteMeasure& mu) {
  const std::size_t edge = theta >= 0.0 ? mu.size() - 1 : 0;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weights()[i] > 0.0 || i == edge) idx.push_back(i);
  return idx;
}

}  // namespace detail

// Closed-form solution of sup_gamma f_theta(gamma) from the critical-point
// equations. The designated edge atom is the top atom for theta >= 0 and the
// bottom atom for theta < 0; top_weight_zero asserts that the top atom is a
// zero-weight outlier position. Regime dichotomy compares theta with
// T_mu(edge); gamma_bar_i = (c/theta) alpha_i / (d - mu_i) off the edge and
// the edge entry closes the simplex as 1 - sum.
inline VariationalSolution solve_rank1(double theta, const DiscreteMeasure& mu,
                                       bool top_weight_zero = false) {
  const std::size_t n = mu.size();
  if (top_weight_zero) {
    if (theta < 0.0)
      throw DomainError("sign mismatch between theta and the designated edge");
    if (mu.weights()[n - 1] > 0.0)
      throw DomainError("top_weight_zero set but the top atom carries mass");
  }
  if (theta == 0.0) {
    return {SimplexPoint(mu.weights()), mu.mean(), 0.0, Regime::STransform};
  }
  const std::size_t edge = theta > 0.0 ? n - 1 : 0;
  const double edge_atom = mu.atoms()[edge];
  const bool s_regime = detail::in_s_regime(theta, edge_atom, mu);
  const double c = s_regime ? s_tilde(mu, theta) : theta * edge_atom / (theta + 1.0);
  const double d = (theta + 1.0) * c / theta;
  std::vector<double> g(n, 0.0);
  double partial = 0.0;
  for (std::size_t i : detail::reduced_indices(theta, mu)) {
    if (i == edge) continue;
    g[i] = (c / theta) * mu.weights()[i] / (d - mu.atoms()[i]);
    partial += g[i];
  }
  double rest = 1.0 - partial;
  if (rest < 0.0 && rest > -1e-9) rest = 0.0;
  g[edge] = rest;
  VariationalSolution out{SimplexPoint(std::move(g)), c, 0.0,
                          s_regime ? Regime::STransform : Regime::StuckToEdge};
  out.f_value = objective_f(theta, out.gamma_star, mu);
  return out;
}

// Independent oracle for solve_rank1: exponentiated-gradient ascent on the
// simplex. Multiplicative update gamma_i <- gamma_i exp(step grad_i) with
// renormalization, step halved whenever the objective decreases, best iterate
// returned. Random Gamma(2,1) initialization controlled by seed.
inline VariationalSolution maximize_simplex(double theta, const DiscreteMeasure& mu,
                                            std::size_t iters = 10000, double step = 0.1,
                                            std::uint64_t seed = 1) {
  const std::vector<std::size_t> idx = detail::reduced_indices(theta, mu);
  const std::size_t nr = idx.size();
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gd(2.0, 1.0);
  std::vector<double> g(nr), grad(nr);
  double norm = 0.0;
  for (std::size_t j = 0; j < nr; ++j) {
    g[j] = gd(rng) + 1e-12;
    norm += g[j];
  }
  for (double& x : g) x /= norm;

  const auto expand = [&](const std::vector<double>& gr) {
    std::vector<double> full(mu.size(), 0.0);
    for (std::size_t j = 0; j < nr; ++j) full[idx[j]] = gr[j];
    return SimplexPoint(std::move(full));
  };
  const auto eval = [&](const std::vector<double>& gr) {
    return objective_f(theta, expand(gr), mu);
  };

  double f_prev = eval(g);
  double f_best = f_prev;
  std::vector<double> g_best = g;
  int decreases = 0;
  for (std::size_t it = 0; it < iters; ++it) {
    double s = 0.0;
    for (std::size_t j = 0; j < nr; ++j) s += g[j] * mu.atoms()[idx[j]];
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nr; ++j) {
      const double a = mu.weights()[idx[j]];
      const double gj = std::max(g[j], 1e-300);
      grad[j] = theta * mu.atoms()[idx[j]] / s + (a > 0.0 ? a / gj : 0.0);
      grad[j] = std::min(grad[j], 1e12);
      gmax = std::max(gmax, grad[j]);
    }
    norm = 0.0;
    for (std::size_t j = 0; j < nr; ++j) {
      g[j] *= std::exp(step * (grad[j] - gmax));
      norm += g[j];
    }
    for (double& x : g) x /= norm;
    // Keep a small floor under atoms that carry weight so the log terms
    // cannot underflow to -inf mid-iteration.
    bool floored = false;
    for (std::size_t j = 0; j < nr; ++j)
      if (mu.weights()[idx[j]] > 0.0 && g[j] < 1e-12) {
        g[j] = 1e-12;
        floored = true;
      }
    if (floored) {
      norm = 0.0;
      for (double x : g) norm += x;
      for (double& x : g) x /= norm;
    }
    const double f = eval(g);
    if (f < f_prev) {
      step *= 0.5;
      if (++decreases >= 50)
        throw ConvergenceError("simplex ascent decreased for 50 consecutive steps");
    } else {
      decreases = 0;
    }
    if (f > f_best) {
      f_best = f;
      g_best = g;
    }
    f_prev = f;
  }
  SimplexPoint best = expand(g_best);
  double c = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) c += best.gamma[i] * mu.atoms()[i];
  Regime regime = Regime::STransform;
  if (theta != 0.0) {
    const std::size_t edge = theta > 0.0 ? mu.size() - 1 : 0;
    regime = detail::in_s_regime(theta, mu.atoms()[edge], mu) ? Regime::STransform
                                                              : Regime::StuckToEdge;
  }
  return {std::move(best), c, f_best, regime};
}

// The m smallest and k-m-1 largest roots of the secular equation
// sum_i gamma_i mu_i / (z - mu_i) = 0, one root per bracketing atom gap,
// located by safeguarded bisection on the rational form (never via polynomial
// coefficients). Requires every gamma_i > 0 for the bracket signs to hold.
inline std::vector<double> secular_roots(const SimplexPoint& gamma, const DiscreteMeasure& mu,
                                         std::size_t m, std::size_t k) {
  const std::size_t n = mu.size();
  if (gamma.size() != n) throw SizeError("secular_roots needs gamma matching the atom count");
  if (k < m + 1) throw SizeError("secular_roots needs k >= m + 1");
  if (k - 1 > n - 1) throw SizeError("secular_roots needs k - 1 <= atom gaps");
  for (double x : gamma.gamma)
    if (!(x > 0.0))
      throw ConvergenceError("secular bracket degenerate: gamma has a zero entry");

  const auto geval = [&](double z) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += gamma.gamma[i] * mu.atoms()[i] / (z - mu.atoms()[i]);
    return s;
  };
  const auto solve_gap = [&](std::size_t j) {
    double lo = mu.atoms()[j], hi = mu.atoms()[j + 1];
    const double width = hi - lo;
    double eps = 1e-12 * width;
    double a = lo + eps, b = hi - eps;
    int guard = 0;
    while (!(geval(a) > 0.0 && geval(b) < 0.0)) {
      eps *= 0.5;
      a = lo + eps;
      b = hi - eps;
      if (++guard > 40)
        throw ConvergenceError("secular bracket sign condition failed");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      (geval(mid) > 0.0 ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };

  std::vector<double> chis;
  for (std::size_t j = 0; j < m; ++j) chis.push_back(solve_gap(j));
  for (std::size_t j = n - 1 - (k - m - 1); j < n - 1; ++j) chis.push_back(solve_gap(j));
  return chis;
}

struct ChangeOfVariablesResult {
  std::vector<double> gamma_bar;  // reduced index set: bulk atoms then first upper outlier
  double b = 1.0;
};

// Decoupling change of variables: with atoms ordered as m lower outliers, the
// l+1 bulk atoms, then k-m upper outliers, and chis the secular roots from
// secular_roots, maps gamma on all atoms to gamma_bar on the reduced set
// (bulk plus the first upper outlier) via
//   gamma_bar_i = prod_j chi_j (a_j - mu_i) / (a_j (chi_j - mu_i)) gamma_i,
// where a_j runs over the lower outliers and the upper outliers from the
// second one up. Validates sum gamma_bar = 1 and
// sum mu gamma_bar = b sum mu gamma with b = prod chi_j / a_j.
inline ChangeOfVariablesResult change_of_variables(const SimplexPoint& gamma,
                                                   const std::vector<double>& chis,
                                                   const DiscreteMeasure& mu, std::size_t m,
                                                   std::size_t k) {
  const std::size_t n = mu.size();
  if (gamma.size() != n) throw SizeError("change_of_variables needs gamma matching atoms");
  if (k < m + 1 || n < k + 1) throw SizeError("change_of_variables index split invalid");
  if (chis.size() != k - 1) throw SizeError("change_of_variables needs k - 1 roots");
  const std::size_t l = n - k - 1;  // bulk atoms are indices m .. m + l

  // Paired atom for each chi: lower outlier j for the lower roots, upper
  // outlier l + j + 1 (second upper onward) for the upper roots.
  std::vector<std::size_t> paired(chis.size());
  for (std::size_t j = 0; j < m; ++j) paired[j] = j;
  for (std::size_t j = 0; j + m < chis.size(); ++j) paired[m + j] = m + l + 2 + j;

  ChangeOfVariablesResult out;
  for (std::size_t j = 0; j < chis.size(); ++j)
    out.b *= chis[j] / mu.atoms()[paired[j]];

  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = m; i <= m + l + 1; ++i) {
    double factor = 1.0;
    for (std::size_t j = 0; j < chis.size(); ++j) {
      const double aj = mu.atoms()[paired[j]];
      factor *= chis[j] * (aj - mu.atoms()[i]) / (aj * (chis[j] - mu.atoms()[i]));
    }
    const double gb = factor * gamma.gamma[i];
    out.gamma_bar.push_back(gb);
    s1 += gb;
    s2 += mu.atoms()[i] * gb;
  }
  double full = 0.0;
  for (std::size_t i = 0; i < n; ++i) full += mu.atoms()[i] * gamma.gamma[i];
  if (std::abs(s1 - 1.0) > 1e-8)
    throw IdentityError("change of variables mass identity failed");
  if (std::abs(s2 - out.b * full) > 1e-8 * std::max(1.0, std::abs(out.b * full)))
    throw IdentityError("change of variables mean identity failed");
  return out;
}

}  // namespace sphint
