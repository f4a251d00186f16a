#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace sphint {

// Atomic probability measure on (0, infinity). Atoms are strictly increasing
// and positive; weights are nonnegative and sum to one. Atoms with zero weight
// are allowed as bookkeeping positions (outliers); they carry no mass and do
// not contribute to transforms or potentials.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (atoms_.empty() || atoms_.size() != weights_.size())
      throw SizeError("measure needs matching nonempty atom and weight lists");
    double sum = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!(atoms_[i] > 0.0) || !std::isfinite(atoms_[i]))
        throw DomainError("atoms must be positive and finite");
      if (i + 1 < atoms_.size() && !(atoms_[i] < atoms_[i + 1]))
        throw DomainError("atoms must be strictly increasing");
      if (!(weights_[i] >= 0.0)) throw DomainError("weights must be nonnegative");
      sum += weights_[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("weights must sum to one");
  }

  static DiscreteMeasure point_mass(double c) { return DiscreteMeasure({c}, {1.0}); }

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }

  // Smallest atom carrying positive mass, l(mu).
  double support_min() const {
    for (std::size_t i = 0; i < size(); ++i)
      if (weights_[i] > 0.0) return atoms_[i];
    throw DomainError("measure has no mass");
  }

  // Largest atom carrying positive mass, r(mu).
  double support_max() const {
    for (std::size_t i = size(); i-- > 0;)
      if (weights_[i] > 0.0) return atoms_[i];
    throw DomainError("measure has no mass");
  }

  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weights_[i] * atoms_[i];
    return s;
  }

  double harmonic_mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weights_[i] / atoms_[i];
    return 1.0 / s;
  }

  // int log x dmu(x).
  double log_moment() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      if (weights_[i] > 0.0) s += weights_[i] * std::log(atoms_[i]);
    return s;
  }

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

// Value of a transform at a point; edge atoms produce signed infinities,
// reported through is_infinite with the sign carried in value.
struct TransformValue {
  double value = 0.0;
  bool is_infinite = false;

  static TransformValue finite(double v) { return {v, false}; }
  static TransformValue infinite(int sign) {
    return {sign > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity(),
            true};
  }
};

namespace detail {

inline bool close_to(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// T_mu(z) = sum_i alpha_i mu_i / (z - mu_i), finite branch only.
inline double t_eval(const DiscreteMeasure& mu, double z) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double w = mu.weights()[i];
    if (w > 0.0) s += w * mu.atoms()[i] / (z - mu.atoms()[i]);
  }
  return s;
}

// d/dz T_mu(z) = -sum_i alpha_i mu_i / (z - mu_i)^2, strictly negative.
inline double t_deriv(const DiscreteMeasure& mu, double z) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double w = mu.weights()[i];
    if (w > 0.0) {
      const double d = z - mu.atoms()[i];
      s -= w * mu.atoms()[i] / (d * d);
    }
  }
  return s;
}

// Safeguarded Newton-bisection for T_mu(z) = theta on (lo, hi), where T is
// strictly decreasing with T(lo) > theta > T(hi).
inline double solve_t_on(const DiscreteMeasure& mu, double theta, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 220; ++it) {
    const double f = t_eval(mu, x) - theta;
    if (f == 0.0) return x;
    if (f > 0.0) lo = x; else hi = x;
    const double width = hi - lo;
    if (width <= 8.0 * std::numeric_limits<double>::epsilon() *
                     std::max({std::abs(lo), std::abs(hi), 1e-3}))
      break;
    double xn = x - f / t_deriv(mu, x);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  const double resid = std::abs(t_eval(mu, x) - theta);
  if (resid > 1e-12 * (1.0 + std::abs(theta)) && resid > 1e-9)
    throw ConvergenceError("t_inverse residual above tolerance");
  return x;
}

// Inverse of T_mu on the full monotone branches: z in (r, inf) for theta > 0
// and z in (-inf, l) for theta < 0, with T(0) = -1 splitting the negative
// branch between z in (0, l) for theta < -1 and z <= 0 for theta in [-1, 0).
inline double t_inverse_branch(const DiscreteMeasure& mu, double theta) {
  if (theta == 0.0) throw DomainError("t_inverse undefined at theta = 0");
  const double l = mu.support_min(), r = mu.support_max();
  if (theta > 0.0) {
    double off = 1e-12 * r;
    const double off_min = 8.0 * std::numeric_limits<double>::epsilon() * r;
    while (t_eval(mu, r + off) < theta && off > off_min) off *= 0.5;
    double lo = r + off;
    if (t_eval(mu, lo) < theta) return lo;  // theta pinned against the edge
    double span = std::max({r - l, r, 1.0});
    double hi = r + span;
    int guard = 0;
    while (t_eval(mu, hi) > theta) {
      span *= 2.0;
      hi = r + span;
      if (++guard > 300) throw ConvergenceError("t_inverse bracket expansion failed");
    }
    return solve_t_on(mu, theta, lo, hi);
  }
  if (theta == -1.0) return 0.0;
  if (theta < -1.0) {
    const double lo = 1e-12 * l;
    double off = 1e-12 * l;
    const double off_min = 8.0 * std::numeric_limits<double>::epsilon() * l;
    while (t_eval(mu, l - off) > theta && off > off_min) off *= 0.5;
    const double hi = l - off;
    if (t_eval(mu, hi) > theta) return hi;
    return solve_t_on(mu, theta, lo, hi);
  }
  // theta in (-1, 0): continuation of the same branch through z <= 0.
  double lo = -std::max(r, 1.0);
  int guard = 0;
  while (t_eval(mu, lo) <= theta) {
    lo *= 2.0;
    if (++guard > 300) throw ConvergenceError("t_inverse bracket expansion failed");
  }
  return solve_t_on(mu, theta, lo, 0.0);
}

}  // namespace detail

// Stieltjes transform G_mu(z) = sum_i alpha_i / (z - mu_i). The point z must
// lie outside the open support interval (l(mu), r(mu)); at a support edge the
// transform is a signed infinity.
inline TransformValue stieltjes(const DiscreteMeasure& mu, double z) {
  const double l = mu.support_min(), r = mu.support_max();
  if (detail::close_to(z, r)) return TransformValue::infinite(+1);
  if (detail::close_to(z, l)) return TransformValue::infinite(-1);
  if (z > l && z < r) throw DomainError("stieltjes point inside the support interval");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weights()[i] > 0.0) s += mu.weights()[i] / (z - mu.atoms()[i]);
  return TransformValue::finite(s);
}

// T-transform T_mu(z) = z G_mu(z) - 1. Inherits the edge infinities of G with
// the sign of z * G (atoms are positive, so z > 0 at either edge).
inline TransformValue t_transform(const DiscreteMeasure& mu, double z) {
  const TransformValue g = stieltjes(mu, z);
  if (g.is_infinite) return TransformValue::infinite(g.value > 0.0 ? +1 : -1);
  return TransformValue::finite(z * g.value - 1.0);
}

// Inverse T-transform restricted to z > 0: solves T_mu(z) = theta on
// (r(mu), inf) for theta > 0 and on (0, l(mu)) for theta < -1. Values of
// theta in [-1, 0) would need z <= 0 and are rejected with RangeError.
inline double t_inverse(const DiscreteMeasure& mu, double theta) {
  if (theta == 0.0) throw DomainError("t_inverse undefined at theta = 0");
  if (theta < 0.0 && theta >= -1.0) {
    const double z = detail::t_inverse_branch(mu, theta);
    throw RangeError("t_inverse branch for theta in [-1, 0) lies at z = " +
                     std::to_string(z) + " <= 0");
  }
  return detail::t_inverse_branch(mu, theta);
}

// Modified S-transform S~_mu(theta) = theta/(theta+1) * T_mu^{-1}(theta), with
// the continuous extensions S~(0) = mean and S~(-1) = harmonic mean. Strictly
// increasing on the attainable theta-range. Uses the full analytic branch of
// the inverse, so theta in (-1, 0) is supported.
inline double s_tilde(const DiscreteMeasure& mu, double theta) {
  if (theta == 0.0) return mu.mean();
  if (theta == -1.0) return mu.harmonic_mean();
  const double z = detail::t_inverse_branch(mu, theta);
  return theta / (theta + 1.0) * z;
}

// Logarithmic potential sum_i alpha_i log|d - mu_i| over atoms with positive
// weight. The point d must not coincide with any such atom.
inline double log_potential(const DiscreteMeasure& mu, double d) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double w = mu.weights()[i];
    if (w <= 0.0) continue;
    if (detail::close_to(d, mu.atoms()[i]))
      throw SingularError("log_potential point coincides with an atom");
    s += w * std::log(std::abs(d - mu.atoms()[i]));
  }
  return s;
}

// Pushforward of mu under x -> 1/x: atoms inverted and re-sorted ascending,
// weights carried along. An involution up to floating-point roundoff.
inline DiscreteMeasure pushforward_inverse(const DiscreteMeasure& mu) {
  const std::size_t n = mu.size();
  std::vector<double> atoms(n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    atoms[n - 1 - i] = 1.0 / mu.atoms()[i];
    weights[n - 1 - i] = mu.weights()[i];
  }
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

}  // namespace sphint
