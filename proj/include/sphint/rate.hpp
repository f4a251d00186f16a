#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "measure.hpp"
#include "quadrature.hpp"

namespace sphint {

// Finite-support argument theta_bar = (theta_1, ..., theta_k) together with
// its sign split: m counts the nonpositive entries and sigma is the stable
// permutation sorting the values ascending, so that
// theta_{sigma(1)} <= ... <= theta_{sigma(m)} <= 0 <= ... <= theta_{sigma(k)}.
class ThetaVector {
 public:
  explicit ThetaVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw SizeError("theta vector must be nonempty");
    for (double t : values_)
      if (!std::isfinite(t)) throw DomainError("theta entries must be finite");
    sigma_.resize(values_.size());
    std::iota(sigma_.begin(), sigma_.end(), std::size_t{0});
    std::stable_sort(sigma_.begin(), sigma_.end(),
                     [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
    m_ = static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double t) { return t <= 0.0; }));
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t k() const { return values_.size(); }
  std::size_t m() const { return m_; }
  const std::vector<std::size_t>& sigma() const { return sigma_; }
  double sorted(std::size_t i) const { return values_[sigma_[i]]; }

 private:
  std::vector<double> values_;
  std::vector<std::size_t> sigma_;
  std::size_t m_ = 0;
};

// Limit outlier locations: lower (below the bulk, paired with nonpositive
// thetas) and upper (above the bulk), each list ascending and positive. Edge
// constraints against a concrete measure are enforced where the pairing with
// a ThetaVector happens.
struct OutlierSet {
  std::vector<double> lower;
  std::vector<double> upper;

  OutlierSet(std::vector<double> lo, std::vector<double> up)
      : lower(std::move(lo)), upper(std::move(up)) {
    auto check = [](const std::vector<double>& v, const char* side) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i]))
          throw DomainError(std::string(side) + " outliers must be positive and finite");
        if (i + 1 < v.size() && v[i] > v[i + 1])
          throw DomainError(std::string(side) + " outliers must be ascending");
      }
    };
    check(lower, "lower");
    check(upper, "upper");
  }

  std::size_t size() const { return lower.size() + upper.size(); }
  // Concatenated list lambda_1 <= ... <= lambda_m, lambda_{m+1} <= ... <= lambda_k.
  double at(std::size_t i) const {
    return i < lower.size() ? lower[i] : upper[i - lower.size()];
  }
};

enum class Regime { StuckToEdge, STransform };

inline const char* regime_name(Regime r) {
  return r == Regime::StuckToEdge ? "STUCK_TO_EDGE" : "S_TRANSFORM";
}

// One (theta, lambda) component of the rate function.
struct RateComponent {
  double theta = 0.0;
  double lambda = 0.0;
  double c = 0.0;
  double d = 0.0;  // critical point (theta+1) c / theta
  Regime regime = Regime::STransform;
  double j_value = 0.0;
};

struct RateResult {
  double total = 0.0;
  std::vector<RateComponent> components;
};

namespace detail {

inline void check_rate_domain(double theta, double lambda, const DiscreteMeasure& mu) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const bool up_ok = theta >= 0.0 && lambda >= mu.support_max();
  const bool low_ok = theta <= 0.0 && lambda <= mu.support_min();
  if (!up_ok && !low_ok)
    throw DomainError("(theta, lambda) outside the rate function domain");
}

// True when theta lies between 0 and T_mu(lambda) inclusive; an infinite
// T value at a support edge always selects the S-transform regime.
inline bool in_s_regime(double theta, double lambda, const DiscreteMeasure& mu) {
  const TransformValue t = t_transform(mu, lambda);
  if (t.is_infinite) return true;
  if (theta >= 0.0) return theta <= t.value;
  return theta >= t.value;
}

}  // namespace detail

// Rate function J(theta, lambda, mu) for a single component. Regime dichotomy:
// if theta lies beyond T_mu(lambda) the outlier sticks to the edge and
// c = theta lambda / (theta + 1); otherwise c = S~_mu(theta). Then
// J = (theta+1) log c - log|theta| - int log|d - x| dmu(x) with d = (theta+1)c/theta.
inline RateComponent rate_single(double theta, double lambda, const DiscreteMeasure& mu) {
  detail::check_rate_domain(theta, lambda, mu);
  RateComponent out;
  out.theta = theta;
  out.lambda = lambda;
  if (theta == 0.0) {
    out.c = mu.mean();
    out.d = std::numeric_limits<double>::infinity();
    out.regime = Regime::STransform;
    out.j_value = 0.0;
    return out;
  }
  if (theta == -1.0) {
    out.c = mu.harmonic_mean();
    out.d = 0.0;
    out.regime = Regime::STransform;
    out.j_value = -mu.log_moment();
    return out;
  }
  const bool s_regime = detail::in_s_regime(theta, lambda, mu);
  out.regime = s_regime ? Regime::STransform : Regime::StuckToEdge;
  out.c = s_regime ? s_tilde(mu, theta) : theta * lambda / (theta + 1.0);
  out.d = (theta + 1.0) * out.c / theta;
  out.j_value = (theta + 1.0) * std::log(out.c) - std::log(std::abs(theta)) -
                log_potential(mu, out.d);
  return out;
}

// Integral form J(theta, lambda, mu) = int_0^theta log S~_mu(t) dt, valid in
// the S-transform regime only. Gauss-Legendre on [0, theta]; the affine map
// keeps the signed orientation for negative theta.
inline double rate_integral_form(double theta, double lambda, const DiscreteMeasure& mu,
                                 std::size_t n_points = 64) {
  detail::check_rate_domain(theta, lambda, mu);
  if (theta == 0.0) return 0.0;
  if (!detail::in_s_regime(theta, lambda, mu))
    throw DomainError("integral form requires theta in the S-transform regime");
  auto [x, w] = gauss_legendre_on(n_points, 0.0, theta);
  double s = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) s += w[i] * std::log(s_tilde(mu, x[i]));
  return s;
}

// Multi-component rate: pairs the ascending-sorted thetas with the
// concatenated outlier list (lower then upper) and sums the per-pair J.
// No beta/2 prefactor; callers apply it when comparing to Monte Carlo.
inline RateResult rate_multi(const ThetaVector& thetas, const OutlierSet& outliers,
                             const DiscreteMeasure& mu) {
  if (outliers.size() != thetas.k())
    throw SizeError("outlier count must match theta count");
  if (outliers.lower.size() != thetas.m())
    throw SizeError("lower outlier count must match the nonpositive theta count");
  const double l = mu.support_min(), r = mu.support_max();
  for (double lam : outliers.lower)
    if (lam > l) throw DomainError("lower outliers must sit at or below the support");
  for (double lam : outliers.upper)
    if (lam < r) throw DomainError("upper outliers must sit at or above the support");
  RateResult out;
  for (std::size_t i = 0; i < thetas.k(); ++i) {
    out.components.push_back(rate_single(thetas.sorted(i), outliers.at(i), mu));
    out.total += out.components.back().j_value;
  }
  return out;
}

// Lipschitz moduli on the theta >= 0 domain:
//   |J(theta, lambda) - J(theta, lambda2)| <= theta |log lambda - log lambda2|
//   |J(theta, lambda) - J(theta2, lambda)| <= log(lambda) |theta - theta2|
// The second requires lambda >= 1 to be a valid upper bound.
inline std::pair<double, double> continuity_bounds(double theta, double theta2,
                                                   double lambda, double lambda2,
                                                   const DiscreteMeasure& mu) {
  const double r = mu.support_max();
  if (theta < 0.0 || theta2 < 0.0)
    throw DomainError("continuity bounds require nonnegative thetas");
  if (lambda < r || lambda2 < r || lambda < 1.0 || lambda2 < 1.0)
    throw DomainError("continuity bounds require lambdas >= max(1, r(mu))");
  const double bound_lambda = theta * std::abs(std::log(lambda) - std::log(lambda2));
  const double bound_theta = std::log(lambda) * std::abs(theta - theta2);
  return {bound_lambda, bound_theta};
}

}  // namespace sphint
