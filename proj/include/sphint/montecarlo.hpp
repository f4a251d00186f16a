#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "measure.hpp"
#include "quadrature.hpp"
#include "randmat.hpp"
#include "rate.hpp"
#include "variational.hpp"

namespace sphint {

// Monte Carlo estimate of (1/N) log I_N with batch-means error bars. ess and
// low_ess are meaningful for the importance-sampled estimator; plain
// estimators report ess = n_samples.
struct McEstimate {
  double log_mean_per_n = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_batches = 0;
  double ess = 0.0;
  bool low_ess = false;
};

struct ConvergenceRow {
  std::size_t N = 0;
  McEstimate estimate;
  double j_target = 0.0;  // (beta/2) x rate_multi total
  double gap = 0.0;       // estimate.log_mean_per_n - j_target
};

// splitmix64 finalizer: derives decorrelated per-batch streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

namespace detail {

inline std::vector<std::uint64_t> batch_seeds(std::uint64_t seed, std::size_t n_batches) {
  std::vector<std::uint64_t> seeds(n_batches);
  std::set<std::uint64_t> seen;
  for (std::size_t b = 0; b < n_batches; ++b) {
    seeds[b] = mix_seed(seed, b);
    if (!seen.insert(seeds[b]).second) throw SeedError("duplicate per-batch seed stream");
  }
  return seeds;
}

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Point estimate and batch-means standard error of (1/N) log I_N from
// per-batch log-means.
inline McEstimate aggregate_batches(const std::vector<double>& batch_log_means, std::size_t n,
                                    std::size_t n_samples) {
  const std::size_t nb = batch_log_means.size();
  double mean = 0.0;
  for (double x : batch_log_means) mean += x;
  mean /= static_cast<double>(nb);
  double var = 0.0;
  if (nb > 1) {
    for (double x : batch_log_means) var += (x - mean) * (x - mean);
    var /= static_cast<double>(nb - 1);
  }
  McEstimate out;
  out.log_mean_per_n = mean / static_cast<double>(n);
  out.std_error = std::sqrt(var / static_cast<double>(nb)) / static_cast<double>(n);
  out.n_samples = n_samples;
  out.n_batches = nb;
  out.ess = static_cast<double>(n_samples);
  return out;
}

}  // namespace detail

// Distinct eigenvalues of a built spectrum with multiplicities; outliers that
// coincide with a bulk atom merge into one group (Dirichlet aggregation).
inline std::pair<std::vector<double>, std::vector<std::size_t>> grouped_spectrum(
    const SpectrumSpec& spec) {
  const std::vector<double> eigs = build_spectrum(spec);
  std::vector<double> values;
  std::vector<std::size_t> counts;
  for (double e : eigs) {
    if (!values.empty() && e == values.back()) {
      ++counts.back();
    } else {
      values.push_back(e);
      counts.push_back(1);
    }
  }
  return {std::move(values), std::move(counts)};
}

// Estimate (1/N) log I_N(theta_bar, X_N) over Haar samples. Only the leading
// k x k compression W* X W of U* X U enters Delta_theta, so sampling the
// k-column frame W reproduces the full-matrix estimator exactly at O(N k^2)
// per sample. Aggregation: per-batch log-sum-exp means, averaged across
// batches, spread across batches for the standard error.
inline McEstimate estimate_In(const SpectrumSpec& spec, const ThetaVector& thetas,
                              std::size_t n_samples, std::size_t n_batches,
                              std::uint64_t seed) {
  const std::size_t n = spec.N, k = thetas.k();
  if (k > n) throw SizeError("theta length exceeds N");
  if (n_batches == 0 || n_samples == 0 || n_samples % n_batches != 0)
    throw SizeError("n_samples must be a positive multiple of n_batches");
  const std::vector<double> eigs = build_spectrum(spec);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) x[static_cast<Eigen::Index>(i)] = eigs[i];
  const double expo = 0.5 * beta_value(spec.beta) * static_cast<double>(n);
  const bool complex_field = spec.beta == Beta::Unitary;
  const std::size_t batch_size = n_samples / n_batches;
  const std::vector<std::uint64_t> seeds = detail::batch_seeds(seed, n_batches);

  std::vector<double> batch_means(n_batches);
  std::vector<double> w(batch_size);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    std::mt19937_64 rng(seeds[b]);
    for (std::size_t s = 0; s < batch_size; ++s) {
      double ld;
      if (k == 1) {
        // Rank-1 case: (W* X W)_{11} = sum x_i |g_i|^2 / sum |g_i|^2.
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double q = gauss(rng);
          q *= q;
          if (complex_field) {
            const double im = gauss(rng);
            q += im * im;
          }
          num += x[static_cast<Eigen::Index>(i)] * q;
          den += q;
        }
        ld = thetas.values()[0] * std::log(num / den);
      } else if (complex_field) {
        const Eigen::MatrixXcd f = haar_frame_complex(n, k, rng);
        const Eigen::MatrixXcd B = f.adjoint() * x.asDiagonal() * f;
        ld = log_delta(B, thetas).log_value;
      } else {
        const Eigen::MatrixXd f = haar_frame_real(n, k, rng);
        const Eigen::MatrixXd B = f.transpose() * x.asDiagonal() * f;
        ld = log_delta(B, thetas).log_value;
      }
      w[s] = expo * ld;
    }
    batch_means[b] = detail::log_sum_exp(w) - std::log(static_cast<double>(batch_size));
  }
  return detail::aggregate_batches(batch_means, n, n_samples);
}

// k = 1 estimator that skips the matrix algebra: the mass vector gamma over
// distinct eigenvalue groups follows a Dirichlet law with parameters
// (beta/2) x multiplicities, so <e, X e> = sum gamma_i v_i can be sampled
// directly from normalized Gamma variates.
inline McEstimate estimate_In_rank1_dirichlet(const SpectrumSpec& spec, double theta,
                                              std::size_t n_samples, std::uint64_t seed,
                                              std::size_t n_batches = 32) {
  if (n_batches == 0 || n_samples == 0 || n_samples % n_batches != 0)
    throw SizeError("n_samples must be a positive multiple of n_batches");
  const auto [values, counts] = grouped_spectrum(spec);
  const std::size_t ng = values.size();
  const double half_beta = 0.5 * beta_value(spec.beta);
  const double expo = half_beta * static_cast<double>(spec.N) * theta;
  std::vector<std::gamma_distribution<double>> gammas;
  gammas.reserve(ng);
  for (std::size_t i = 0; i < ng; ++i)
    gammas.emplace_back(half_beta * static_cast<double>(counts[i]), 1.0);

  const std::size_t batch_size = n_samples / n_batches;
  const std::vector<std::uint64_t> seeds = detail::batch_seeds(seed, n_batches);
  std::vector<double> batch_means(n_batches), w(batch_size);
  for (std::size_t b = 0; b < n_batches; ++b) {
    std::mt19937_64 rng(seeds[b]);
    for (std::size_t s = 0; s < batch_size; ++s) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < ng; ++i) {
        const double g = gammas[i](rng);
        num += values[i] * g;
        den += g;
      }
      w[s] = expo * std::log(num / den);
    }
    batch_means[b] = detail::log_sum_exp(w) - std::log(static_cast<double>(batch_size));
  }
  return detail::aggregate_batches(batch_means, spec.N, n_samples);
}

// Importance-sampled k = 1 estimator: proposal Dirichlet((beta N / 2) gamma_star)
// centered on the variational maximizer, reweighted by the exact density ratio
// against the target Dirichlet((beta/2) x multiplicities). Reports the
// effective sample size of the ratios and flags ESS <= 1% of n_samples.
inline McEstimate estimate_In_tilted(const SpectrumSpec& spec, double theta,
                                     const SimplexPoint& gamma_star, std::size_t n_samples,
                                     std::uint64_t seed, std::size_t n_batches = 32) {
  if (n_batches == 0 || n_samples == 0 || n_samples % n_batches != 0)
    throw SizeError("n_samples must be a positive multiple of n_batches");
  const auto [values, counts] = grouped_spectrum(spec);
  const std::size_t ng = values.size();
  if (gamma_star.size() != ng)
    throw SizeError("gamma_star length must match the distinct eigenvalue count");
  for (double g : gamma_star.gamma)
    if (!(g > 0.0)) throw DomainError("tilted proposal needs strictly positive gamma_star");

  const double half_beta = 0.5 * beta_value(spec.beta);
  const double expo = half_beta * static_cast<double>(spec.N) * theta;
  std::vector<double> ct(ng), cp(ng);
  for (std::size_t i = 0; i < ng; ++i) {
    ct[i] = half_beta * static_cast<double>(counts[i]);
    cp[i] = half_beta * static_cast<double>(spec.N) * gamma_star.gamma[i];
  }
  const auto log_beta_fn = [](const std::vector<double>& v) {
    double s = 0.0, tot = 0.0;
    for (double a : v) {
      s += std::lgamma(a);
      tot += a;
    }
    return s - std::lgamma(tot);
  };
  const double log_ratio_const = log_beta_fn(cp) - log_beta_fn(ct);

  std::vector<std::gamma_distribution<double>> gammas;
  gammas.reserve(ng);
  for (double a : cp) gammas.emplace_back(a, 1.0);

  const std::size_t batch_size = n_samples / n_batches;
  const std::vector<std::uint64_t> seeds = detail::batch_seeds(seed, n_batches);
  std::vector<double> batch_means(n_batches), w(batch_size), ratios;
  ratios.reserve(n_samples);
  std::vector<double> draw(ng);
  for (std::size_t b = 0; b < n_batches; ++b) {
    std::mt19937_64 rng(seeds[b]);
    for (std::size_t s = 0; s < batch_size; ++s) {
      double den = 0.0;
      for (std::size_t i = 0; i < ng; ++i) {
        draw[i] = gammas[i](rng);
        den += draw[i];
      }
      double num = 0.0, lr = log_ratio_const;
      for (std::size_t i = 0; i < ng; ++i) {
        const double g = draw[i] / den;
        num += values[i] * g;
        lr += (ct[i] - cp[i]) * std::log(g);
      }
      ratios.push_back(lr);
      w[s] = expo * std::log(num) + lr;
    }
    batch_means[b] = detail::log_sum_exp(w) - std::log(static_cast<double>(batch_size));
  }
  McEstimate out = detail::aggregate_batches(batch_means, spec.N, n_samples);
  double m = -std::numeric_limits<double>::infinity();
  for (double lr : ratios) m = std::max(m, lr);
  double s1 = 0.0, s2 = 0.0;
  for (double lr : ratios) {
    const double r = std::exp(lr - m);
    s1 += r;
    s2 += r * r;
  }
  out.ess = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
  out.low_ess = out.ess <= 0.01 * static_cast<double>(n_samples);
  return out;
}

// Exact value of (1/N) log E[(gamma mu1 + (1-gamma) mu2)^p] for
// gamma ~ Beta(beta a1/2, beta a2/2) and p = beta N theta / 2, by panelled
// Gauss-Legendre in the log domain after the substitution gamma = sin^2 phi
// (which removes the endpoint singularities for beta in {1,2}).
inline double exact_rank1_two_atoms(double mu1, double mu2, std::size_t a1, std::size_t a2,
                                    double theta, Beta beta, std::size_t n) {
  if (a1 == 0 || a2 == 0 || a1 + a2 != n)
    throw SizeError("atom counts must be positive and sum to N");
  if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw DomainError("atoms must be positive");
  const double bv = beta_value(beta);
  const double e1 = bv * static_cast<double>(a1) - 1.0;  // exponent of sin
  const double e2 = bv * static_cast<double>(a2) - 1.0;  // exponent of cos
  const double p = 0.5 * bv * static_cast<double>(n) * theta;
  const double log_b = std::lgamma(0.5 * bv * a1) + std::lgamma(0.5 * bv * a2) -
                       std::lgamma(0.5 * bv * (a1 + a2));
  const auto f_log = [&](double phi) {
    const double sn = std::sin(phi), cs = std::cos(phi);
    double v = std::log(2.0) - log_b + p * std::log(mu2 + sn * sn * (mu1 - mu2));
    if (e1 > 0.0) v += e1 * std::log(sn);
    if (e2 > 0.0) v += e2 * std::log(cs);
    return v;
  };

  const auto [xg, wg] = gauss_legendre(64);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t panels = 1; panels <= 128; panels *= 2) {
    std::vector<double> terms;
    terms.reserve(panels * 64);
    const double h = 0.5 * M_PI / static_cast<double>(panels);
    for (std::size_t pi = 0; pi < panels; ++pi) {
      const double a = h * static_cast<double>(pi);
      for (std::size_t i = 0; i < 64; ++i) {
        const double phi = a + 0.5 * h * (xg[i] + 1.0);
        terms.push_back(f_log(phi) + std::log(0.5 * h * wg[i]));
      }
    }
    const double cur = detail::log_sum_exp(terms);
    if (!std::isnan(prev) && std::abs(cur - prev) <= 1e-10 * std::max(1.0, std::abs(cur)))
      return cur / static_cast<double>(n);
    prev = cur;
  }
  throw QuadratureError("two-atom quadrature did not reach the relative error target");
}

inline double exact_rank1_two_atoms(const DiscreteMeasure& mu,
                                    std::pair<std::size_t, std::size_t> counts, double theta,
                                    Beta beta, std::size_t n) {
  if (mu.size() != 2) throw SizeError("exact_rank1_two_atoms needs exactly two atoms");
  return exact_rank1_two_atoms(mu.atoms()[0], mu.atoms()[1], counts.first, counts.second, theta,
                               beta, n);
}

// (1/N) log of s_kappa(x) / s_kappa(1^N) for beta = 2. The numerator is the
// bialternant ratio det(x_j^{kappa_i+N-i}) / det(x_j^{N-i}); forming the two
// determinants separately destroys all precision at moderate N because their
// shared alternating factor is astronomically small next to the entry scale,
// so the quotient s_kappa(x) is evaluated directly by the branching recursion
// s_kappa(y_1..y_m) = sum over interlacing nu of y_m^{|kappa|-|nu|} *
// s_nu(y_1..y_{m-1}), a cancellation-free positive sum. Eigenvalues are
// rescaled to at most 1 (homogeneity restores the factor) so nothing
// overflows; s_kappa(1^N) is the hook-content product.
inline double schur_oracle(const std::vector<double>& eigs,
                           const std::vector<long long>& kappa) {
  const std::size_t n = eigs.size();
  if (n == 0 || kappa.size() != n) throw SizeError("kappa length must match eigenvalue count");
  if (n > 16) throw OverflowError("schur_oracle supports N <= 16");
  long long kmax = kappa[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (kappa[i] < 0) throw DomainError("kappa entries must be nonnegative");
    if (i + 1 < n && kappa[i] < kappa[i + 1])
      throw DomainError("kappa must be weakly decreasing");
  }
  if (kmax * static_cast<long long>(n) > 1024)
    throw OverflowError("kappa exceeds the scaled-determinant budget");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eigs[i] > 0.0)) throw DomainError("eigenvalues must be positive");
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(eigs[i] - eigs[j]) < 1e-6 * std::max(std::abs(eigs[i]), std::abs(eigs[j])))
        throw DegenerateEigsError("eigenvalues too close for the bialternant ratio");
  }
  if (kmax == 0) return 0.0;

  const double xmax = *std::max_element(eigs.begin(), eigs.end());
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = eigs[j] / xmax;
  long long weight = 0;
  for (std::size_t i = 0; i < n; ++i) weight += kappa[i];

  // s_shape(y_1..y_m), memoized on (m, shape with trailing zeros trimmed).
  std::map<std::pair<std::size_t, std::vector<long long>>, double> memo;
  std::size_t budget = 0;
  std::function<double(std::size_t, std::vector<long long>)> value =
      [&](std::size_t m, std::vector<long long> shape) -> double {
    while (!shape.empty() && shape.back() == 0) shape.pop_back();
    if (shape.size() > m) return 0.0;  // more rows than variables
    if (shape.empty()) return 1.0;
    if (m == 1) return std::pow(y[0], static_cast<double>(shape[0]));
    const auto key = std::make_pair(m, shape);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    if (++budget > 2000000) throw OverflowError("branching recursion budget exceeded");
    long long total = 0;
    for (long long s : shape) total += s;
    double sum = 0.0;
    std::vector<long long> nu(shape.size(), 0);
    std::function<void(std::size_t, long long)> branch = [&](std::size_t i, long long nu_total) {
      if (i == shape.size()) {
        sum += std::pow(y[m - 1], static_cast<double>(total - nu_total)) * value(m - 1, nu);
        return;
      }
      const long long lo = i + 1 < shape.size() ? shape[i + 1] : 0;
      for (long long v = lo; v <= shape[i]; ++v) {
        nu[i] = v;
        branch(i + 1, nu_total + v);
      }
    };
    branch(0, 0);
    memo.emplace(key, sum);
    return sum;
  };
  const double log_num =
      static_cast<double>(weight) * std::log(xmax) + std::log(value(n, kappa));

  double log_hook = 0.0;  // hook-content product for s_kappa(1^N)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      log_hook += std::log(static_cast<double>(kappa[i] - kappa[j]) + static_cast<double>(j - i)) -
                  std::log(static_cast<double>(j - i));

  return (log_num - log_hook) / static_cast<double>(n);
}

// One estimate-versus-target row per matrix size, shared bulk and outliers.
inline std::vector<ConvergenceRow> convergence_study(
    const DiscreteMeasure& bulk, const std::vector<double>& lower_outliers,
    const std::vector<double>& upper_outliers, Beta beta, const std::vector<std::size_t>& n_list,
    const ThetaVector& thetas, std::size_t samples_per_n, std::size_t n_batches,
    std::uint64_t seed) {
  if (n_list.empty()) throw SizeError("convergence study needs at least one N");
  for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
    if (n_list[i] >= n_list[i + 1]) throw DomainError("N list must be strictly increasing");
  const RateResult rate = rate_multi(thetas, OutlierSet(lower_outliers, upper_outliers), bulk);
  const double target = 0.5 * beta_value(beta) * rate.total;
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    SpectrumSpec spec(bulk, lower_outliers, upper_outliers, n_list[i], beta);
    ConvergenceRow row;
    row.N = n_list[i];
    row.estimate = estimate_In(spec, thetas, samples_per_n, n_batches, mix_seed(seed, i));
    row.j_target = target;
    row.gap = row.estimate.log_mean_per_n - target;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sphint
