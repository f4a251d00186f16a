#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "measure.hpp"
#include "rate.hpp"

namespace sphint {

// Ensemble field: real orthogonal (beta = 1) or complex unitary (beta = 2).
enum class Beta : int { Orthogonal = 1, Unitary = 2 };

inline int beta_value(Beta b) { return static_cast<int>(b); }

// Deterministic spectrum blueprint: bulk atoms with weights, plus exact
// outlier eigenvalues pinned below and above the bulk.
struct SpectrumSpec {
  DiscreteMeasure bulk;
  std::vector<double> lower_outliers;  // ascending, each in (0, l(bulk)]
  std::vector<double> upper_outliers;  // ascending, each >= r(bulk)
  std::size_t N = 0;
  Beta beta = Beta::Orthogonal;

  SpectrumSpec(DiscreteMeasure bulk_, std::vector<double> lower, std::vector<double> upper,
               std::size_t n, Beta b)
      : bulk(std::move(bulk_)),
        lower_outliers(std::move(lower)),
        upper_outliers(std::move(upper)),
        N(n),
        beta(b) {
    const double l = bulk.support_min(), r = bulk.support_max();
    for (std::size_t i = 0; i < lower_outliers.size(); ++i) {
      if (!(lower_outliers[i] > 0.0) || lower_outliers[i] > l)
        throw DomainError("lower outliers must lie in (0, l(bulk)]");
      if (i + 1 < lower_outliers.size() && lower_outliers[i] > lower_outliers[i + 1])
        throw DomainError("lower outliers must be ascending");
    }
    for (std::size_t i = 0; i < upper_outliers.size(); ++i) {
      if (upper_outliers[i] < r) throw DomainError("upper outliers must lie at or above r(bulk)");
      if (i + 1 < upper_outliers.size() && upper_outliers[i] > upper_outliers[i + 1])
        throw DomainError("upper outliers must be ascending");
    }
    if (N < n_outliers() + bulk.size())
      throw SizeError("N must cover the outliers and every bulk atom");
  }

  std::size_t n_outliers() const { return lower_outliers.size() + upper_outliers.size(); }
};

// Expand a SpectrumSpec to N ascending eigenvalues. Bulk multiplicities are
// floor(alpha_i (N - #outliers)); the remainder goes one-per-atom to the
// largest-weight atoms (ties by lower index), deterministically.
inline std::vector<double> build_spectrum(const SpectrumSpec& spec) {
  const std::size_t nb = spec.N - spec.n_outliers();
  const std::size_t na = spec.bulk.size();
  std::vector<std::size_t> mult(na);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < na; ++i) {
    mult[i] = static_cast<std::size_t>(std::floor(spec.bulk.weights()[i] * static_cast<double>(nb)));
    assigned += mult[i];
  }
  std::vector<std::size_t> order(na);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.bulk.weights()[a] > spec.bulk.weights()[b];
  });
  for (std::size_t j = 0; assigned < nb; ++j) ++mult[order[j % na]], ++assigned;

  std::vector<double> eigs;
  eigs.reserve(spec.N);
  eigs.insert(eigs.end(), spec.lower_outliers.begin(), spec.lower_outliers.end());
  for (std::size_t i = 0; i < na; ++i)
    eigs.insert(eigs.end(), mult[i], spec.bulk.atoms()[i]);
  eigs.insert(eigs.end(), spec.upper_outliers.begin(), spec.upper_outliers.end());
  return eigs;
}

namespace detail {

inline double scalar_real(double x) { return x; }
inline double scalar_real(const std::complex<double>& x) { return x.real(); }

}  // namespace detail

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the R
// diagonal normalized positive.
inline Eigen::MatrixXd haar_sample_real(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw SizeError("haar_sample needs N >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd u = qr.householderQ();
  for (std::size_t i = 0; i < n; ++i)
    if (qr.matrixQR()(i, i) < 0.0) u.col(i) = -u.col(i);
  return u;
}

// Haar-distributed unitary matrix, same construction over complex Gaussians.
inline Eigen::MatrixXcd haar_sample_complex(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw SizeError("haar_sample needs N >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd u = qr.householderQ();
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> d = qr.matrixQR()(i, i);
    const double a = std::abs(d);
    if (a > 0.0) u.col(i) *= d / a;
  }
  return u;
}

inline Eigen::MatrixXd haar_sample_real(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_sample_real(n, rng);
}

inline Eigen::MatrixXcd haar_sample_complex(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_sample_complex(n, rng);
}

// First k columns of a Haar matrix, up to column phases, via thin QR of an
// N x k Gaussian block. Column phases cancel in every leading principal minor
// of W* X W, so this is exact for Delta evaluations at a fraction of the cost.
inline Eigen::MatrixXd haar_frame_real(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  if (k == 0 || k > n) throw SizeError("frame needs 1 <= k <= N");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                       static_cast<Eigen::Index>(k));
}

inline Eigen::MatrixXcd haar_frame_complex(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  if (k == 0 || k > n) throw SizeError("frame needs 1 <= k <= N");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n),
                                                        static_cast<Eigen::Index>(k));
}

// Natural log of Delta_theta(M) without the beta N/2 exponent:
//   sum_{i=1}^{k} (theta_i - theta_{i+1}) log det [M]_i,  theta_{k+1} = 0,
// with every leading-principal log-determinant read off one Cholesky factor.
struct LogDelta {
  double log_value = 0.0;
};

template <class Derived>
LogDelta log_delta(const Eigen::MatrixBase<Derived>& m, const ThetaVector& thetas) {
  using Plain = typename Derived::PlainObject;
  const Plain mat = m;
  const std::size_t n = static_cast<std::size_t>(mat.rows());
  const std::size_t k = thetas.k();
  if (k > n) throw SizeError("theta length exceeds matrix size");
  Eigen::LLT<Plain> llt(mat);
  if (llt.info() != Eigen::Success) throw NotPDError("Cholesky failed: matrix not positive definite");
  const Plain l = llt.matrixL();
  double cum = 0.0, out = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cum += 2.0 * std::log(detail::scalar_real(l(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(i))));
    const double next = i + 1 < k ? thetas.values()[i + 1] : 0.0;
    out += (thetas.values()[i] - next) * cum;
  }
  return {out};
}

// Schur-complement deflation M = [[a, c*], [c, B]] -> Y = B - c c*/a, which
// satisfies log Delta_theta(M) = theta_1 log a + log Delta_{theta-tail}(Y).
// The residual reports how well that identity holds numerically.
template <class Mat>
struct DeflateResult {
  double a = 0.0;
  Mat y;
  double residual = 0.0;
};

template <class Derived>
DeflateResult<typename Derived::PlainObject> deflate(const Eigen::MatrixBase<Derived>& m,
                                                     const ThetaVector& thetas) {
  using Plain = typename Derived::PlainObject;
  const Plain mat = m;
  const Eigen::Index n = mat.rows();
  if (n < 2) throw SizeError("deflate needs N >= 2");
  const double a = detail::scalar_real(mat(0, 0));
  if (!(a > 0.0)) throw NotPDError("deflate corner entry not positive");
  const auto c = mat.col(0).tail(n - 1);
  DeflateResult<Plain> out;
  out.a = a;
  out.y = mat.bottomRightCorner(n - 1, n - 1) - (c * c.adjoint()) / a;

  const double lhs = log_delta(mat, thetas).log_value;
  double rhs = thetas.values()[0] * std::log(a);
  if (thetas.k() > 1) {
    std::vector<double> tail(thetas.values().begin() + 1, thetas.values().end());
    rhs += log_delta(out.y, ThetaVector(std::move(tail))).log_value;
  }
  out.residual = std::abs(lhs - rhs);
  return out;
}

// Per-sample form of the inversion identity behind I_N(theta', X) =
// I_N(-theta, X^{-1}): with theta' = (0,...,0,1) and a shared Haar sample U,
//   log Delta_{theta'}(U* M U) = -log (U* M^{-1} U)_{NN},
// the (N, N) entry being the Cramer cofactor of the order-(N-1) leading minor.
template <class Derived>
std::pair<double, double> inverse_spectrum_identity(const Eigen::MatrixBase<Derived>& m,
                                                    std::uint64_t seed) {
  using Plain = typename Derived::PlainObject;
  using Scalar = typename Derived::Scalar;
  const Plain mat = m;
  const std::size_t n = static_cast<std::size_t>(mat.rows());
  Eigen::LLT<Plain> llt(mat);
  if (llt.info() != Eigen::Success) throw NotPDError("matrix not positive definite");
  const Plain inv = llt.solve(Plain::Identity(mat.rows(), mat.cols()));

  std::mt19937_64 rng(seed);
  Plain u;
  if constexpr (Eigen::NumTraits<Scalar>::IsComplex)
    u = haar_sample_complex(n, rng);
  else
    u = haar_sample_real(n, rng);

  std::vector<double> tp(n, 0.0);
  tp.back() = 1.0;
  const Plain w = u.adjoint() * mat * u;
  const double lhs = log_delta(w, ThetaVector(std::move(tp))).log_value;
  const Plain wi = u.adjoint() * inv * u;
  const double rhs = -std::log(detail::scalar_real(wi(mat.rows() - 1, mat.cols() - 1)));
  return {lhs, rhs};
}

}  // namespace sphint
