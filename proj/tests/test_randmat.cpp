#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <sphint/randmat.hpp>

namespace {

sphint::DiscreteMeasure two_atom() { return sphint::DiscreteMeasure({1.0, 2.0}, {0.5, 0.5}); }

Eigen::MatrixXd random_pd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = gauss(rng);
  return b * b.transpose() + Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXcd random_pd_complex(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  return b * b.adjoint() + Eigen::MatrixXcd::Identity(n, n);
}

// Direct evaluation of log Delta through per-minor determinants, independent
// of the Cholesky accumulation in the library.
template <class Mat>
double log_delta_minors(const Mat& m, const std::vector<double>& thetas) {
  double out = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double next = i + 1 < thetas.size() ? thetas[i + 1] : 0.0;
    const auto d = m.topLeftCorner(i + 1, i + 1).determinant();
    out += (thetas[i] - next) * std::log(sphint::detail::scalar_real(d));
  }
  return out;
}

}  // namespace

TEST_CASE("spectrum construction") {
  auto mu = two_atom();

  // Point mass fills everything.
  sphint::SpectrumSpec all_ones(sphint::DiscreteMeasure::point_mass(1.0), {}, {}, 5, sphint::Beta::Orthogonal);
  REQUIRE(sphint::build_spectrum(all_ones) == std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0});

  // Balanced weights, odd bulk: the floor remainder goes to the first atom.
  sphint::SpectrumSpec odd(mu, {}, {}, 5, sphint::Beta::Orthogonal);
  REQUIRE(sphint::build_spectrum(odd) == std::vector<double>{1.0, 1.0, 1.0, 2.0, 2.0});

  // Unbalanced weights: remainder goes to the heaviest atom.
  sphint::SpectrumSpec heavy(sphint::DiscreteMeasure({1.0, 2.0}, {0.6, 0.4}), {}, {}, 6,
                             sphint::Beta::Orthogonal);
  REQUIRE(sphint::build_spectrum(heavy) ==
          std::vector<double>{1.0, 1.0, 1.0, 1.0, 2.0, 2.0});

  // Outliers occupy their own slots, sorted ascending overall.
  sphint::SpectrumSpec spiked(mu, {0.5}, {3.0}, 6, sphint::Beta::Orthogonal);
  REQUIRE(sphint::build_spectrum(spiked) ==
          std::vector<double>{0.5, 1.0, 1.0, 2.0, 2.0, 3.0});

  REQUIRE_THROWS_AS(sphint::SpectrumSpec(mu, {}, {}, 0, sphint::Beta::Orthogonal),
                    sphint::SizeError);
  REQUIRE_THROWS_AS(sphint::SpectrumSpec(mu, {}, {2.5}, 2, sphint::Beta::Orthogonal),
                    sphint::SizeError);
  // Outliers must flank the bulk support.
  REQUIRE_THROWS_AS(sphint::SpectrumSpec(mu, {1.5}, {}, 8, sphint::Beta::Orthogonal),
                    sphint::DomainError);
  REQUIRE_THROWS_AS(sphint::SpectrumSpec(mu, {}, {1.5}, 8, sphint::Beta::Orthogonal),
                    sphint::DomainError);
}

TEST_CASE("haar samples are orthonormal and reproducible") {
  const int n = 8;
  auto u = sphint::haar_sample_real(n, std::uint64_t(42));
  REQUIRE((u.transpose() * u - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
  auto v = sphint::haar_sample_complex(n, std::uint64_t(42));
  REQUIRE((v.adjoint() * v - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);

  auto u2 = sphint::haar_sample_real(n, std::uint64_t(42));
  REQUIRE((u - u2).cwiseAbs().maxCoeff() == 0.0);
  auto u3 = sphint::haar_sample_real(n, std::uint64_t(43));
  REQUIRE((u - u3).cwiseAbs().maxCoeff() > 1e-3);

  // 1x1 orthogonal matrices are signs, roughly balanced over seeds.
  int pos = 0;
  for (std::uint64_t s = 0; s < 1000; ++s)
    if (sphint::haar_sample_real(1, s)(0, 0) > 0.0) ++pos;
  REQUIRE(pos > 440);
  REQUIRE(pos < 560);

  std::mt19937_64 rng(7);
  auto w = sphint::haar_frame_real(10, 3, rng);
  REQUIRE(w.rows() == 10);
  REQUIRE(w.cols() == 3);
  REQUIRE((w.transpose() * w - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  auto wc = sphint::haar_frame_complex(10, 3, rng);
  REQUIRE((wc.adjoint() * wc - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("log delta of structured matrices") {
  std::vector<double> th{2.0, 1.0, 0.5};
  sphint::ThetaVector thetas(th);

  REQUIRE(sphint::log_delta(Eigen::MatrixXd::Identity(5, 5), thetas).log_value == 0.0);

  Eigen::MatrixXd c0 = 3.0 * Eigen::MatrixXd::Identity(4, 4);
  REQUIRE(std::abs(sphint::log_delta(c0, thetas).log_value - 3.5 * std::log(3.0)) <= 1e-12);

  Eigen::MatrixXd m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  REQUIRE(std::abs(sphint::log_delta(m, sphint::ThetaVector({1.0})).log_value -
                   std::log(2.0)) <= 1e-14);
  REQUIRE(std::abs(sphint::log_delta(m, sphint::ThetaVector({1.0, 1.0})).log_value -
                   std::log(3.0)) <= 1e-14);

  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  REQUIRE_THROWS_AS(sphint::log_delta(indef, sphint::ThetaVector({1.0})), sphint::NotPDError);
  REQUIRE_THROWS_AS(sphint::log_delta(m, sphint::ThetaVector({1.0, 1.0, 1.0})),
                    sphint::SizeError);

  // Against per-minor determinants, real and complex.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto a = random_pd(5, seed);
    REQUIRE(sphint::log_delta(a, thetas).log_value ==
            Catch::Approx(log_delta_minors(a, th)).margin(1e-10));
    auto ac = random_pd_complex(5, seed);
    REQUIRE(sphint::log_delta(ac, thetas).log_value ==
            Catch::Approx(log_delta_minors(ac, th)).margin(1e-10));
  }
}

TEST_CASE("log delta under spectral scaling") {
  // Scaling X by e^delta shifts log Delta by exactly delta * sum theta; a
  // per-eigenvalue jitter of size eps moves it by at most
  // sum_i i |theta_i - theta_{i+1}| eps.
  sphint::ThetaVector thetas({2.0, 1.0});
  const int n = 6;
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd u = sphint::haar_sample_real(n, rng);
    Eigen::MatrixXd w = u.transpose() * x.asDiagonal() * u;
    const double base = sphint::log_delta(w, thetas).log_value;

    const double delta = 0.37;
    Eigen::MatrixXd ws = u.transpose() * (std::exp(delta) * x).asDiagonal() * u;
    const double shifted = sphint::log_delta(ws, thetas).log_value;
    REQUIRE(std::abs(shifted - base - delta * 3.0) <= 1e-9);

    const double eps = 0.01;
    std::uniform_real_distribution<double> unif(-eps, eps);
    Eigen::VectorXd xj = x;
    for (int i = 0; i < n; ++i) xj[i] *= std::exp(unif(rng));
    Eigen::MatrixXd wj = u.transpose() * xj.asDiagonal() * u;
    const double jittered = sphint::log_delta(wj, thetas).log_value;
    // |2-1|*1 + |1-0|*2 = 3 is the modulus for theta = (2,1).
    REQUIRE(std::abs(jittered - base) <= 3.0 * eps + 1e-12);
  }
}

TEST_CASE("haar conjugation invariance of log delta") {
  // Samples of log Delta(U* X U) and log Delta(U* (V X V*) U) share one law;
  // two-sample Kolmogorov-Smirnov at level 0.001.
  const int n = 8, ns = 10000;
  Eigen::VectorXd xv = Eigen::VectorXd::LinSpaced(n, 1.0, 8.0);
  Eigen::MatrixXd x = xv.asDiagonal();
  sphint::ThetaVector thetas({1.0, 0.5});
  Eigen::MatrixXd v = sphint::haar_sample_real(n, std::uint64_t(999));
  Eigen::MatrixXd x2 = v * x * v.transpose();

  std::mt19937_64 r1(101), r2(202);
  std::vector<double> a(ns), b(ns);
  for (int i = 0; i < ns; ++i) {
    Eigen::MatrixXd u1 = sphint::haar_sample_real(n, r1);
    Eigen::MatrixXd u2 = sphint::haar_sample_real(n, r2);
    a[i] = sphint::log_delta(u1.transpose() * x * u1, thetas).log_value;
    b[i] = sphint::log_delta(u2.transpose() * x2 * u2, thetas).log_value;
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double ks = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] <= b[ib]) ++ia;
    else ++ib;
    ks = std::max(ks, std::abs(static_cast<double>(ia) / ns - static_cast<double>(ib) / ns));
  }
  REQUIRE(ks <= 1.9495 * std::sqrt(2.0 / ns));
}

TEST_CASE("deflation identity and interlacing") {
  sphint::ThetaVector thetas({1.0, 0.5});

  // Diagonal matrix: the Schur complement is the trailing block untouched.
  Eigen::Vector3d d(1.0, 2.0, 3.0);
  auto dd = sphint::deflate(Eigen::MatrixXd(d.asDiagonal()), thetas);
  REQUIRE(dd.a == 1.0);
  REQUIRE((dd.y - Eigen::Vector2d(2.0, 3.0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() ==
          0.0);
  REQUIRE(dd.residual <= 1e-12);

  REQUIRE_THROWS_AS(sphint::deflate(Eigen::MatrixXd::Identity(1, 1), thetas),
                    sphint::SizeError);

  // Residual and interlacing over Haar conjugations.
  const int n = 8;
  Eigen::VectorXd x(n);
  x << 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 3.0;
  std::mt19937_64 rng(5150);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::MatrixXd u = sphint::haar_sample_real(n, rng);
    Eigen::MatrixXd w = u.transpose() * x.asDiagonal() * u;
    auto res = sphint::deflate(w, thetas);
    REQUIRE(res.residual <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(res.y);
    const Eigen::VectorXd nu = es.eigenvalues();
    for (int i = 0; i < n - 1; ++i) {
      REQUIRE(nu[i] >= x[i] - 1e-9);
      REQUIRE(nu[i] <= x[i + 1] + 1e-9);
    }
    // Multiplicity m at an atom forces m-1 eigenvalues pinned there.
    int pinned_one = 0, pinned_two = 0;
    for (int i = 0; i < n - 1; ++i) {
      if (std::abs(nu[i] - 1.0) <= 1e-8) ++pinned_one;
      if (std::abs(nu[i] - 2.0) <= 1e-8) ++pinned_two;
    }
    REQUIRE(pinned_one >= 2);
    REQUIRE(pinned_two >= 3);
  }

  // Complex Hermitian case.
  std::mt19937_64 crng(6);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXcd u = sphint::haar_sample_complex(5, crng);
    Eigen::VectorXd spec(5);
    spec << 0.5, 1.0, 1.5, 2.0, 2.5;
    Eigen::MatrixXcd w = u.adjoint() * spec.asDiagonal().toDenseMatrix().cast<std::complex<double>>() * u;
    auto res = sphint::deflate(w, thetas);
    REQUIRE(res.residual <= 1e-10);
  }
}

TEST_CASE("inverse spectrum identity") {
  auto id = sphint::inverse_spectrum_identity(Eigen::MatrixXd::Identity(6, 6),
                                              std::uint64_t(3));
  REQUIRE(std::abs(id.first) <= 1e-12);
  REQUIRE(std::abs(id.second) <= 1e-12);

  Eigen::Vector2d d(1.0, 4.0);
  auto small = sphint::inverse_spectrum_identity(Eigen::MatrixXd(d.asDiagonal()),
                                                 std::uint64_t(11));
  REQUIRE(std::abs(small.first - small.second) <= 1e-10);

  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto m = random_pd(10, seed);
    auto pr = sphint::inverse_spectrum_identity(m, seed);
    REQUIRE(std::abs(pr.first - pr.second) <= 1e-8);
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto m = random_pd_complex(7, seed);
    auto pr = sphint::inverse_spectrum_identity(m, seed);
    REQUIRE(std::abs(pr.first - pr.second) <= 1e-8);
  }
}
