#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "lyapbound/ensemble.hpp"
#include "lyapbound/fixtures.hpp"
#include "lyapbound/spectrum.hpp"

using namespace lyap;

namespace {

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("identity ensemble gives zero spectrum exactly") {
  Ensemble e = make_discrete({ComplexMatrix::Identity(2, 2)}, {1.0});
  auto est = lyapunov_spectrum_qr(e, 100, 4, 42);
  CHECK(est.gammas(0) == 0.0);
  CHECK(est.gammas(1) == 0.0);
  CHECK(est.deficient_fraction.sum() == 0.0);
}

TEST_CASE("deterministic diagonal ensemble is exact") {
  Ensemble e = make_discrete({diag2(3, 1)}, {1.0});
  auto g = nonasymptotic_gamma(e, 1, 50, 2, 42);
  CHECK(g.value == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  auto g2 = nonasymptotic_gamma(e, 2, 50, 2, 42);
  CHECK(g2.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("known values within three standard errors") {
  auto est = lyapunov_spectrum_qr(fixtures::rank_one_pair(), 4000, 16, 42);
  CHECK(std::abs(est.gammas(0) + 0.25 * std::log(2.0)) <=
        3.0 * est.stderrs(0) + 1e-3);
  // singular support kills the second exponent
  CHECK(est.gammas(1) == kNegInfSentinel);
  CHECK(est.deficient_fraction(1) == 1.0);

  auto est2 = lyapunov_spectrum_qr(fixtures::group_pair(), 4000, 8, 42);
  CHECK(std::abs(est2.gammas(0)) <= 3.0 * est2.stderrs(0) + 1e-6);
}

TEST_CASE("spectrum is non-increasing and determinant-consistent") {
  ComplexMatrix a(3, 3), b(3, 3);
  a << 1, 2, 0, 0, 1, -1, 0.25, 0, 1;
  b << 2, 0, 1, 1, 0.5, 0, 0, 1, 1;
  Ensemble e = make_discrete({a, b}, {0.5, 0.5});
  auto est = lyapunov_spectrum_qr(e, 2000, 8, 42);
  for (int k = 1; k < 3; ++k) CHECK(est.gammas(k - 1) >= est.gammas(k));

  // sum of exponents equals the mean log |det| of the support
  double logdet = 0.5 * (std::log(std::abs(a.determinant())) +
                         std::log(std::abs(b.determinant())));
  CHECK(std::abs(est.gammas.sum() - logdet) <=
        3.0 * est.stderrs.sum() + 1e-9);
}

TEST_CASE("fixed seed is reproducible across thread counts") {
  Ensemble e = fixtures::transfer_sl2();
  setenv("LYAPBOUND_THREADS", "1", 1);
  auto a = lyapunov_spectrum_qr(e, 500, 6, 42);
  setenv("LYAPBOUND_THREADS", "3", 1);
  auto b = lyapunov_spectrum_qr(e, 500, 6, 42);
  unsetenv("LYAPBOUND_THREADS");
  CHECK(a.gammas == b.gammas);
  CHECK(a.stderrs == b.stderrs);
}

TEST_CASE("exterior power basics") {
  ComplexMatrix l(3, 3);
  l << 1, 2, 3, 0, -1, 1, 2, 0, 1;
  CHECK((exterior_power(l, 1) - l).norm() == 0.0);
  auto top = exterior_power(l, 3);
  REQUIRE(top.rows() == 1);
  CHECK(std::abs(top(0, 0) - l.determinant()) < 1e-12);
  CHECK_THROWS_AS(exterior_power(l, 4), EnsembleError);
}

TEST_CASE("wedge top singular value equals product of singular values") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 2 + static_cast<int>(rng.uniform() * 4);  // 2..5
    ComplexMatrix l(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) l(r, c) = rng.complex_normal();
    Eigen::JacobiSVD<ComplexMatrix> svd(l);
    for (int j = 1; j <= d; ++j) {
      Eigen::JacobiSVD<ComplexMatrix> wsvd(exterior_power(l, j));
      double prod = 1.0;
      for (int i = 0; i < j; ++i) prod *= svd.singularValues()(i);
      CHECK(std::abs(wsvd.singularValues()(0) - prod) <= 1e-9 * prod);
    }
  }
}

TEST_CASE("exterior estimator cross-checks the QR estimator") {
  Ensemble e = fixtures::transfer_sl2();
  auto qr = lyapunov_spectrum_qr(e, 4000, 8, 42);
  auto ex = spectrum_via_exterior(e, 4000, 8, 42);
  // det = 1, so the pair sums to zero
  CHECK(std::abs(ex.gammas(0) + ex.gammas(1)) <=
        3.0 * (ex.stderrs(0) + ex.stderrs(1)) + 1e-9);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(qr.gammas(k) - ex.gammas(k)) <=
          3.0 * (qr.stderrs(k) + ex.stderrs(k)) + 1e-6);
}

TEST_CASE("exterior estimator respects the dimension guard") {
  Ensemble e = make_discrete({ComplexMatrix::Identity(7, 7)}, {1.0});
  CHECK_THROWS_AS(spectrum_via_exterior(e, 10, 1, 42), EnsembleError);
}

TEST_CASE("scaling covariance of the spectrum") {
  Ensemble e = fixtures::group_pair();
  auto base = lyapunov_spectrum_qr(e, 2000, 8, 42);
  auto scaled = lyapunov_spectrum_qr(scale_ensemble(e, 3.0), 2000, 8, 42);
  for (int k = 0; k < 2; ++k)
    CHECK(scaled.gammas(k) ==
          doctest::Approx(base.gammas(k) + std::log(3.0)).epsilon(1e-9));
}
