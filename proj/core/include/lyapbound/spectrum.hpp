#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "lyapbound/ensemble.hpp"

namespace lyap {

struct SpectrumEstimate {
  Eigen::VectorXd gammas;    // non-increasing, nats per step
  Eigen::VectorXd stderrs;   // sample standard deviation / sqrt(trials)
  Eigen::VectorXd deficient_fraction;  // trials that hit rank deficiency
  int n = 0;
  int trials = 0;
  std::uint64_t seed = 0;
};

// Benettin-style estimator: propagate an orthonormal frame, re-orthonormalize
// by QR every step (with the R diagonal made nonnegative), accumulate
// log |R_kk|. Rank-deficient products yield the -inf sentinel for the
// trailing exponents. Trial t uses seed base + t; reduction is in trial-index
// order regardless of worker count.
SpectrumEstimate lyapunov_spectrum_qr(const Ensemble& e, int n, int trials,
                                      std::uint64_t seed);

struct GammaEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// (1/n) E log sigma_k of the n-fold product, k in [1, d].
GammaEstimate nonasymptotic_gamma(const Ensemble& e, int k, int n, int trials,
                                  std::uint64_t seed);

// Compound matrix of j x j minors in lexicographic index-subset order.
ComplexMatrix exterior_power(const ComplexMatrix& L, int j);

// Independent estimator: gamma_1 of each wedge power recovers the partial
// sums gamma_1 + ... + gamma_j; differencing yields the spectrum. The wedge
// streams share the trial's matrix sequence, so the differences are tightly
// coupled. Guarded to d <= 6.
SpectrumEstimate spectrum_via_exterior(const Ensemble& e, int n, int trials,
                                       std::uint64_t seed);

}  // namespace lyap
