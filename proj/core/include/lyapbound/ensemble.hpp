#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lyapbound/rng.hpp"

namespace lyap {

using ComplexMatrix = Eigen::MatrixXcd;

// tr(X L L+) is floored at this value before taking the log, so that
// semigroup ensembles with singular support keep the arithmetic finite
// while -inf still orders correctly.
inline constexpr double kTraceFloor = 1e-300;

// Most negative finite double, used as the -inf sentinel in reports.
inline constexpr double kNegInfSentinel = -1.7976931348623157e308;

inline double clamped_log(double t) {
  return std::log(t < kTraceFloor ? kTraceFloor : t);
}

class EnsembleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite support {L_i} with probability weights; expectations are exact.
struct DiscreteEnsemble {
  int dim = 0;
  std::vector<ComplexMatrix> matrices;
  std::vector<double> probs;
  bool invertible = false;  // every support matrix invertible
  bool commuting = false;   // support pairwise commutes
};

// Support matrices selected by a stationary Markov chain on their indices.
struct MarkovEnsemble {
  int dim = 0;
  std::vector<ComplexMatrix> matrices;
  Eigen::MatrixXd transition;  // row-stochastic
  Eigen::VectorXd initial;
  bool invertible = false;
};

// Continuous ensemble defined by a seeded sampling contract.
struct SamplerEnsemble {
  enum class Kind { haar_conjugated_diagonal, custom };
  int dim = 0;
  Kind kind = Kind::haar_conjugated_diagonal;
  std::vector<double> diag;  // for haar_conjugated_diagonal
  std::function<ComplexMatrix(int dim, Rng&)> custom;
  bool compact_support = true;  // user assertion for custom samplers

  ComplexMatrix sample(Rng& rng) const;
};

using Ensemble = std::variant<DiscreteEnsemble, MarkovEnsemble, SamplerEnsemble>;

int ensemble_dim(const Ensemble& e);

// Exact Haar-distributed unitary: QR of an i.i.d. complex Gaussian matrix
// with the R diagonal phases absorbed into Q.
ComplexMatrix haar_unitary(int dim, Rng& rng);

// Validation from raw parts. Normalizes probabilities, drops zero-weight
// atoms, and records invertibility (condition gate for the gamma_d bounds)
// and pairwise commutation (gate for the closed form).
DiscreteEnsemble make_discrete(std::vector<ComplexMatrix> matrices,
                               std::vector<double> probs);
MarkovEnsemble make_markov(std::vector<ComplexMatrix> matrices,
                           Eigen::MatrixXd transition, Eigen::VectorXd initial);
SamplerEnsemble make_haar_diag(int dim, std::vector<double> diag);

struct ExpectLogForm {
  double value = 0.0;
  double stderr_ = 0.0;  // zero for exact (discrete) evaluation
};

// E log tr(X L L+). Exact weighted sum for discrete support, Monte-Carlo
// mean with standard error for sampler ensembles.
ExpectLogForm expect_log_form(const Ensemble& e, const ComplexMatrix& X,
                              long samples = 100000, std::uint64_t seed = 42);

// Same probabilities/kernel, every matrix replaced by its inverse.
// Requires condition numbers below 1e12.
DiscreteEnsemble invert_ensemble(const DiscreteEnsemble& e);
MarkovEnsemble invert_ensemble(const MarkovEnsemble& e);
Ensemble invert_ensemble(const Ensemble& e);

// {c L_i}; shifts every Lyapunov exponent by log c.
Ensemble scale_ensemble(const Ensemble& e, double c);

bool is_invertible_support(const Ensemble& e);
bool is_commuting_support(const Ensemble& e);

// Stationary stream of matrices from an ensemble (tracks the Markov state).
class MatrixStream {
 public:
  MatrixStream(const Ensemble& e, std::uint64_t seed);
  const ComplexMatrix& next();

 private:
  const Ensemble& ensemble_;
  Rng rng_;
  int state_ = -1;
  ComplexMatrix scratch_;
};

}  // namespace lyap
