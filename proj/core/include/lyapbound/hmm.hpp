#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace lyap {

// Hidden Markov process: stationary chain with transition matrix M observed
// through a discrete memoryless channel W.
struct HmmModel {
  Eigen::MatrixXd M;   // |X| x |X|, row-stochastic
  Eigen::MatrixXd W;   // |X| x |Y|, row-stochastic
  Eigen::VectorXd mu;  // stationary distribution of M

  int num_states() const { return static_cast<int>(M.rows()); }
  int num_symbols() const { return static_cast<int>(W.cols()); }
};

// Validates stochasticity and computes the stationary distribution by dense
// least squares on (M^T - I) with a normalization row appended.
HmmModel make_hmm(Eigen::MatrixXd M, Eigen::MatrixXd W);

// Transfer matrices A_y with (A_y)_{x,x'} = M_{x,x'} W_{x',y}.
// Sum over y recovers M exactly.
std::vector<Eigen::MatrixXd> transfer_matrices(const HmmModel& model);

struct HmmMcEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Normalized forward recursion over sampled observation paths; estimates the
// entropy rate in nats per symbol. Unbiased for H(Y^n)/n at finite n.
HmmMcEstimate entropy_rate_mc(const HmmModel& model, int n, int trials,
                              std::uint64_t seed);

struct EntropyRateReport {
  double lower = 0.0;  // nats/symbol
  double upper = 0.0;
  HmmMcEstimate mc;
  // The conditioning of the dependent bound is relaxed from observation
  // histories to the full belief simplex (an outer relaxation constructed by
  // this artifact, not taken from a closed-form reference).
  std::string note = "belief-state relaxation of the dependent per-step bound";
};

struct EntropyBoundOptions {
  double fw_tol = 1e-8;
  long fw_max_iter = 20000;
  int mc_n = 10000;
  int mc_trials = 32;
  std::uint64_t seed = 42;
};

// Sandwich on the entropy rate from the Lyapunov bounds of the transfer
// ensemble: lower = -(upper bound on gamma_1), upper = -(lower bound on
// gamma_d), each maximized/minimized over belief states on the simplex.
EntropyRateReport entropy_rate_bounds(const HmmModel& model,
                                      const EntropyBoundOptions& opts = {});

}  // namespace lyap
