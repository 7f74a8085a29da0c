#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lyapbound/ensemble.hpp"

namespace lyap {

// Positive semidefinite, unit-trace matrix; the optimization variable of the
// convex bound.
struct DensityMatrix {
  ComplexMatrix mat;
  static DensityMatrix maximally_mixed(int d);
  static DensityMatrix projector(const Eigen::VectorXcd& v);
  static DensityMatrix validated(ComplexMatrix m);  // throws on violation
};

enum class BoundSide { upper_gamma1, lower_gammad };

struct BoundDiagnostics {
  long iterations = 0;
  double duality_gap = 0.0;    // Frank-Wolfe certificate (2-gamma scale)
  double restart_spread = 0.0; // value spread across rank-one restarts
  long samples = 0;
  bool converged = true;
};

struct BoundReport {
  double value = 0.0;  // nats per step, gamma scale
  BoundSide side = BoundSide::upper_gamma1;
  std::string method;
  ComplexMatrix certificate_matrix;       // density matrix optimizer, if any
  Eigen::VectorXcd certificate_vector;    // rank-one optimizer, if any
  std::vector<double> certificate_params; // group-family parameters, if any
  BoundDiagnostics diagnostics;
};

struct BoundOptions {
  double tol = 1e-6;
  long max_iter = 100000;
  int restarts = 64;
  long samples = 100000;
  std::uint64_t seed = 42;
};

// (1/2) E log lambda_max(L L+) and (1/2) E log lambda_min(L L+); exact for
// discrete support. The lower side requires invertible support.
std::pair<BoundReport, BoundReport> trivial_bounds(const Ensemble& e,
                                                   const BoundOptions& o = {});

// (1/2) log lambda_max(E[L L+]); the top eigenprojector is the certificate.
BoundReport jensen_sdp_upper(const Ensemble& e, const BoundOptions& o = {});

// Frank-Wolfe maximization of the concave E log tr(X L L+) over density
// matrices. The returned value (f(X) + gap)/2 is a certified upper bound on
// gamma_1 regardless of iteration count.
BoundReport convex_upper_fw(const Ensemble& e, const BoundOptions& o = {});

// Heuristic evaluation of the rank-one bounds: multi-start Riemannian
// gradient ascent/descent on the unit sphere, an angle sweep for real 2x2
// support, and the common-eigenbasis restriction when the support is a
// commuting invertible family.
BoundReport rank_one_upper(const Ensemble& e, const BoundOptions& o = {});
BoundReport rank_one_lower(const Ensemble& e, const BoundOptions& o = {});

// Semigroup-style bound over an explicit finite feasible set of density
// matrices: max over the atoms of (1/2) E log tr(X L L+).
BoundReport atom_set_upper(const Ensemble& e,
                           const std::vector<ComplexMatrix>& atoms,
                           const BoundOptions& o = {});

enum class GroupFamily { sl2_real, diag_conjugacy };

// Bounds over the hard-coded group-restricted feasible families, evaluated
// by log-scaled grid search with golden-section refinement.
std::pair<BoundReport, BoundReport> group_parametric_bounds(
    const Ensemble& e, GroupFamily family, int grid = 10000,
    double refine_tol = 1e-10);

// Family membership probe used by group_parametric_bounds and the inverse
// improvement.
bool group_family_member(const Ensemble& e, GroupFamily family);

// Exact closed form for pairwise-commuting invertible support:
// ((1/2) lambda_max(E log L L+), (1/2) lambda_min(E log L L+)).
std::pair<double, double> commutative_closed_form(const Ensemble& e,
                                                  const BoundOptions& o = {});

// Combines the best direct bounds with the bounds on the inverted ensemble
// via sigma_max(L) = 1/sigma_min(L^-1).
std::pair<BoundReport, BoundReport> inverse_improved_bounds(
    const Ensemble& e, const BoundOptions& o = {});

// Finite-n bounds with the first-step and log(d)/n correction terms.
std::pair<BoundReport, BoundReport> nonasymptotic_bounds(
    const Ensemble& e, int n, const BoundOptions& o = {});

// Markov variant: the per-step terms optimize over the conditioning atom
// (chain row) as well as X.
std::pair<BoundReport, BoundReport> markov_bounds(const MarkovEnsemble& e,
                                                  int n,
                                                  const BoundOptions& o = {});

struct EatReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double fw_gap = 0.0;
  int n = 0;
  long words = 0;
};

// Exact enumeration check of the relative-entropy accumulation inequality on
// length-n support words (budget support^n <= 1e6).
EatReport eat_verify(const DiscreteEnsemble& e, int n,
                     const BoundOptions& o = {});

}  // namespace lyap
