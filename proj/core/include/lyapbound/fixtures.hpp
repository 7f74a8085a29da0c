#pragma once

#include "lyapbound/ensemble.hpp"
#include "lyapbound/hmm.hpp"

namespace lyap::fixtures {

// SL(2,R) transfer matrices [[w,-1],[1,0]], w uniform on {-1,1}.
DiscreteEnsemble transfer_sl2();

// Rank-one semigroup pair {e1 e1^T, (1/2) J}, uniform.
DiscreteEnsemble rank_one_pair();

// Group pair {diag(sqrt2, 1/sqrt2), [[0, 1/sqrt3], [-sqrt3, 0]]}, uniform.
DiscreteEnsemble group_pair();

// Haar-conjugated diag(alpha, beta).
SamplerEnsemble haar_diag(double alpha = 5.0, double beta = 1.0);

// Four 5x5 integer matrices, uniform.
DiscreteEnsemble big_five();

// Density-matrix atoms matching the rank_one_pair semigroup closure.
std::vector<ComplexMatrix> rank_one_pair_atoms();

// Symmetric binary chain observed through a binary symmetric channel.
HmmModel bsc_chain(double stay = 0.9, double flip = 0.05);

}  // namespace lyap::fixtures
