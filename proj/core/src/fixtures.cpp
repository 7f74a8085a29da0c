#include "lyapbound/fixtures.hpp"

#include <cmath>

namespace lyap::fixtures {

DiscreteEnsemble transfer_sl2() {
  ComplexMatrix a(2, 2), b(2, 2);
  a << 1, -1, 1, 0;
  b << -1, -1, 1, 0;
  return make_discrete({a, b}, {0.5, 0.5});
}

DiscreteEnsemble rank_one_pair() {
  ComplexMatrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 0;
  b << 0.5, 0.5, 0.5, 0.5;
  return make_discrete({a, b}, {0.5, 0.5});
}

DiscreteEnsemble group_pair() {
  double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  ComplexMatrix a(2, 2), b(2, 2);
  a << s2, 0, 0, 1.0 / s2;
  b << 0, 1.0 / s3, -s3, 0;
  return make_discrete({a, b}, {0.5, 0.5});
}

SamplerEnsemble haar_diag(double alpha, double beta) {
  return make_haar_diag(2, {alpha, beta});
}

DiscreteEnsemble big_five() {
  ComplexMatrix m1(5, 5), m2(5, 5), m3(5, 5), m4(5, 5);
  m1 << -5, 9, 6, -1, 5,
         1, 6, 5, 5, 2,
         6, -5, 5, -4, 1,
         1, 10, -9, 8, 2,
         5, -4, 4, -8, 5;
  m2 << 4, -6, 1, 2, 3,
        8, 7, 0, 1, -8,
        -8, -1, 4, 10, 5,
        0, -6, -10, -7, 6,
        9, -8, 5, -3, -10;
  m3 << 6, -9, 3, 3, 10,
        9, 8, 0, 7, -10,
        -1, 2, -7, 0, -6,
        5, -10, -2, 1, -1,
        -4, 10, 2, -10, -5;
  m4 << 3, 9, -4, 6, -2,
        0, 9, 4, -8, -9,
        5, 3, 3, -2, -9,
        -8, -10, -7, 6, -9,
        -6, -8, -2, -1, -7;
  return make_discrete({m1, m2, m3, m4}, {0.25, 0.25, 0.25, 0.25});
}

std::vector<ComplexMatrix> rank_one_pair_atoms() {
  ComplexMatrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 0;
  b << 0.5, 0.5, 0.5, 0.5;
  return {a, b};
}

HmmModel bsc_chain(double stay, double flip) {
  Eigen::MatrixXd m(2, 2), w(2, 2);
  m << stay, 1 - stay, 1 - stay, stay;
  w << 1 - flip, flip, flip, 1 - flip;
  return make_hmm(m, w);
}

}  // namespace lyap::fixtures
