#include "lyapbound/ensemble.hpp"

#include <Eigen/QR>
#include <cmath>

namespace lyap {

namespace {

void check_square_finite(const ComplexMatrix& m, int dim) {
  if (m.rows() != dim || m.cols() != dim)
    throw EnsembleError("dimension mismatch in ensemble support");
  if (!m.allFinite()) throw EnsembleError("non-finite matrix entry");
}

bool matrix_invertible(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(m.rows() - 1);
  return smin > 0.0 && smax / smin < 1e12;
}

bool all_invertible(const std::vector<ComplexMatrix>& ms) {
  for (const auto& m : ms)
    if (!matrix_invertible(m)) return false;
  return true;
}

bool pairwise_commuting(const std::vector<ComplexMatrix>& ms) {
  for (size_t i = 0; i < ms.size(); ++i)
    for (size_t j = i + 1; j < ms.size(); ++j) {
      double lhs = (ms[i] * ms[j] - ms[j] * ms[i]).norm();
      if (lhs > 1e-10 * ms[i].norm() * ms[j].norm()) return false;
    }
  return true;
}

}  // namespace

int ensemble_dim(const Ensemble& e) {
  return std::visit([](const auto& x) { return x.dim; }, e);
}

ComplexMatrix haar_unitary(int dim, Rng& rng) {
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    std::complex<double> rkk = r(k, k);
    double a = std::abs(rkk);
    q.col(k) *= (a > 0.0) ? rkk / a : 1.0;
  }
  return q;
}

ComplexMatrix SamplerEnsemble::sample(Rng& rng) const {
  if (kind == Kind::custom) return custom(dim, rng);
  ComplexMatrix u = haar_unitary(dim, rng);
  Eigen::VectorXcd d(dim);
  for (int i = 0; i < dim; ++i) d(i) = diag[i];
  return u * d.asDiagonal() * u.adjoint();
}

DiscreteEnsemble make_discrete(std::vector<ComplexMatrix> matrices,
                               std::vector<double> probs) {
  if (matrices.empty()) throw EnsembleError("empty support");
  if (matrices.size() != probs.size())
    throw EnsembleError("matrices and probs length mismatch");
  int dim = static_cast<int>(matrices[0].rows());
  double total = 0.0;
  for (size_t i = 0; i < matrices.size(); ++i) {
    check_square_finite(matrices[i], dim);
    if (probs[i] < 0.0) throw EnsembleError("negative probability");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw EnsembleError("probabilities do not sum to 1");

  DiscreteEnsemble e;
  e.dim = dim;
  for (size_t i = 0; i < matrices.size(); ++i) {
    if (probs[i] == 0.0) continue;  // vanishing weights change the support
    e.matrices.push_back(std::move(matrices[i]));
    e.probs.push_back(probs[i] / total);
  }
  if (e.matrices.empty()) throw EnsembleError("empty support");
  e.invertible = all_invertible(e.matrices);
  e.commuting = pairwise_commuting(e.matrices);
  return e;
}

MarkovEnsemble make_markov(std::vector<ComplexMatrix> matrices,
                           Eigen::MatrixXd transition,
                           Eigen::VectorXd initial) {
  if (matrices.empty()) throw EnsembleError("empty support");
  int k = static_cast<int>(matrices.size());
  int dim = static_cast<int>(matrices[0].rows());
  for (const auto& m : matrices) check_square_finite(m, dim);
  if (transition.rows() != k || transition.cols() != k)
    throw EnsembleError("transition matrix shape mismatch");
  if (initial.size() != k) throw EnsembleError("initial vector length mismatch");
  for (int i = 0; i < k; ++i) {
    double row = 0.0;
    for (int j = 0; j < k; ++j) {
      if (transition(i, j) < 0.0) throw EnsembleError("negative transition probability");
      row += transition(i, j);
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw EnsembleError("non-stochastic transition row");
  }
  double tot = 0.0;
  for (int i = 0; i < k; ++i) {
    if (initial(i) < 0.0) throw EnsembleError("negative initial probability");
    tot += initial(i);
  }
  if (std::abs(tot - 1.0) > 1e-12)
    throw EnsembleError("initial probabilities do not sum to 1");

  MarkovEnsemble e;
  e.dim = dim;
  e.matrices = std::move(matrices);
  e.transition = std::move(transition);
  e.initial = initial / tot;
  e.invertible = all_invertible(e.matrices);
  return e;
}

SamplerEnsemble make_haar_diag(int dim, std::vector<double> diag) {
  if (dim < 1) throw EnsembleError("dimension must be positive");
  if (static_cast<int>(diag.size()) != dim)
    throw EnsembleError("diag length mismatch");
  for (double a : diag)
    if (!(a > 0.0)) throw EnsembleError("diag entries must be positive");
  SamplerEnsemble e;
  e.dim = dim;
  e.kind = SamplerEnsemble::Kind::haar_conjugated_diagonal;
  e.diag = std::move(diag);
  return e;
}

ExpectLogForm expect_log_form(const Ensemble& e, const ComplexMatrix& X,
                              long samples, std::uint64_t seed) {
  int dim = ensemble_dim(e);
  if (X.rows() != dim || X.cols() != dim)
    throw EnsembleError("dimension mismatch between X and ensemble");

  auto term = [&](const ComplexMatrix& L) {
    return clamped_log((X * (L * L.adjoint())).trace().real());
  };

  if (const auto* d = std::get_if<DiscreteEnsemble>(&e)) {
    double v = 0.0;
    for (size_t i = 0; i < d->matrices.size(); ++i)
      v += d->probs[i] * term(d->matrices[i]);
    return {v, 0.0};
  }
  if (const auto* m = std::get_if<MarkovEnsemble>(&e)) {
    // Stationary one-step expectation under the initial distribution.
    double v = 0.0;
    for (size_t i = 0; i < m->matrices.size(); ++i)
      v += m->initial(static_cast<int>(i)) * term(m->matrices[i]);
    return {v, 0.0};
  }
  const auto& s = std::get<SamplerEnsemble>(e);
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < samples; ++i) {
    double t = term(s.sample(rng));
    sum += t;
    sumsq += t * t;
  }
  double mean = sum / samples;
  double var = samples > 1 ? (sumsq - samples * mean * mean) / (samples - 1) : 0.0;
  return {mean, std::sqrt(std::max(var, 0.0) / samples)};
}

namespace {
ComplexMatrix safe_inverse(const ComplexMatrix& m) {
  if (!matrix_invertible(m)) throw EnsembleError("singular support");
  return m.inverse();
}
}  // namespace

DiscreteEnsemble invert_ensemble(const DiscreteEnsemble& e) {
  std::vector<ComplexMatrix> inv;
  inv.reserve(e.matrices.size());
  for (const auto& m : e.matrices) inv.push_back(safe_inverse(m));
  return make_discrete(std::move(inv), e.probs);
}

MarkovEnsemble invert_ensemble(const MarkovEnsemble& e) {
  std::vector<ComplexMatrix> inv;
  inv.reserve(e.matrices.size());
  for (const auto& m : e.matrices) inv.push_back(safe_inverse(m));
  return make_markov(std::move(inv), e.transition, e.initial);
}

Ensemble invert_ensemble(const Ensemble& e) {
  if (const auto* d = std::get_if<DiscreteEnsemble>(&e))
    return invert_ensemble(*d);
  if (const auto* m = std::get_if<MarkovEnsemble>(&e))
    return invert_ensemble(*m);
  const auto& s = std::get<SamplerEnsemble>(e);
  SamplerEnsemble out = s;
  if (s.kind == SamplerEnsemble::Kind::haar_conjugated_diagonal) {
    for (double& a : out.diag) a = 1.0 / a;
  } else {
    auto base = s.custom;
    out.custom = [base](int dim, Rng& rng) {
      return safe_inverse(base(dim, rng));
    };
  }
  return out;
}

Ensemble scale_ensemble(const Ensemble& e, double c) {
  Ensemble out = e;
  if (auto* d = std::get_if<DiscreteEnsemble>(&out)) {
    for (auto& m : d->matrices) m *= c;
  } else if (auto* m = std::get_if<MarkovEnsemble>(&out)) {
    for (auto& mat : m->matrices) mat *= c;
  } else {
    auto& s = std::get<SamplerEnsemble>(out);
    SamplerEnsemble base = std::get<SamplerEnsemble>(e);
    s.kind = SamplerEnsemble::Kind::custom;
    s.custom = [base, c](int dim, Rng& rng) -> ComplexMatrix {
      return c * base.sample(rng);
    };
  }
  return out;
}

bool is_invertible_support(const Ensemble& e) {
  if (const auto* d = std::get_if<DiscreteEnsemble>(&e)) return d->invertible;
  if (const auto* m = std::get_if<MarkovEnsemble>(&e)) return m->invertible;
  const auto& s = std::get<SamplerEnsemble>(e);
  if (s.kind == SamplerEnsemble::Kind::haar_conjugated_diagonal) return true;
  return false;  // not checkable for custom samplers
}

bool is_commuting_support(const Ensemble& e) {
  if (const auto* d = std::get_if<DiscreteEnsemble>(&e)) return d->commuting;
  return false;
}

MatrixStream::MatrixStream(const Ensemble& e, std::uint64_t seed)
    : ensemble_(e), rng_(seed) {
  if (const auto* m = std::get_if<MarkovEnsemble>(&ensemble_))
    state_ = rng_.categorical(m->initial);
}

const ComplexMatrix& MatrixStream::next() {
  if (const auto* d = std::get_if<DiscreteEnsemble>(&ensemble_))
    return d->matrices[rng_.categorical(d->probs)];
  if (const auto* m = std::get_if<MarkovEnsemble>(&ensemble_)) {
    const ComplexMatrix& out = m->matrices[state_];
    state_ = rng_.categorical(m->transition.row(state_));
    return out;
  }
  scratch_ = std::get<SamplerEnsemble>(ensemble_).sample(rng_);
  return scratch_;
}

}  // namespace lyap
