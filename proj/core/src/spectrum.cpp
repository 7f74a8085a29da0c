#include "lyapbound/spectrum.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lyapbound/parallel.hpp"

namespace lyap {

namespace {

// Relative threshold below which an R diagonal entry is treated as a rank
// deficiency of the propagated product.
constexpr double kDeficiencyRel = 1e-13;

struct TrialResult {
  Eigen::VectorXd gammas;          // per-step log growth rates
  std::vector<bool> deficient;
};

TrialResult run_trial(const Ensemble& e, int n, std::uint64_t seed) {
  int d = ensemble_dim(e);
  MatrixStream stream(e, seed);
  ComplexMatrix q = ComplexMatrix::Identity(d, d);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  std::vector<bool> deficient(d, false);
  for (int step = 0; step < n; ++step) {
    ComplexMatrix m = stream.next() * q;
    Eigen::HouseholderQR<ComplexMatrix> qr(m);
    q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR();
    double diag_max = 0.0;
    for (int k = 0; k < d; ++k) diag_max = std::max(diag_max, std::abs(r(k, k)));
    for (int k = 0; k < d; ++k) {
      double a = std::abs(r(k, k));
      if (a <= kDeficiencyRel * diag_max || a == 0.0) {
        deficient[k] = true;
      } else if (!deficient[k]) {
        acc(k) += std::log(a);
      }
      // keep Q's column sign convention consistent with nonnegative R diag
      if (a > 0.0) q.col(k) *= r(k, k) / a;
    }
  }
  TrialResult out;
  out.gammas = acc / n;
  out.deficient = std::move(deficient);
  return out;
}

SpectrumEstimate reduce_trials(const std::vector<TrialResult>& results, int d,
                               int n, int trials, std::uint64_t seed) {
  SpectrumEstimate est;
  est.gammas = Eigen::VectorXd::Zero(d);
  est.stderrs = Eigen::VectorXd::Zero(d);
  est.deficient_fraction = Eigen::VectorXd::Zero(d);
  est.n = n;
  est.trials = trials;
  est.seed = seed;
  for (int k = 0; k < d; ++k) {
    int bad = 0;
    double sum = 0.0, sumsq = 0.0;
    for (const auto& r : results) {
      if (r.deficient[k]) {
        ++bad;
      } else {
        sum += r.gammas(k);
        sumsq += r.gammas(k) * r.gammas(k);
      }
    }
    est.deficient_fraction(k) = static_cast<double>(bad) / trials;
    if (bad > 0) {
      // no finite estimate is meaningful once the product loses rank
      est.gammas(k) = kNegInfSentinel;
      est.stderrs(k) = 0.0;
    } else {
      double mean = sum / trials;
      double var =
          trials > 1 ? (sumsq - trials * mean * mean) / (trials - 1) : 0.0;
      est.gammas(k) = mean;
      est.stderrs(k) = std::sqrt(std::max(var, 0.0) / trials);
    }
  }
  // enforce the ordering invariant (ties from noise may micro-invert)
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return est.gammas(a) > est.gammas(b);
  });
  Eigen::VectorXd g(d), s(d), f(d);
  for (int k = 0; k < d; ++k) {
    g(k) = est.gammas(idx[k]);
    s(k) = est.stderrs(idx[k]);
    f(k) = est.deficient_fraction(idx[k]);
  }
  est.gammas = g;
  est.stderrs = s;
  est.deficient_fraction = f;
  return est;
}

}  // namespace

SpectrumEstimate lyapunov_spectrum_qr(const Ensemble& e, int n, int trials,
                                      std::uint64_t seed) {
  if (n < 1 || trials < 1)
    throw EnsembleError("n and trials must be at least 1");
  int d = ensemble_dim(e);
  std::vector<TrialResult> results(trials);
  parallel_for(trials, [&](int t) {
    results[t] = run_trial(e, n, seed + static_cast<std::uint64_t>(t));
  });
  return reduce_trials(results, d, n, trials, seed);
}

GammaEstimate nonasymptotic_gamma(const Ensemble& e, int k, int n, int trials,
                                  std::uint64_t seed) {
  int d = ensemble_dim(e);
  if (k < 1 || k > d) throw EnsembleError("singular value index out of range");
  SpectrumEstimate est = lyapunov_spectrum_qr(e, n, trials, seed);
  return {est.gammas(k - 1), est.stderrs(k - 1)};
}

namespace {

void index_subsets(int d, int j, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(j);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == j) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i <= d - (j - depth); ++i) {
      cur[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

}  // namespace

ComplexMatrix exterior_power(const ComplexMatrix& L, int j) {
  int d = static_cast<int>(L.rows());
  if (j < 1 || j > d) throw EnsembleError("exterior power order out of range");
  std::vector<std::vector<int>> subsets;
  index_subsets(d, j, subsets);
  int m = static_cast<int>(subsets.size());
  ComplexMatrix out(m, m);
  ComplexMatrix minor(j, j);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      for (int a = 0; a < j; ++a)
        for (int b = 0; b < j; ++b)
          minor(a, b) = L(subsets[r][a], subsets[c][b]);
      out(r, c) = minor.determinant();
    }
  return out;
}

SpectrumEstimate spectrum_via_exterior(const Ensemble& e, int n, int trials,
                                       std::uint64_t seed) {
  int d = ensemble_dim(e);
  if (d > 6) throw EnsembleError("exterior-power estimator limited to d <= 6");
  if (n < 1 || trials < 1)
    throw EnsembleError("n and trials must be at least 1");

  // Wedge powers of the discrete support are precomputed; sampler draws are
  // wedged on the fly.
  const auto* disc = std::get_if<DiscreteEnsemble>(&e);
  const auto* markov = std::get_if<MarkovEnsemble>(&e);
  std::vector<std::vector<ComplexMatrix>> wedges;  // [atom][j-1]
  if (disc || markov) {
    const auto& mats = disc ? disc->matrices : markov->matrices;
    wedges.resize(mats.size());
    for (size_t i = 0; i < mats.size(); ++i)
      for (int j = 1; j <= d; ++j)
        wedges[i].push_back(exterior_power(mats[i], j));
  }

  // Partial sums xi_j over each trial, all wedge orders driven by the same
  // matrix sequence.
  std::vector<Eigen::VectorXd> xi(trials);
  std::vector<std::vector<bool>> dead(trials);
  parallel_for(trials, [&](int t) {
    Rng rng(seed + static_cast<std::uint64_t>(t));
    int state = markov ? rng.categorical(markov->initial) : -1;
    std::vector<Eigen::VectorXcd> frames(d);
    for (int j = 1; j <= d; ++j) {
      long m = 1;
      for (int i = 0; i < j; ++i) m = m * (d - i) / (i + 1);
      Eigen::VectorXcd v(m);
      // random start so a deterministic diagonal atom cannot pin the power
      // iteration to a non-dominant eigendirection
      for (long i = 0; i < m; ++i) v(i) = rng.complex_normal();
      frames[j - 1] = v / v.norm();
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    std::vector<bool> gone(d, false);
    std::vector<ComplexMatrix> sampled;
    for (int step = 0; step < n; ++step) {
      const std::vector<ComplexMatrix>* step_wedges = nullptr;
      if (disc) {
        step_wedges = &wedges[rng.categorical(disc->probs)];
      } else if (markov) {
        step_wedges = &wedges[state];
        state = rng.categorical(markov->transition.row(state));
      } else {
        ComplexMatrix L = std::get<SamplerEnsemble>(e).sample(rng);
        sampled.clear();
        for (int j = 1; j <= d; ++j) sampled.push_back(exterior_power(L, j));
        step_wedges = &sampled;
      }
      for (int j = 1; j <= d; ++j) {
        if (gone[j - 1]) continue;
        Eigen::VectorXcd v = (*step_wedges)[j - 1] * frames[j - 1];
        double nv = v.norm();
        if (nv < kTraceFloor) {
          gone[j - 1] = true;
          continue;
        }
        acc(j - 1) += std::log(nv);
        frames[j - 1] = v / nv;
      }
    }
    xi[t] = acc / n;
    dead[t] = std::move(gone);
  });

  SpectrumEstimate est;
  est.gammas = Eigen::VectorXd::Zero(d);
  est.stderrs = Eigen::VectorXd::Zero(d);
  est.deficient_fraction = Eigen::VectorXd::Zero(d);
  est.n = n;
  est.trials = trials;
  est.seed = seed;
  for (int k = 0; k < d; ++k) {
    int bad = 0;
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
      if (dead[t][k] || (k > 0 && dead[t][k - 1])) {
        ++bad;
        continue;
      }
      double g = (k == 0) ? xi[t](0) : xi[t](k) - xi[t](k - 1);
      sum += g;
      sumsq += g * g;
    }
    est.deficient_fraction(k) = static_cast<double>(bad) / trials;
    if (bad > 0) {
      est.gammas(k) = kNegInfSentinel;
    } else {
      double mean = sum / trials;
      double var =
          trials > 1 ? (sumsq - trials * mean * mean) / (trials - 1) : 0.0;
      est.gammas(k) = mean;
      est.stderrs(k) = std::sqrt(std::max(var, 0.0) / trials);
    }
  }
  return est;
}

}  // namespace lyap
