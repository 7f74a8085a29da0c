#include "lyapbound/hmm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lyapbound/bounds.hpp"
#include "lyapbound/ensemble.hpp"
#include "lyapbound/parallel.hpp"
#include "lyapbound/rng.hpp"

namespace lyap {

namespace {

void check_row_stochastic(const Eigen::MatrixXd& m, const char* name) {
  for (int r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (int c = 0; c < m.cols(); ++c) {
      if (m(r, c) < -1e-12)
        throw EnsembleError(std::string(name) + " has a negative entry");
      s += m(r, c);
    }
    if (std::abs(s - 1.0) > 1e-10)
      throw EnsembleError(std::string(name) + " rows must sum to 1");
  }
}

}  // namespace

HmmModel make_hmm(Eigen::MatrixXd M, Eigen::MatrixXd W) {
  if (M.rows() != M.cols()) throw EnsembleError("M must be square");
  if (W.rows() != M.rows())
    throw EnsembleError("W must have one row per hidden state");
  check_row_stochastic(M, "M");
  check_row_stochastic(W, "W");
  int n = static_cast<int>(M.rows());
  // stationary distribution: mu^T M = mu^T, sum mu = 1
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = M.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.bottomRows(1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  Eigen::VectorXd mu = a.colPivHouseholderQr().solve(b);
  for (int i = 0; i < n; ++i) mu(i) = std::max(mu(i), 0.0);
  mu /= mu.sum();
  return {std::move(M), std::move(W), std::move(mu)};
}

std::vector<Eigen::MatrixXd> transfer_matrices(const HmmModel& model) {
  int nx = model.num_states(), ny = model.num_symbols();
  std::vector<Eigen::MatrixXd> out;
  for (int y = 0; y < ny; ++y) {
    Eigen::MatrixXd a(nx, nx);
    for (int x = 0; x < nx; ++x)
      for (int xp = 0; xp < nx; ++xp) a(x, xp) = model.M(x, xp) * model.W(xp, y);
    out.push_back(std::move(a));
  }
  return out;
}

HmmMcEstimate entropy_rate_mc(const HmmModel& model, int n, int trials,
                              std::uint64_t seed) {
  if (n < 1 || trials < 1)
    throw EnsembleError("n and trials must be at least 1");
  int nx = model.num_states(), ny = model.num_symbols();
  auto atoms = transfer_matrices(model);
  std::vector<double> vals(trials);
  parallel_for(trials, [&](int t) {
    Rng rng(seed + static_cast<std::uint64_t>(t));
    std::vector<double> mu(model.mu.data(), model.mu.data() + nx);
    int x = rng.categorical(mu);
    double neg_log = 0.0;
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(nx);
    for (int step = 0; step < n; ++step) {
      std::vector<double> wrow(ny);
      for (int y = 0; y < ny; ++y) wrow[y] = model.W(x, y);
      int y = rng.categorical(wrow);
      if (step == 0) {
        for (int i = 0; i < nx; ++i) pi(i) = model.mu(i) * model.W(i, y);
      } else {
        pi = pi * atoms[y];
      }
      double c = pi.sum();
      neg_log -= std::log(c);
      pi /= c;
      std::vector<double> mrow(nx);
      for (int xp = 0; xp < nx; ++xp) mrow[xp] = model.M(x, xp);
      x = rng.categorical(mrow);
    }
    vals[t] = neg_log / n;
  });
  double sum = 0.0, sumsq = 0.0;
  for (double v : vals) {
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / trials;
  double var = trials > 1 ? (sumsq - trials * mean * mean) / (trials - 1) : 0.0;
  return {mean, std::sqrt(std::max(var, 0.0) / trials)};
}

namespace {

// Predictive observation law one step ahead of belief pi.
std::vector<double> observation_law(const HmmModel& model,
                                    const Eigen::RowVectorXd& pi) {
  Eigen::RowVectorXd next = pi * model.M;
  std::vector<double> p(model.num_symbols(), 0.0);
  for (int y = 0; y < model.num_symbols(); ++y)
    for (int x = 0; x < model.num_states(); ++x)
      p[y] += next(x) * model.W(x, y);
  return p;
}

// Per-step bound value at a fixed belief, on the 2-gamma scale.
double belief_term(const HmmModel& model,
                   const std::vector<Eigen::MatrixXd>& atoms,
                   const Eigen::RowVectorXd& pi, bool upper,
                   const EntropyBoundOptions& opts) {
  std::vector<double> law = observation_law(model, pi);
  std::vector<ComplexMatrix> ms;
  std::vector<double> ps;
  for (size_t y = 0; y < law.size(); ++y) {
    if (law[y] <= 1e-15) continue;
    ms.push_back(atoms[y].cast<std::complex<double>>());
    ps.push_back(law[y]);
  }
  Ensemble cond = make_discrete(std::move(ms), ps);
  BoundOptions bo;
  bo.tol = opts.fw_tol;
  bo.max_iter = opts.fw_max_iter;
  bo.restarts = 16;
  bo.seed = opts.seed;
  if (upper) return 2.0 * convex_upper_fw(cond, bo).value;
  return 2.0 * rank_one_lower(cond, bo).value;
}

// Grid plus local pattern refinement over the probability simplex.
double optimize_simplex(int nx, const std::function<double(const Eigen::RowVectorXd&)>& f,
                        bool maximize) {
  double sign = maximize ? 1.0 : -1.0;
  double best = -std::numeric_limits<double>::infinity();
  Eigen::RowVectorXd best_pi = Eigen::RowVectorXd::Constant(nx, 1.0 / nx);

  auto consider = [&](const Eigen::RowVectorXd& pi) {
    double v = sign * f(pi);
    if (v > best) {
      best = v;
      best_pi = pi;
    }
  };

  if (nx == 2) {
    int grid = 200;
    for (int i = 0; i <= grid; ++i) {
      Eigen::RowVectorXd pi(2);
      pi << static_cast<double>(i) / grid, 1.0 - static_cast<double>(i) / grid;
      consider(pi);
    }
  } else if (nx == 3) {
    int grid = 50;
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j <= grid - i; ++j) {
        Eigen::RowVectorXd pi(3);
        pi << static_cast<double>(i) / grid, static_cast<double>(j) / grid,
            static_cast<double>(grid - i - j) / grid;
        consider(pi);
      }
  } else {
    Rng rng(7);
    consider(Eigen::RowVectorXd::Constant(nx, 1.0 / nx));
    for (int s = 0; s < 200; ++s) {
      Eigen::RowVectorXd pi(nx);
      double tot = 0.0;
      for (int i = 0; i < nx; ++i) {
        pi(i) = -std::log(std::max(rng.uniform(), 1e-300));
        tot += pi(i);
      }
      consider(pi / tot);
    }
  }

  // coordinate pattern search around the incumbent
  double h = 0.05;
  while (h > 1e-6) {
    bool moved = false;
    for (int i = 0; i < nx && !moved; ++i)
      for (int j = 0; j < nx && !moved; ++j) {
        if (i == j) continue;
        Eigen::RowVectorXd pi = best_pi;
        double d = std::min(h, pi(j));
        if (d <= 0.0) continue;
        pi(i) += d;
        pi(j) -= d;
        double v = sign * f(pi);
        if (v > best + 1e-14) {
          best = v;
          best_pi = pi;
          moved = true;
        }
      }
    if (!moved) h *= 0.5;
  }
  return sign * best;
}

}  // namespace

EntropyRateReport entropy_rate_bounds(const HmmModel& model,
                                      const EntropyBoundOptions& opts) {
  auto atoms = transfer_matrices(model);
  int nx = model.num_states();
  int ny = model.num_symbols();

  bool invertible = true;
  for (const auto& a : atoms) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double smax = svd.singularValues()(0);
    if (smin <= 0.0 || smax / smin > 1e12) invertible = false;
  }

  EntropyRateReport rep;
  double gamma1_upper = optimize_simplex(
      nx,
      [&](const Eigen::RowVectorXd& pi) {
        return belief_term(model, atoms, pi, true, opts);
      },
      true) / 2.0;
  rep.lower = std::max(-gamma1_upper, 0.0);

  if (invertible) {
    double gammad_lower = optimize_simplex(
        nx,
        [&](const Eigen::RowVectorXd& pi) {
          return belief_term(model, atoms, pi, false, opts);
        },
        false) / 2.0;
    rep.upper = std::min(-gammad_lower, std::log(static_cast<double>(ny)));
  } else {
    // Singular transfer support: no minimal-exponent bound, fall back to the
    // maximum-entropy ceiling.
    rep.upper = std::log(static_cast<double>(ny));
    rep.note += "; singular transfer support, upper from alphabet size";
  }

  rep.mc = entropy_rate_mc(model, opts.mc_n, opts.mc_trials, opts.seed);
  return rep;
}

}  // namespace lyap
