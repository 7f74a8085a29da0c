#include "lyapbound/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lyapbound/parallel.hpp"

namespace lyap {

namespace {

// Weighted Hermitian atoms A_i = L_i L_i+; the whole bounds machinery works
// on this reduction. Sampler ensembles are frozen into an empirical measure.
struct SquaredEnsemble {
  int dim = 0;
  std::vector<double> w;
  std::vector<ComplexMatrix> A;
};

SquaredEnsemble squared_atoms(const Ensemble& e, long samples,
                              std::uint64_t seed) {
  SquaredEnsemble sq;
  sq.dim = ensemble_dim(e);
  if (const auto* d = std::get_if<DiscreteEnsemble>(&e)) {
    for (size_t i = 0; i < d->matrices.size(); ++i) {
      sq.w.push_back(d->probs[i]);
      sq.A.push_back(d->matrices[i] * d->matrices[i].adjoint());
    }
  } else if (const auto* m = std::get_if<MarkovEnsemble>(&e)) {
    for (size_t i = 0; i < m->matrices.size(); ++i) {
      sq.w.push_back(m->initial(static_cast<int>(i)));
      sq.A.push_back(m->matrices[i] * m->matrices[i].adjoint());
    }
  } else {
    const auto& s = std::get<SamplerEnsemble>(e);
    Rng rng(seed);
    double wi = 1.0 / static_cast<double>(samples);
    for (long i = 0; i < samples; ++i) {
      ComplexMatrix L = s.sample(rng);
      sq.w.push_back(wi);
      sq.A.push_back(L * L.adjoint());
    }
  }
  return sq;
}

double objective(const SquaredEnsemble& sq, const ComplexMatrix& X) {
  double f = 0.0;
  for (size_t i = 0; i < sq.A.size(); ++i)
    f += sq.w[i] * clamped_log((X * sq.A[i]).trace().real());
  return f;
}

ComplexMatrix gradient(const SquaredEnsemble& sq, const ComplexMatrix& X) {
  ComplexMatrix g = ComplexMatrix::Zero(sq.dim, sq.dim);
  for (size_t i = 0; i < sq.A.size(); ++i) {
    double t = (X * sq.A[i]).trace().real();
    g += (sq.w[i] / std::max(t, kTraceFloor)) * sq.A[i];
  }
  return g;
}

ComplexMatrix expected_square(const SquaredEnsemble& sq) {
  ComplexMatrix m = ComplexMatrix::Zero(sq.dim, sq.dim);
  for (size_t i = 0; i < sq.A.size(); ++i) m += sq.w[i] * sq.A[i];
  return m;
}

struct FwResult {
  ComplexMatrix X;
  double f = 0.0;
  double gap = 0.0;       // at the reported X
  double best_ub = 0.0;   // min over visited iterates of f + gap
  long iterations = 0;
  bool converged = false;
};

// Line search on the concave 1-D slice t -> f((1-t) X + t S): bisection on
// the derivative, falling back to the open-loop step when the derivative is
// not finite (clamped logs).
double fw_line_search(const SquaredEnsemble& sq, const ComplexMatrix& X,
                      const ComplexMatrix& S, long iter) {
  std::vector<double> tx(sq.A.size()), ts(sq.A.size());
  for (size_t i = 0; i < sq.A.size(); ++i) {
    tx[i] = (X * sq.A[i]).trace().real();
    ts[i] = (S * sq.A[i]).trace().real();
  }
  auto deriv = [&](double t) {
    double d = 0.0;
    for (size_t i = 0; i < sq.A.size(); ++i) {
      double v = (1.0 - t) * tx[i] + t * ts[i];
      d += sq.w[i] * (ts[i] - tx[i]) / std::max(v, kTraceFloor);
    }
    return d;
  };
  double d0 = deriv(0.0);
  if (!std::isfinite(d0)) return 2.0 / (iter + 2.0);
  if (d0 <= 0.0) return 0.0;
  if (deriv(1.0) >= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    double mid = 0.5 * (lo + hi);
    double dm = deriv(mid);
    if (!std::isfinite(dm)) return 2.0 / (iter + 2.0);
    (dm > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FwResult frank_wolfe_max(const SquaredEnsemble& sq, double tol,
                         long max_iter) {
  int d = sq.dim;
  ComplexMatrix X = ComplexMatrix::Identity(d, d) / d;
  FwResult best;
  best.best_ub = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig;

  // Multiplicative (exponentiated-gradient) polish steps are interleaved
  // once plain Frank-Wolfe progress stalls; the certificate f + gap stays
  // valid at every iterate, so the schedule only affects speed.
  long stall = 0;
  double last_gap = std::numeric_limits<double>::infinity();
  for (long t = 0; t < max_iter; ++t) {
    double f = objective(sq, X);
    ComplexMatrix G = gradient(sq, X);
    eig.compute(G);
    double lam_top = eig.eigenvalues()(d - 1);
    double gap = lam_top - (G * X).trace().real();
    if (gap < 0.0) gap = 0.0;
    if (f + gap < best.best_ub) {
      best.best_ub = f + gap;
      best.X = X;
      best.f = f;
      best.gap = gap;
    }
    best.iterations = t + 1;
    if (gap <= tol) {
      best.converged = true;
      return best;
    }
    if (gap > 0.9 * last_gap) ++stall; else stall = 0;
    last_gap = gap;

    if (stall >= 8) {
      // matrix exponentiated gradient step with a curvature-scaled rate
      double eta = 1.0 / std::max(lam_top, 1e-12);
      eig.compute(X);
      ComplexMatrix logX = ComplexMatrix::Zero(d, d);
      for (int k = 0; k < d; ++k) {
        double lk = std::max(eig.eigenvalues()(k), 1e-18);
        logX += std::log(lk) * (eig.eigenvectors().col(k) *
                                eig.eigenvectors().col(k).adjoint());
      }
      ComplexMatrix H = logX + eta * G;
      eig.compute((H + H.adjoint()) / 2.0);
      double shift = eig.eigenvalues()(d - 1);
      ComplexMatrix Xn = ComplexMatrix::Zero(d, d);
      for (int k = 0; k < d; ++k)
        Xn += std::exp(eig.eigenvalues()(k) - shift) *
              (eig.eigenvectors().col(k) * eig.eigenvectors().col(k).adjoint());
      Xn /= Xn.trace().real();
      if (objective(sq, Xn) > f) {
        X = Xn;
        continue;
      }
      stall = 0;
    }

    Eigen::VectorXcd s = eig.eigenvectors().col(d - 1);  // from eig of G
    ComplexMatrix S = s * s.adjoint();
    double step = fw_line_search(sq, X, S, t);
    if (step <= 0.0) step = 2.0 / (t + 2.0);
    X = (1.0 - step) * X + step * S;
    X = (X + X.adjoint()) / 2.0;
  }
  return best;
}

double top_eigenvalue(const ComplexMatrix& H, Eigen::VectorXcd* vec = nullptr) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(H);
  if (vec) *vec = eig.eigenvectors().col(H.rows() - 1);
  return eig.eigenvalues()(H.rows() - 1);
}

double bottom_eigenvalue(const ComplexMatrix& H,
                         Eigen::VectorXcd* vec = nullptr) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(H);
  if (vec) *vec = eig.eigenvectors().col(0);
  return eig.eigenvalues()(0);
}

}  // namespace

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  return {ComplexMatrix::Identity(d, d) / d};
}

DensityMatrix DensityMatrix::projector(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd u = v / v.norm();
  return {u * u.adjoint()};
}

DensityMatrix DensityMatrix::validated(ComplexMatrix m) {
  if (m.rows() != m.cols()) throw EnsembleError("density matrix not square");
  if ((m - m.adjoint()).norm() > 1e-12 * std::max(1.0, m.norm()))
    throw EnsembleError("density matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
  if (eig.eigenvalues()(0) < -1e-12)
    throw EnsembleError("density matrix not positive semidefinite");
  if (std::abs(m.trace().real() - 1.0) > 1e-12)
    throw EnsembleError("density matrix trace differs from 1");
  return {std::move(m)};
}

std::pair<BoundReport, BoundReport> trivial_bounds(const Ensemble& e,
                                                   const BoundOptions& o) {
  SquaredEnsemble sq = squared_atoms(e, o.samples, o.seed);
  double up = 0.0, lo = 0.0;
  bool lower_ok = is_invertible_support(e);
  for (size_t i = 0; i < sq.A.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sq.A[i]);
    up += sq.w[i] * clamped_log(eig.eigenvalues()(sq.dim - 1));
    if (lower_ok) lo += sq.w[i] * clamped_log(eig.eigenvalues()(0));
  }
  BoundReport upper, lower;
  upper.value = up / 2.0;
  upper.side = BoundSide::upper_gamma1;
  upper.method = "trivial";
  upper.diagnostics.samples = static_cast<long>(sq.A.size());
  lower.side = BoundSide::lower_gammad;
  lower.method = "trivial";
  lower.diagnostics.samples = static_cast<long>(sq.A.size());
  if (lower_ok) {
    lower.value = lo / 2.0;
  } else {
    lower.value = kNegInfSentinel;
    lower.diagnostics.converged = false;
  }
  return {upper, lower};
}

BoundReport jensen_sdp_upper(const Ensemble& e, const BoundOptions& o) {
  SquaredEnsemble sq = squared_atoms(e, o.samples, o.seed);
  Eigen::VectorXcd v;
  double lam = top_eigenvalue(expected_square(sq), &v);
  BoundReport r;
  r.value = clamped_log(lam) / 2.0;
  r.side = BoundSide::upper_gamma1;
  r.method = "jensen_sdp";
  r.certificate_matrix = v * v.adjoint();
  r.diagnostics.samples = static_cast<long>(sq.A.size());
  return r;
}

BoundReport convex_upper_fw(const Ensemble& e, const BoundOptions& o) {
  SquaredEnsemble sq = squared_atoms(e, o.samples, o.seed);
  double max_a = 0.0;
  for (const auto& a : sq.A) max_a = std::max(max_a, a.norm());
  if (max_a == 0.0) throw EnsembleError("objective identically -inf");
  FwResult fw = frank_wolfe_max(sq, o.tol, o.max_iter);
  BoundReport r;
  r.value = fw.best_ub / 2.0;
  r.side = BoundSide::upper_gamma1;
  r.method = "convex_fw";
  r.certificate_matrix = fw.X;
  r.diagnostics.iterations = fw.iterations;
  r.diagnostics.duality_gap = fw.gap;
  r.diagnostics.samples = static_cast<long>(sq.A.size());
  r.diagnostics.converged = fw.converged;
  return r;
}

namespace {

double rank_one_objective(const SquaredEnsemble& sq,
                          const Eigen::VectorXcd& v) {
  double f = 0.0;
  for (size_t i = 0; i < sq.A.size(); ++i)
    f += sq.w[i] * clamped_log((v.adjoint() * sq.A[i] * v)(0).real());
  return f;
}

// Projected gradient on the sphere with backtracking; sign = +1 ascends.
Eigen::VectorXcd sphere_optimize(const SquaredEnsemble& sq,
                                 Eigen::VectorXcd v, double sign,
                                 int max_iter = 500) {
  v /= v.norm();
  double fv = sign * rank_one_objective(sq, v);
  double eta = 0.5;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(v.size());
    for (size_t i = 0; i < sq.A.size(); ++i) {
      Eigen::VectorXcd av = sq.A[i] * v;
      double t = std::max((v.adjoint() * av)(0).real(), kTraceFloor);
      g += (2.0 * sq.w[i] / t) * av;
    }
    g *= sign;
    Eigen::VectorXcd r = g - v * (v.adjoint() * g)(0);
    double rn = r.norm();
    if (rn < 1e-12) break;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::VectorXcd u = v + eta * r;
      u /= u.norm();
      double fu = sign * rank_one_objective(sq, u);
      if (fu > fv + 1e-12) {
        v = u;
        fv = fu;
        moved = true;
        if (bt == 0) eta *= 1.5;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return v;
}

bool real_support(const SquaredEnsemble& sq) {
  for (const auto& a : sq.A)
    if (a.imag().norm() > 1e-14 * std::max(1.0, a.real().norm())) return false;
  return true;
}

// Golden-section refinement of a 1-D objective around x0 with radius h.
double golden_refine(const std::function<double(double)>& f, double x0,
                     double h, double tol, bool maximize) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = x0 - h, b = x0 + h;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  auto val = [&](double x) { return maximize ? f(x) : -f(x); };
  double fc = val(c), fd = val(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a); fc = val(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a); fd = val(d);
    }
  }
  return 0.5 * (a + b);
}

// Simultaneous diagonalizer of a commuting Hermitian family, or nullopt.
std::optional<ComplexMatrix> common_eigenbasis(const SquaredEnsemble& sq) {
  ComplexMatrix probe = ComplexMatrix::Zero(sq.dim, sq.dim);
  double c = 1.0;
  for (const auto& a : sq.A) {
    probe += c * a;
    c *= 0.5772156649;  // generic coefficients split degeneracies
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(probe);
  ComplexMatrix u = eig.eigenvectors();
  for (const auto& a : sq.A) {
    ComplexMatrix t = u.adjoint() * a * u;
    ComplexMatrix off = t;
    off.diagonal().setZero();
    if (off.norm() > 1e-8 * std::max(1.0, t.norm())) return std::nullopt;
  }
  return u;
}

BoundReport rank_one_bound(const Ensemble& e, const BoundOptions& o,
                           bool upper) {
  SquaredEnsemble sq = squared_atoms(e, o.samples, o.seed);
  double sign = upper ? 1.0 : -1.0;
  std::vector<double> values;
  Eigen::VectorXcd best_v;
  double best = -std::numeric_limits<double>::infinity();

  bool commuting_group = is_commuting_support(e) && is_invertible_support(e);
  if (commuting_group) {
    // Diagonal-group restriction: candidates are the common eigenvectors.
    if (auto u = common_eigenbasis(sq)) {
      for (int k = 0; k < sq.dim; ++k) {
        Eigen::VectorXcd v = u->col(k);
        double f = sign * rank_one_objective(sq, v);
        values.push_back(f);
        if (f > best) { best = f; best_v = v; }
      }
      BoundReport r;
      r.value = sign * best / 2.0;
      r.side = upper ? BoundSide::upper_gamma1 : BoundSide::lower_gammad;
      r.method = upper ? "rank_one_upper" : "rank_one_lower";
      r.certificate_vector = best_v;
      r.diagnostics.restart_spread =
          *std::max_element(values.begin(), values.end()) -
          *std::min_element(values.begin(), values.end());
      r.diagnostics.samples = static_cast<long>(sq.A.size());
      return r;
    }
  }

  // Warm start from the top eigenvector of E[L L+], then seeded restarts.
  std::vector<Eigen::VectorXcd> starts;
  {
    Eigen::VectorXcd v;
    if (upper) top_eigenvalue(expected_square(sq), &v);
    else bottom_eigenvalue(expected_square(sq), &v);
    starts.push_back(v);
  }
  Rng rng(o.seed);
  for (int s = 0; s < o.restarts; ++s) {
    Eigen::VectorXcd v(sq.dim);
    for (int i = 0; i < sq.dim; ++i) v(i) = rng.complex_normal();
    starts.push_back(v.normalized());
  }
  for (const auto& s : starts) {
    Eigen::VectorXcd v = sphere_optimize(sq, s, sign);
    double f = sign * rank_one_objective(sq, v);
    values.push_back(f);
    if (f > best) { best = f; best_v = v; }
  }

  // Real 2x2 support: sweep the angle parametrization as well.
  if (sq.dim == 2 && real_support(sq)) {
    auto g = [&](double theta) {
      Eigen::VectorXcd v(2);
      v << std::cos(theta), std::sin(theta);
      return sign * rank_one_objective(sq, v);
    };
    int grid = 10000;
    double best_theta = 0.0, best_g = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
      double th = M_PI * i / grid;
      double f = g(th);
      if (f > best_g) { best_g = f; best_theta = th; }
    }
    double th = golden_refine(g, best_theta, M_PI / grid, 1e-12, true);
    double f = g(th);
    values.push_back(f);
    if (f > best) {
      best = f;
      best_v = Eigen::VectorXcd(2);
      best_v << std::cos(th), std::sin(th);
    }
  }

  BoundReport r;
  r.value = sign * best / 2.0;
  r.side = upper ? BoundSide::upper_gamma1 : BoundSide::lower_gammad;
  r.method = upper ? "rank_one_upper" : "rank_one_lower";
  r.certificate_vector = best_v;
  r.diagnostics.restart_spread =
      *std::max_element(values.begin(), values.end()) -
      *std::min_element(values.begin(), values.end());
  r.diagnostics.samples = static_cast<long>(sq.A.size());
  return r;
}

}  // namespace

BoundReport rank_one_upper(const Ensemble& e, const BoundOptions& o) {
  const auto* s = std::get_if<SamplerEnsemble>(&e);
  if (s && !s->compact_support)
    throw EnsembleError("rank-one bound requires compact support");
  if (!is_invertible_support(e) && !std::get_if<DiscreteEnsemble>(&e))
    throw EnsembleError("rank-one bound requires invertible support");
  return rank_one_bound(e, o, true);
}

BoundReport rank_one_lower(const Ensemble& e, const BoundOptions& o) {
  if (!is_invertible_support(e))
    throw EnsembleError("rank-one lower bound requires invertible support");
  return rank_one_bound(e, o, false);
}

BoundReport atom_set_upper(const Ensemble& e,
                           const std::vector<ComplexMatrix>& atoms,
                           const BoundOptions& o) {
  if (atoms.empty()) throw EnsembleError("empty atom set");
  double best = -std::numeric_limits<double>::infinity();
  ComplexMatrix best_x;
  for (const auto& y : atoms) {
    ComplexMatrix x = y.adjoint() * y;
    double tr = x.trace().real();
    if (tr > 0.0) x /= tr;
    double f = expect_log_form(e, x, o.samples, o.seed).value;
    if (f > best) { best = f; best_x = x; }
  }
  BoundReport r;
  r.value = best / 2.0;
  r.side = BoundSide::upper_gamma1;
  r.method = "atom_set";
  r.certificate_matrix = best_x;
  return r;
}

namespace {

bool nearly(double a, double b, double tol = 1e-10) {
  return std::abs(a - b) <= tol;
}

ComplexMatrix sl2_point(double a, double c) {
  double s = std::sqrt(std::max(a * c - 1.0, 0.0));
  ComplexMatrix x(2, 2);
  x << a, s, s, c;
  return x / (a + c);
}

ComplexMatrix diag_conjugacy_point(double c) {
  ComplexMatrix x(2, 2);
  x << c, 0, 0, 1.0 / c;
  return x / (c + 1.0 / c);
}

}  // namespace

bool group_family_member(const Ensemble& e, GroupFamily family) {
  const auto* d = std::get_if<DiscreteEnsemble>(&e);
  if (!d || d->dim != 2) return false;
  for (const auto& m : d->matrices) {
    if (m.imag().norm() > 1e-10) return false;
    std::complex<double> det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (!nearly(det.real(), 1.0) || !nearly(det.imag(), 0.0)) return false;
    if (family == GroupFamily::diag_conjugacy) {
      bool diag = nearly(std::abs(m(0, 1)), 0.0) && nearly(std::abs(m(1, 0)), 0.0);
      bool anti = nearly(std::abs(m(0, 0)), 0.0) && nearly(std::abs(m(1, 1)), 0.0);
      if (!diag && !anti) return false;
    }
  }
  return true;
}

std::pair<BoundReport, BoundReport> group_parametric_bounds(
    const Ensemble& e, GroupFamily family, int grid, double refine_tol) {
  if (!group_family_member(e, family))
    throw EnsembleError("support does not lie in the requested group family");
  SquaredEnsemble sq = squared_atoms(e, 0, 0);

  const double lo = std::log(1e-6), hi = std::log(1e6);
  auto optimize = [&](bool maximize) {
    double best = maximize ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    std::vector<double> best_p;
    auto consider = [&](double f, std::vector<double> p) {
      if (maximize ? f > best : f < best) {
        best = f;
        best_p = std::move(p);
      }
    };
    if (family == GroupFamily::diag_conjugacy) {
      auto f1 = [&](double s) {
        return objective(sq, diag_conjugacy_point(std::exp(s)));
      };
      for (int i = 0; i < grid; ++i) {
        double s = lo + (hi - lo) * i / (grid - 1);
        consider(f1(s), {std::exp(s)});
      }
      double s0 = std::log(best_p[0]);
      double h = (hi - lo) / (grid - 1);
      double s = golden_refine(f1, s0, h, refine_tol, maximize);
      consider(f1(s), {std::exp(s)});
    } else {
      int side = 120;  // coarse 2-D scan, then coordinate refinement
      auto f2 = [&](double sa, double sc) {
        double a = std::exp(sa), c = std::exp(sc);
        if (a * c < 1.0) {
          // clamp onto the boundary ac = 1
          double mid = 0.5 * (sa + sc);
          a = std::exp(sa - mid);
          c = std::exp(sc - mid);
        }
        return objective(sq, sl2_point(a, c));
      };
      double bsa = 0.0, bsc = 0.0;
      bool first = true;
      for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) {
          double sa = lo + (hi - lo) * i / (side - 1);
          double sc = lo + (hi - lo) * j / (side - 1);
          double f = f2(sa, sc);
          if (first || (maximize ? f > best : f < best)) {
            first = false;
            best = f;
            bsa = sa;
            bsc = sc;
          }
        }
      double h = (hi - lo) / (side - 1);
      for (int sweep = 0; sweep < 60; ++sweep) {
        double nsa = golden_refine([&](double s) { return f2(s, bsc); }, bsa,
                                   h, refine_tol, maximize);
        double nsc = golden_refine([&](double s) { return f2(nsa, s); }, bsc,
                                   h, refine_tol, maximize);
        double moved = std::abs(nsa - bsa) + std::abs(nsc - bsc);
        bsa = nsa;
        bsc = nsc;
        h = std::max(h * 0.5, 1e-9);
        if (moved < refine_tol) break;
      }
      best = f2(bsa, bsc);
      double a = std::exp(bsa), c = std::exp(bsc);
      if (a * c < 1.0) {
        double mid = std::sqrt(a * c);
        a /= mid;
        c /= mid;
      }
      best_p = {a, c};
    }
    return std::make_pair(best, best_p);
  };

  auto [up, up_p] = optimize(true);
  auto [lo_v, lo_p] = optimize(false);

  BoundReport upper, lower;
  upper.value = up / 2.0;
  upper.side = BoundSide::upper_gamma1;
  upper.method = family == GroupFamily::sl2_real ? "group:sl2" : "group:diag";
  upper.certificate_params = up_p;
  lower.value = lo_v / 2.0;
  lower.side = BoundSide::lower_gammad;
  lower.method = upper.method;
  lower.certificate_params = lo_p;
  return {upper, lower};
}

std::pair<double, double> commutative_closed_form(const Ensemble& e,
                                                  const BoundOptions& o) {
  if (!is_commuting_support(e) && !std::get_if<SamplerEnsemble>(&e))
    throw EnsembleError("support does not commute");
  if (!is_invertible_support(e))
    throw EnsembleError("singular support: matrix logarithm undefined");
  SquaredEnsemble sq = squared_atoms(e, o.samples, o.seed);
  ComplexMatrix mean_log = ComplexMatrix::Zero(sq.dim, sq.dim);
  for (size_t i = 0; i < sq.A.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sq.A[i]);
    double lam_top = eig.eigenvalues()(sq.dim - 1);
    ComplexMatrix lg = ComplexMatrix::Zero(sq.dim, sq.dim);
    for (int k = 0; k < sq.dim; ++k) {
      double lam = eig.eigenvalues()(k);
      if (lam < 1e-14 * lam_top)
        throw EnsembleError("singular support: matrix logarithm undefined");
      lg += std::log(lam) * (eig.eigenvectors().col(k) *
                             eig.eigenvectors().col(k).adjoint());
    }
    mean_log += sq.w[i] * lg;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(mean_log);
  return {eig.eigenvalues()(sq.dim - 1) / 2.0, eig.eigenvalues()(0) / 2.0};
}

namespace {

// Best (smallest) upper and best (largest) lower bound over the applicable
// direct methods.
std::pair<BoundReport, BoundReport> best_direct_bounds(const Ensemble& e,
                                                       const BoundOptions& o) {
  std::vector<BoundReport> uppers, lowers;
  auto tb = trivial_bounds(e, o);
  uppers.push_back(tb.first);
  lowers.push_back(tb.second);
  uppers.push_back(jensen_sdp_upper(e, o));
  uppers.push_back(convex_upper_fw(e, o));
  uppers.push_back(rank_one_upper(e, o));
  lowers.push_back(rank_one_lower(e, o));
  for (GroupFamily fam : {GroupFamily::sl2_real, GroupFamily::diag_conjugacy}) {
    if (group_family_member(e, fam)) {
      auto [gu, gl] = group_parametric_bounds(e, fam);
      uppers.push_back(gu);
      lowers.push_back(gl);
    }
  }
  BoundReport bu = uppers[0], bl = lowers[0];
  for (const auto& r : uppers)
    if (r.value < bu.value) bu = r;
  for (const auto& r : lowers)
    if (r.value > bl.value) bl = r;
  return {bu, bl};
}

}  // namespace

std::pair<BoundReport, BoundReport> inverse_improved_bounds(
    const Ensemble& e, const BoundOptions& o) {
  if (!is_invertible_support(e))
    throw EnsembleError("singular support: inverse improvement unavailable");
  auto [du, dl] = best_direct_bounds(e, o);
  Ensemble inv = invert_ensemble(e);
  auto [iu, il] = best_direct_bounds(inv, o);

  BoundReport upper = du, lower = dl;
  if (-il.value < du.value) {
    upper = il;
    upper.value = -il.value;
    upper.method = "inverse(" + il.method + ")";
  }
  upper.side = BoundSide::upper_gamma1;
  if (-iu.value > dl.value) {
    lower = iu;
    lower.value = -iu.value;
    lower.method = "inverse(" + iu.method + ")";
  }
  lower.side = BoundSide::lower_gammad;
  return {upper, lower};
}

std::pair<BoundReport, BoundReport> nonasymptotic_bounds(
    const Ensemble& e, int n, const BoundOptions& o) {
  if (n < 1) throw EnsembleError("n must be at least 1");
  int d = ensemble_dim(e);
  double first_term =
      expect_log_form(e, ComplexMatrix::Identity(d, d), o.samples, o.seed)
          .value;  // E log tr L L+
  BoundReport fw = convex_upper_fw(e, o);

  BoundReport upper;
  upper.value = (first_term / n + (2.0 * fw.value) * (n - 1.0) / n) / 2.0;
  upper.side = BoundSide::upper_gamma1;
  upper.method = "nonasymptotic(convex_fw)";
  upper.certificate_matrix = fw.certificate_matrix;
  upper.diagnostics = fw.diagnostics;

  if (!is_invertible_support(e))
    throw EnsembleError("lower side requires invertible support");
  BoundReport r1 = rank_one_lower(e, o);
  BoundReport lower;
  lower.value = (2.0 * r1.value - std::log(static_cast<double>(d)) / n) / 2.0;
  lower.side = BoundSide::lower_gammad;
  lower.method = "nonasymptotic(rank_one)";
  lower.certificate_vector = r1.certificate_vector;
  lower.diagnostics = r1.diagnostics;
  return {upper, lower};
}

std::pair<BoundReport, BoundReport> markov_bounds(const MarkovEnsemble& e,
                                                  int n,
                                                  const BoundOptions& o) {
  if (n < 1) throw EnsembleError("n must be at least 1");
  int d = e.dim;
  int k = static_cast<int>(e.matrices.size());

  // Conditional one-step laws, one per chain row; the unconditioned first
  // step enters through the separate correction term.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < k; ++i) {
    std::vector<double> row(k);
    for (int j = 0; j < k; ++j) row[j] = e.transition(i, j);
    rows.push_back(std::move(row));
  }

  double max_term = -std::numeric_limits<double>::infinity();
  double min_term = std::numeric_limits<double>::infinity();
  double first_term = 0.0;
  for (int j = 0; j < k; ++j)
    first_term += e.initial(j) *
                  clamped_log((e.matrices[j] * e.matrices[j].adjoint())
                                  .trace()
                                  .real());
  bool lower_ok = e.invertible;
  for (const auto& row : rows) {
    double tot = 0.0;
    for (double p : row) tot += p;
    if (tot <= 0.0) continue;
    std::vector<ComplexMatrix> ms;
    std::vector<double> ps;
    for (int j = 0; j < k; ++j) {
      if (row[j] <= 0.0) continue;
      ms.push_back(e.matrices[j]);
      ps.push_back(row[j] / tot);
    }
    Ensemble cond = make_discrete(ms, ps);
    max_term = std::max(max_term, 2.0 * convex_upper_fw(cond, o).value);
    if (lower_ok)
      min_term = std::min(min_term, 2.0 * rank_one_lower(cond, o).value);
  }

  BoundReport upper;
  upper.value = (first_term / n + max_term * (n - 1.0) / n) / 2.0;
  upper.side = BoundSide::upper_gamma1;
  upper.method = "markov(convex_fw)";

  if (!lower_ok)
    throw EnsembleError("lower side requires invertible support");
  BoundReport lower;
  lower.value = (min_term - std::log(static_cast<double>(d)) / n) / 2.0;
  lower.side = BoundSide::lower_gammad;
  lower.method = "markov(rank_one)";
  return {upper, lower};
}

EatReport eat_verify(const DiscreteEnsemble& e, int n, const BoundOptions& o) {
  int k = static_cast<int>(e.matrices.size());
  double words_d = std::pow(static_cast<double>(k), n);
  if (words_d > 1e6) throw EnsembleError("enumeration budget exceeded");
  long words = static_cast<long>(words_d);

  // lhs = -(1/n) sum_w P(w) log tr( L_wn ... L_w1 L_w1+ ... L_wn+ )
  double lhs_sum = 0.0;
  std::vector<int> w(n, 0);
  for (long idx = 0; idx < words; ++idx) {
    long rem = idx;
    double p = 1.0;
    ComplexMatrix prod = ComplexMatrix::Identity(e.dim, e.dim);
    for (int i = 0; i < n; ++i) {
      int wi = static_cast<int>(rem % k);
      rem /= k;
      p *= e.probs[wi];
      prod = e.matrices[wi] * prod;  // L_wn ... L_w1
    }
    lhs_sum += p * clamped_log((prod * prod.adjoint()).trace().real());
  }
  double lhs = -lhs_sum / n;

  BoundReport fw = convex_upper_fw(Ensemble(e), o);
  double first_term = 0.0;
  for (size_t i = 0; i < e.matrices.size(); ++i)
    first_term += e.probs[i] *
                  clamped_log((e.matrices[i] * e.matrices[i].adjoint())
                                  .trace()
                                  .real());
  double rhs = -(2.0 * fw.value) - first_term / n;

  EatReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.slack = lhs - rhs;
  rep.fw_gap = fw.diagnostics.duality_gap;
  rep.n = n;
  rep.words = words;
  return rep;
}

}  // namespace lyap
