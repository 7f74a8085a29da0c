#include <doctest.h>

#include <cmath>

#include "lyapbound/fixtures.hpp"
#include "lyapbound/hmm.hpp"

using namespace lyap;

namespace {

double markov_rate(const HmmModel& m) {
  double h = 0.0;
  for (int x = 0; x < m.num_states(); ++x)
    for (int xp = 0; xp < m.num_states(); ++xp)
      if (m.M(x, xp) > 0.0) h -= m.mu(x) * m.M(x, xp) * std::log(m.M(x, xp));
  return h;
}

HmmModel uniform_channel_swap() {
  Eigen::MatrixXd m(2, 2), w(2, 2);
  m << 0, 1, 1, 0;
  w << 0.5, 0.5, 0.5, 0.5;
  return make_hmm(m, w);
}

}  // namespace

TEST_CASE("model validation and stationary distribution") {
  auto m = fixtures::bsc_chain();
  CHECK(m.mu(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.mu.sum() == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd skew(2, 2);
  skew << 0.8, 0.2, 0.4, 0.6;
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(2, 2);
  auto sm = make_hmm(skew, w);
  CHECK(sm.mu(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

  Eigen::MatrixXd bad(2, 2);
  bad << 0.8, 0.1, 0.4, 0.6;
  CHECK_THROWS_AS(make_hmm(bad, w), EnsembleError);
}

TEST_CASE("transfer matrices sum to the chain kernel") {
  auto m = fixtures::bsc_chain();
  auto atoms = transfer_matrices(m);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& a : atoms) sum += a;
  CHECK((sum - m.M).norm() < 1e-14);
}

TEST_CASE("uniform channel entropy is the alphabet rate") {
  auto model = uniform_channel_swap();
  auto rep = entropy_rate_bounds(model);
  CHECK(std::abs(rep.lower - std::log(2.0)) <= 1e-6);
  CHECK(std::abs(rep.upper - std::log(2.0)) <= 1e-6);
  CHECK(std::abs(rep.mc.value - std::log(2.0)) <= 3.0 * rep.mc.stderr_ + 1e-9);
}

TEST_CASE("noiseless channel recovers the chain entropy rate") {
  Eigen::MatrixXd m(2, 2);
  m << 0.9, 0.1, 0.1, 0.9;
  auto model = make_hmm(m, Eigen::MatrixXd::Identity(2, 2));
  auto mc = entropy_rate_mc(model, 4000, 16, 42);
  CHECK(std::abs(mc.value - markov_rate(model)) <= 3.0 * mc.stderr_ + 1e-6);
}

TEST_CASE("noisy chain is sandwiched") {
  auto model = fixtures::bsc_chain(0.9, 0.05);
  EntropyBoundOptions o;
  o.mc_n = 4000;
  o.mc_trials = 16;
  auto rep = entropy_rate_bounds(model, o);
  CHECK(rep.lower <= rep.mc.value + 3.0 * rep.mc.stderr_ + 1e-6);
  CHECK(rep.upper >= rep.mc.value - 3.0 * rep.mc.stderr_ - 1e-6);
  CHECK(rep.upper <= std::log(2.0) + 1e-12);
}

TEST_CASE("channel degradation raises the estimated rate") {
  auto clean = entropy_rate_mc(fixtures::bsc_chain(0.9, 0.0), 4000, 16, 42);
  auto noisy = entropy_rate_mc(fixtures::bsc_chain(0.9, 0.25), 4000, 16, 42);
  CHECK(clean.value <= noisy.value + 3.0 * (clean.stderr_ + noisy.stderr_));
  CHECK(noisy.value <= std::log(2.0) + 3.0 * noisy.stderr_);
}
