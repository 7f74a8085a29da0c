#include <doctest.h>

#include <json.hpp>

#include "lyapbound/fixtures.hpp"
#include "lyapbound/io.hpp"

using namespace lyap;
using nlohmann::json;

TEST_CASE("discrete ensemble round trip is bit exact") {
  Ensemble e = fixtures::group_pair();
  json j = ensemble_to_json(e);
  Ensemble back = parse_ensemble(j);
  const auto& a = std::get<DiscreteEnsemble>(e);
  const auto& b = std::get<DiscreteEnsemble>(back);
  REQUIRE(a.matrices.size() == b.matrices.size());
  for (size_t i = 0; i < a.matrices.size(); ++i)
    CHECK((a.matrices[i] - b.matrices[i]).norm() == 0.0);
  CHECK(a.probs == b.probs);

  // serialize-parse-serialize is idempotent
  CHECK(ensemble_to_json(back) == j);
}

TEST_CASE("complex entries round trip") {
  ComplexMatrix m(2, 2);
  m << std::complex<double>(1, -2), 0.5, std::complex<double>(0, 3), -1;
  Ensemble e = make_discrete({m}, {1.0});
  Ensemble back = parse_ensemble(ensemble_to_json(e));
  CHECK((std::get<DiscreteEnsemble>(back).matrices[0] - m).norm() == 0.0);
}

TEST_CASE("markov and sampler kinds round trip") {
  Eigen::MatrixXd t(2, 2);
  t << 0.9, 0.1, 0.2, 0.8;
  Eigen::VectorXd init(2);
  init << 0.3, 0.7;
  ComplexMatrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 2;
  b << 0, 1, 1, 0;
  Ensemble m = make_markov({a, b}, t, init);
  Ensemble mb = parse_ensemble(ensemble_to_json(m));
  CHECK(std::get<MarkovEnsemble>(mb).transition == t);

  Ensemble s = fixtures::haar_diag(5.0, 1.0);
  Ensemble sb = parse_ensemble(ensemble_to_json(s));
  CHECK(std::get<SamplerEnsemble>(sb).diag == std::vector<double>{5.0, 1.0});
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_ensemble(json{{"dim", 2}, {"kind", "nope"}}),
                  EnsembleError);
  json bad = {{"dim", 2},
              {"kind", "discrete"},
              {"matrices", json::array({json::array({json::array({1, 2, 3})})})},
              {"probs", json::array({1.0})}};
  CHECK_THROWS_AS(parse_ensemble(bad), EnsembleError);
}

TEST_CASE("hmm model parse") {
  json j = {{"M", {{0.9, 0.1}, {0.1, 0.9}}},
            {"W", {{0.95, 0.05}, {0.05, 0.95}}}};
  HmmModel m = parse_hmm(j);
  CHECK(m.mu(0) == doctest::Approx(0.5));
}
