#include "lyapbound/io.hpp"

#include <fstream>

namespace lyap {

using nlohmann::json;

namespace {

std::complex<double> entry_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2)
    return {j[0].get<double>(), j[1].get<double>()};
  throw EnsembleError("matrix entry must be a number or [re, im]");
}

json entry_to_json(const std::complex<double>& z) {
  if (z.imag() == 0.0) return json(z.real());
  return json::array({z.real(), z.imag()});
}

Eigen::MatrixXd real_matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw EnsembleError("expected a matrix");
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw EnsembleError("ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json real_matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw EnsembleError("expected a matrix");
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw EnsembleError("ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(r, c) = entry_from_json(j[r][c]);
  }
  return m;
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(entry_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Ensemble parse_ensemble(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  int dim = j.at("dim").get<int>();
  if (kind == "discrete") {
    std::vector<ComplexMatrix> ms;
    for (const auto& mj : j.at("matrices")) ms.push_back(matrix_from_json(mj));
    auto probs = j.at("probs").get<std::vector<double>>();
    auto e = make_discrete(std::move(ms), probs);
    if (e.dim != dim) throw EnsembleError("dim field does not match matrices");
    return e;
  }
  if (kind == "markov") {
    std::vector<ComplexMatrix> ms;
    for (const auto& mj : j.at("matrices")) ms.push_back(matrix_from_json(mj));
    Eigen::MatrixXd t = real_matrix_from_json(j.at("transition"));
    auto init = j.at("initial").get<std::vector<double>>();
    Eigen::VectorXd iv = Eigen::Map<Eigen::VectorXd>(init.data(), init.size());
    auto e = make_markov(std::move(ms), std::move(t), iv);
    if (e.dim != dim) throw EnsembleError("dim field does not match matrices");
    return e;
  }
  if (kind == "haar_diag") {
    return make_haar_diag(dim, j.at("diag").get<std::vector<double>>());
  }
  throw EnsembleError("unknown ensemble kind: " + kind);
}

Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EnsembleError("cannot read ensemble file: " + path);
  json j;
  in >> j;
  return parse_ensemble(j);
}

json ensemble_to_json(const Ensemble& e) {
  json j;
  j["dim"] = ensemble_dim(e);
  if (const auto* d = std::get_if<DiscreteEnsemble>(&e)) {
    j["kind"] = "discrete";
    json ms = json::array();
    for (const auto& m : d->matrices) ms.push_back(matrix_to_json(m));
    j["matrices"] = std::move(ms);
    j["probs"] = d->probs;
  } else if (const auto* m = std::get_if<MarkovEnsemble>(&e)) {
    j["kind"] = "markov";
    json ms = json::array();
    for (const auto& mat : m->matrices) ms.push_back(matrix_to_json(mat));
    j["matrices"] = std::move(ms);
    j["transition"] = real_matrix_to_json(m->transition);
    j["initial"] = std::vector<double>(m->initial.data(),
                                       m->initial.data() + m->initial.size());
  } else {
    const auto& s = std::get<SamplerEnsemble>(e);
    if (s.kind != SamplerEnsemble::Kind::haar_conjugated_diagonal)
      throw EnsembleError("custom samplers have no file representation");
    j["kind"] = "haar_diag";
    j["diag"] = s.diag;
  }
  return j;
}

HmmModel parse_hmm(const json& j) {
  return make_hmm(real_matrix_from_json(j.at("M")),
                  real_matrix_from_json(j.at("W")));
}

HmmModel load_hmm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EnsembleError("cannot read model file: " + path);
  json j;
  in >> j;
  return parse_hmm(j);
}

}  // namespace lyap
