#pragma once

#include <string>

#include "json.hpp"
#include "lyapbound/ensemble.hpp"
#include "lyapbound/hmm.hpp"

namespace lyap {

// Ensemble file format: JSON with fields `dim`, `kind` in
// {discrete, markov, haar_diag}, `matrices` as nested arrays whose entries
// are either a real number or a two-element [re, im] array, and
// `probs` / `transition` / `initial` / `diag` as applicable.
Ensemble parse_ensemble(const nlohmann::json& j);
Ensemble load_ensemble(const std::string& path);
nlohmann::json ensemble_to_json(const Ensemble& e);

// HMM model file: JSON with row-stochastic `M` and `W`.
HmmModel parse_hmm(const nlohmann::json& j);
HmmModel load_hmm(const std::string& path);

nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace lyap
