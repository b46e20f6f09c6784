#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ocmc/perturbation_tensor.hpp"

namespace ocmc {

// Accepted documents:
//   {"type": "zero"}
//   {"type": "isotropic", "coefficient": c}
//   {"type": "axisymmetric", "profile": PROFILE}
//   {"type": "sum", "terms": [TENSOR, ...]}
//   a profile export {"k", "s0", "t0", "a_k", "amplitude", "samples"}
// PROFILE is one of
//   {"type": "counterexample", "k": int, "s0": real, "amplitude": real
//    [, "a_k": real]}
//   {"type": "table", "samples": [[t, psi], ...]}
//   {"type": "constant", "value": c}
// Unknown keys and malformed values raise kInvalidArgument.
TensorPtr parse_tensor_spec(const nlohmann::json& doc);

// Reads a file; parse errors carry line and column.
TensorPtr load_tensor_spec(const std::string& path);

// Parses JSON text, reporting syntax errors as kInvalidArgument with line
// and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

}  // namespace ocmc
