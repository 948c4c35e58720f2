#pragma once

#include "finsler/core.hpp"

#include <nlohmann/json.hpp>

namespace finsler {

nlohmann::json matrix_to_json(const Mat& m);
nlohmann::json vector_to_json(const Vec& v);

/// Parse helpers that throw InputError naming `what` on malformed input.
Mat json_matrix(const nlohmann::json& j, const char* what);
Vec json_vector(const nlohmann::json& j, const char* what);

}  // namespace finsler
