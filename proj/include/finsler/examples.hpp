#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace finsler {

/// A named norm or structure shipped with the library.
struct BuiltinExample {
  std::string name;     // file stem of the emitted JSON
  std::string kind;     // "norm" or "structure"
  std::string formula;  // defining expression
  std::string note;     // what the example demonstrates
  nlohmann::json spec;  // input for norm_from_json / structure_from_json
};

const std::vector<BuiltinExample>& builtin_examples();

/// Throws InputError for an unknown name.
const BuiltinExample& builtin_example(const std::string& name);

}  // namespace finsler
