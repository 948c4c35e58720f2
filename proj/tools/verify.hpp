#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace finsler::cli {

struct VerifyRow {
  std::string suite;
  std::string check;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Canonical suite names accepted by run_suite.
const std::vector<std::string>& suite_names();

/// Maps the aliases "theorem-1.2" and "appendix" onto "bl-properties" and "ellipsoids".
std::string canonical_suite(const std::string& name);

/// Runs "bl-properties" (functorial properties of the metric), "ellipsoids" (Binet and Legendre
/// ellipsoid identities) or "all" with seeded random inputs. Throws InputError for an unknown suite.
std::vector<VerifyRow> run_suite(const std::string& suite, std::uint64_t seed);

}  // namespace finsler::cli
