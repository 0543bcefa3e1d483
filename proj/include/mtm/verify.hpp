#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mtm {

struct VerifyCheck
{
  std::string name;
  bool ok = false;
  std::string detail;
  nlohmann::ordered_json values;
};

struct VerifyReport
{
  std::uint64_t seed = 0;
  std::vector<VerifyCheck> checks;

  bool ok() const;
  /// Contains no timings, so two runs with one seed serialize identically.
  nlohmann::ordered_json to_json() const;
};

/// The bundled inequality and identity checks on small instances; Monte Carlo checks
/// draw from substreams of `seed`.
VerifyReport run_verify(std::uint64_t seed);

} // namespace mtm
