#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace gesched {

/// Outcome of one numerical property check. `violation` is the worst value of
/// the quantity that must stay <= tolerance, reported even when the check
/// passes so that shrinking margins stay visible.
struct CheckResult {
  std::string name;
  bool pass = false;
  double violation = 0.0;
  std::string location;
  double tolerance = 0.0;
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool overall() const;
  const CheckResult* find(const std::string& name) const;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

/// Builds a CheckResult from a worst violation and a tolerance.
CheckResult make_check(std::string name, double violation, std::string location,
                       double tolerance, std::string note = {});

}  // namespace gesched
