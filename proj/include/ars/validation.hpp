#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ars/stats.hpp"

/// Self-validation: every acceptance check of the toolkit, run end to end.
namespace ars::validation {

struct Criterion {
  int id = 0;
  std::string title;
  bool slow = false;  // left out of the fast suite
};

/// All checks in order, ids 1..14.
const std::vector<Criterion>& criteria();

struct Outcome {
  Criterion criterion;
  std::vector<stats::ReportRow> rows;
  double seconds = 0;
  bool pass() const;
};

/// Runs one check. Errors thrown along the way become a failing row.
Outcome run_criterion(int id, std::uint64_t seed);

enum class Suite { fast, full };
std::vector<Outcome> run_suite(Suite suite, std::uint64_t seed);

nlohmann::json to_json(const Outcome& outcome);
nlohmann::json to_json(const std::vector<Outcome>& outcomes);

}  // namespace ars::validation
