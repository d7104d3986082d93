// Runs every validation criterion once and prints one line per criterion.
#include <cstdio>

#include "ars/rng.hpp"
#include "ars/validation.hpp"

int main() {
  using namespace ars::validation;
  int failed = 0;
  for (const auto& criterion : criteria()) {
    const auto outcome = run_criterion(criterion.id, ars::kDefaultSeed);
    std::printf("criterion %2d  %s  %s  (%.1f s)\n", criterion.id, outcome.pass() ? "PASS" : "FAIL",
                criterion.title.c_str(), outcome.seconds);
    for (const auto& row : outcome.rows) {
      std::printf("    %-4s %-40s stat=%.6g threshold=%.6g\n", row.pass ? "ok" : "bad", row.test.c_str(),
                  row.statistic, row.threshold);
    }
    std::fflush(stdout);
    if (!outcome.pass()) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
