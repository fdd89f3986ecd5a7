#include <cstdio>

#include "hsgd/checks.hpp"

// Runs the full acceptance battery and prints one verdict line per
// criterion; exits non-zero if any criterion fails.
int main() {
  const auto results = hsgd::run_acceptance_checks();
  int failures = 0;
  int index = 0;
  for (const auto& r : results) {
    ++index;
    std::printf("[%2d/%zu] %-42s %s\n", index, results.size(), r.name.c_str(),
                r.pass ? "PASS" : "FAIL");
    std::printf("        %s\n", r.detail.c_str());
    if (!r.pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
