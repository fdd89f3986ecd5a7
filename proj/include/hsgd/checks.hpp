#pragma once

#include <string>
#include <vector>

namespace hsgd {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// End-to-end verification suite; each check prints nothing and returns a
// verdict with a short numeric summary. run_acceptance_checks() is the full
// battery, run_lb_checks() the hard-instance subset used by `hsgd lb-check`.
CheckResult check_variance_law();
CheckResult check_heterogeneity_immunity();
CheckResult check_x4_closed_form();
CheckResult check_stepsize_floor_and_crossover();
CheckResult check_explicit_constant_bounds();
CheckResult check_chain_geometry();
CheckResult check_reduction_identities();
CheckResult check_rate_tables();
CheckResult check_pipeline();
CheckResult check_determinism();

std::vector<CheckResult> run_acceptance_checks();
std::vector<CheckResult> run_lb_checks();

}  // namespace hsgd
