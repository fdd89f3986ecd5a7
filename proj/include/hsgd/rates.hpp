#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hsgd {

// Parameter set for the closed-form guarantees. Every bound reads only the
// fields its table row names and throws (naming the field) if one is absent.
struct BoundParams {
  std::optional<double> H, B, Delta, lambda, sigma, sigma_star, zeta_star, zeta_bar;
  std::optional<double> machines, local_steps, rounds, participants;  // M, K, R, S
};

// Constant handling for a row: unit_c evaluates the algebraic expression
// with every unproven universal constant set to 1 (a shape function);
// symbolic_c marks rows whose constants the source leaves unproven — they
// evaluate identically, the mode is metadata for reporting.
enum class ConstantMode { unit_c, symbolic_c };

struct BoundSpec {
  std::string name;
  ConstantMode constant_mode = ConstantMode::unit_c;
};

// Row names:
//   convex:   mbsgd_convex, accel_mbsgd_convex, koloskova_convex,
//             khaled_convex, scaffold_convex, local_ub_convex,
//             local_lb_convex, dzr_lb_convex
//   strongly convex twins: *_sc
//   combined/subset: inner_outer_min, subset_mbsgd_convex, subset_mbsgd_sc,
//             scaffold_subset_convex, scaffold_subset_sc
std::vector<std::string> bound_names();

double eval_bound(const std::string& name, const BoundParams& params,
                  ConstantMode mode = ConstantMode::unit_c);

// Heterogeneity threshold zeta^2 = H^2 B^2 / R where the fixed-stepsize
// Local SGD heterogeneity floor meets the Minibatch HB^2/R term.
double crossover_zeta(double smoothness, double norm_bound, double rounds);

enum class ConvexityCase { convex, strongly_convex };
enum class OptimalityVerdict { accelerated_mb_optimal, gap_region, low_heterogeneity };

// Convex: accelerated minibatch is optimal for zeta* >= HB; the gap regime
// is HB/sqrt(R) <= zeta* < HB; below that, low heterogeneity. Strongly
// convex: optimal for zeta*^2 >= H^{3/2}/sqrt(lambda), with the gap edge
// scaled by 1/R.
OptimalityVerdict optimality_region(ConvexityCase which, const BoundParams& params);

std::string verdict_name(OptimalityVerdict v);

}  // namespace hsgd
