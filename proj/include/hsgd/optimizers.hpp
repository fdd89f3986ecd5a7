#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsgd/objective.hpp"
#include "hsgd/schedule.hpp"

namespace hsgd {

// (M, K, R, S) geometry: M machines, K local gradients per round, R
// communication rounds, S participating machines per round (default all).
struct CommGeometry {
  int machines = 1;
  int local_steps = 1;
  int rounds = 1;
  int participants = -1;  // -1 = machines

  int effective_participants() const { return participants < 0 ? machines : participants; }
  long long total_steps() const { return static_cast<long long>(local_steps) * rounds; }
  void validate() const;
};

struct RunOptions {
  Eigen::VectorXd start;            // empty = origin
  std::uint64_t replicate = 0;
  bool record_iterates = false;     // per-round consensus iterates
  bool record_support = false;      // per-round per-machine support sets
  std::optional<double> fstar_override;
};

struct RunResult {
  // schedule-weighted average of pre-update consensus iterates (the
  // theorem output point) and its suboptimality
  Eigen::VectorXd output_point;
  double output_suboptimality = 0.0;
  // consensus iterate after the final round
  Eigen::VectorXd final_iterate;
  double final_round_suboptimality = 0.0;
  // F(consensus) - F* after each round
  std::vector<double> suboptimality_series;
  std::vector<Eigen::VectorXd> iterates;                      // optional
  std::vector<std::vector<std::vector<int>>> support_history; // [round][machine]

  // config echo / rng provenance
  std::string algorithm;
  CommGeometry geometry;
  std::string schedule;
  double eta_inner = 0.0;
  double eta_outer = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;
};

// Minibatch updates: x_{r+1} = x_r - eta_r g_r with g_r the (S K)-sample round
// average; output is the schedule-weighted average of x_0..x_{R-1}.
RunResult run_minibatch_sgd(const DistributedObjective& obj, const CommGeometry& geom,
                            const ScheduleSpec& sched, std::uint64_t master_seed,
                            const RunOptions& opts = {});

// Local SGD updates: K local steps per round per (participating) machine, round
// boundaries average iterates; output averages the per-step virtual
// consensus averages with the schedule weights.
RunResult run_local_sgd(const DistributedObjective& obj, const CommGeometry& geom,
                        const ScheduleSpec& sched, std::uint64_t master_seed,
                        const RunOptions& opts = {});

// Dual-stepsize updates: local steps use eta_inner, the round boundary moves the
// consensus by eta_outer times the machine-averaged *sum* of the round's
// local gradients. eta_inner = eta_outer recovers Local SGD bit-for-bit;
// eta_inner = 0 is Minibatch SGD with stepsize K * eta_outer.
RunResult run_inner_outer(const DistributedObjective& obj, const CommGeometry& geom,
                          double eta_inner, double eta_outer, std::uint64_t master_seed,
                          const RunOptions& opts = {});

// AC-SA three-sequence recursion (alpha_t = 2/(t+1), gamma_t = 4 phi/(t(t+1)),
// phi = 2H), one SK-sample minibatch gradient per iteration, R iterations.
// Needs lambda > 0, or `regularize` to add the (sigma/(2B sqrt(MKR)))||x-x0||^2
// proximal term for the weakly convex case.
RunResult run_acsa(const DistributedObjective& obj, const CommGeometry& geom, bool regularize,
                   std::uint64_t master_seed, const RunOptions& opts = {});

// Multi-stage AC-SA with N_k = ceil(max{4 sqrt(2H/lambda),
// 128 sigma_mb^2/(3 lambda Delta 2^{-(k+1)})}) and phi_k per stage, where
// sigma_mb^2 = sigma^2/(SK) is the round-estimator variance. Stages
// warm-start from the previous x^ag; the final stage truncates to the
// remaining round budget.
RunResult run_multistage_acsa(const DistributedObjective& obj, const CommGeometry& geom,
                              double initial_suboptimality, std::uint64_t master_seed,
                              const RunOptions& opts = {});

// Stage length N_k and the per-stage gamma scale phi_k of multi-stage AC-SA
// (stage is 1-based; sigma_mb_sq is the round-estimator variance).
long long multistage_stage_length(double smoothness, double strong_convexity,
                                  double sigma_mb_sq, double initial_suboptimality, int stage);
double multistage_stage_phi(double smoothness, double strong_convexity, double sigma_mb_sq,
                            double initial_suboptimality, int stage, long long stage_length);

enum class Algorithm { minibatch, local, inner_outer, acsa, multistage_acsa };

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm algo);

// Dispatch wrapper; geometry.participants < machines runs every round on a
// uniformly drawn (without replacement) machine subset. With S = M this is
// bit-identical to the full-participation runner.
RunResult run_with_subset(Algorithm algo, const DistributedObjective& obj,
                          const CommGeometry& geom, const ScheduleSpec& sched, double eta_inner,
                          double eta_outer, std::uint64_t master_seed,
                          const RunOptions& opts = {});

// (1/W) sum w_t x_t with W = sum w_t; throws if W <= 0.
Eigen::VectorXd average_iterates(const std::vector<Eigen::VectorXd>& iterates,
                                 const std::vector<double>& weights);

}  // namespace hsgd
