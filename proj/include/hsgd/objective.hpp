#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "hsgd/rng.hpp"

namespace hsgd {

// Regularity constants of an M-machine problem. zeta_bar = +inf means the
// uniform heterogeneity bound is unbounded (e.g. quadratics with differing
// curvature, logistic objectives on unbounded domains).
struct ProblemConstants {
  int machines = 1;                               // M
  double smoothness = 1.0;                        // H
  double strong_convexity = 0.0;                  // lambda (0 = weakly convex)
  double noise_std = 0.0;                         // sigma
  double noise_std_at_opt = 0.0;                  // sigma_star <= sigma
  double zeta_star = 0.0;                         // sqrt of (1/M) sum ||grad F_m(x*)||^2
  double zeta_bar = std::numeric_limits<double>::infinity();
  std::optional<double> minimizer_norm_bound;     // B
  std::optional<double> initial_suboptimality;    // Delta = F(0) - F*

  void validate() const;  // throws std::invalid_argument on violation
};

// An M-machine stochastic convex problem. Per-machine values and exact
// gradients are analytic; the stochastic gradient oracle draws from an
// RngStream so that every sample is replayable.
class DistributedObjective {
 public:
  virtual ~DistributedObjective() = default;

  virtual int dimension() const = 0;
  virtual const ProblemConstants& constants() const = 0;
  int machines() const { return constants().machines; }

  virtual double machine_value(int machine, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd machine_gradient(int machine, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                              RngStream& rng) const = 0;

  virtual std::optional<Eigen::VectorXd> known_minimizer() const { return std::nullopt; }
  virtual std::optional<double> known_optimal_value() const { return std::nullopt; }

  // F(x) = (1/M) sum_m F_m(x), summed in machine-index order
  double value(const Eigen::VectorXd& x) const;

  void check_dimension(const Eigen::VectorXd& x) const;
};

// (1/M) sum_m grad F_m(x) with exact per-machine gradients.
Eigen::VectorXd average_gradient(const DistributedObjective& obj, const Eigen::VectorXd& x);

// (1/(MK)) sum_m sum_k grad f(x; z_{r,k}^m). Streams are keyed
// (seed, gradient_noise, replicate, machine, round, k), matching the runners.
Eigen::VectorXd minibatch_gradient(const DistributedObjective& obj, const Eigen::VectorXd& x,
                                   int local_steps, std::uint64_t master_seed,
                                   std::uint64_t replicate = 0, std::uint64_t round = 0);

// Round-participation draw: S machine indices sampled uniformly without
// replacement (seeded shuffle), returned sorted ascending.
std::vector<int> sample_participants(int machines, int participants, std::uint64_t master_seed,
                                     std::uint64_t replicate, std::uint64_t round);

// Subset variant of the round estimator: (1/(SK)) sum_{m in sel} sum_k grad f.
Eigen::VectorXd subset_minibatch_gradient(const DistributedObjective& obj,
                                          const Eigen::VectorXd& x, int local_steps,
                                          int participants, std::uint64_t master_seed,
                                          std::uint64_t replicate = 0, std::uint64_t round = 0);

// (1/M) sum_m ||grad F_m(x*)||^2. Uses the known minimizer unless one is
// supplied; throws if neither is available.
double measure_zeta_star(const DistributedObjective& obj,
                         const std::optional<Eigen::VectorXd>& minimizer = std::nullopt);

// max over machines of the empirical variance of grad f(x*; z) over `draws`
// samples (each sample scored against the exact machine gradient).
double estimate_sigma_star(const DistributedObjective& obj, int draws,
                           std::uint64_t master_seed = 0);

}  // namespace hsgd
