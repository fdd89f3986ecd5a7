#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "hsgd/dataset.hpp"
#include "hsgd/objective.hpp"

namespace hsgd {

// Binary logistic regression split across machines. Per-machine loss is
// mean log(1+exp(-y <x, phi>)) (+ ridge/2 ||x||^2); the stochastic gradient
// is the gradient on one uniformly drawn local example. Even digits map to
// +1, odd to -1. H is the largest per-machine curvature bound
// lambda_max((1/(4 n_m)) Phi_m' Phi_m) + ridge.
class LogisticObjective : public DistributedObjective {
 public:
  // One machine per assignment entry. full_batch makes the stochastic oracle
  // return the exact machine gradient (zero-variance deterministic oracle).
  LogisticObjective(const FeatureDataset& ds, const TaskAssignment& assignment,
                    double ridge = 0.0, bool full_batch = false);
  // Single-machine pooled objective over all rows.
  explicit LogisticObjective(const FeatureDataset& ds, double ridge = 0.0,
                             bool full_batch = false);

  int dimension() const override { return dim_; }
  const ProblemConstants& constants() const override { return constants_; }

  double machine_value(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd machine_gradient(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                      RngStream& rng) const override;

  Eigen::MatrixXd machine_hessian(int machine, const Eigen::VectorXd& x) const;

  // Global objective F = (1/M) sum F_m and its derivatives.
  double global_value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd global_gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd global_hessian(const Eigen::VectorXd& x) const;

  double ridge() const { return ridge_; }

  // Set after newton_minimize so runners can compute suboptimality.
  void set_fitted_minimizer(Eigen::VectorXd x_star);
  std::optional<Eigen::VectorXd> known_minimizer() const override;
  std::optional<double> known_optimal_value() const override;

 private:
  void finish_setup();

  std::vector<Eigen::MatrixXd> features_;  // per machine, n_m x d
  std::vector<Eigen::VectorXd> labels_;    // per machine, +-1
  int dim_ = 0;
  double ridge_ = 0.0;
  bool full_batch_ = false;
  std::optional<Eigen::VectorXd> fitted_;
  std::optional<double> fitted_value_;
  ProblemConstants constants_;
};

// Damped Newton with backtracking on the global objective; stops at
// ||grad F|| <= tol (default 1e-10). A 1e-8 ridge is added only when the
// Hessian is numerically singular. Throws after max_iters with the last
// gradient norm in the message.
Eigen::VectorXd newton_minimize(const LogisticObjective& obj, double tol = 1e-10,
                                int max_iters = 100);

// For each p: build tasks (shared seed policy), fit x* by Newton, report
// (p, zeta_star^2) sorted by p.
std::vector<std::pair<double, double>> measure_zeta_profile(const FeatureDataset& ds,
                                                            const std::vector<double>& p_grid,
                                                            std::uint64_t seed,
                                                            double ridge = 0.0);

}  // namespace hsgd
