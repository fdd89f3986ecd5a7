#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "hsgd/objective.hpp"

namespace hsgd {

// Quadratic family with a shared curvature matrix and per-machine linear
// shifts: F_m(x) = 1/2 x'Ax - b_m'x. Sharing A keeps the uniform
// heterogeneity bound finite: zeta_bar^2 = max_m ||b_m - mean(b)||^2, while
// zeta_star^2 = (1/M) sum ||b_m - mean(b)||^2. The stochastic gradient adds
// isotropic Gaussian noise with E||xi||^2 = sigma^2 (so sigma_star = sigma).
class MeanShiftQuadratic : public DistributedObjective {
 public:
  MeanShiftQuadratic(Eigen::MatrixXd curvature, Eigen::MatrixXd shifts, double sigma);

  int dimension() const override { return static_cast<int>(curvature_.rows()); }
  const ProblemConstants& constants() const override { return constants_; }

  double machine_value(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd machine_gradient(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                      RngStream& rng) const override;

  std::optional<Eigen::VectorXd> known_minimizer() const override { return x_star_; }
  std::optional<double> known_optimal_value() const override { return f_star_; }

 private:
  Eigen::MatrixXd curvature_;  // d x d, symmetric PSD
  Eigen::MatrixXd shifts_;     // d x M, column m = b_m
  Eigen::VectorXd mean_shift_;
  Eigen::VectorXd x_star_;
  double f_star_ = 0.0;
  double noise_scale_ = 0.0;  // sigma / sqrt(d)
  ProblemConstants constants_;
};

// Random instance for the compliance suites: eigenvalues log-uniform in
// [curv_min, curv_max], minimizer of norm ~ target_norm, machine shifts with
// zero mean and RMS heterogeneity zeta_rms at the optimum.
MeanShiftQuadratic random_quadratic(int dimension, int machines, double curv_min, double curv_max,
                                    double target_norm, double zeta_rms, double sigma,
                                    std::uint64_t seed);

// Identity-curvature instance with (1/M) sum ||grad F_m(x*)||^2 = zeta_sq
// exactly; used by the participation-variance checks.
MeanShiftQuadratic exact_zeta_quadratic(int dimension, int machines, double zeta_sq, double sigma,
                                        std::uint64_t seed);

}  // namespace hsgd
