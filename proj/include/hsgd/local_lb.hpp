#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hsgd/objective.hpp"

namespace hsgd {

// Two-function lower-bound family in four dimensions. Machines in the first
// half own F1, the second half F2; both share
//   G(x) = mu/2 (x1 - c)^2 + H/2 (x2 - sqrt(mu) c / sqrt(H))^2
//          + H/8 (x3^2 + max(x3,0)^2)
// and differ only on the fourth coordinate:
//   F1 adds L x4^2 / 2 + zeta x4,   F2 adds mu x4^2 / 2 - zeta x4.
// Gradient noise is a single N(0, sigma^2) draw added to coordinate 3.
// Odd machine counts assign the last machine lambda/2 ||x||^2.
struct LocalLbParams {
  double smoothness = 16.0;        // H
  double strong_convexity = 0.0;   // lambda
  double mu = 1.0;                 // in [lambda, H/16]
  double fourth_curvature = 8.0;   // L in [lambda, H], the proof uses H/2
  double zeta = 0.0;
  double sigma = 0.0;
  std::optional<double> norm_bound;       // B: picks c^2 = B^2/2
  std::optional<double> suboptimality;    // Delta: picks c^2 = Delta/mu
  int machines = 2;
};

class LocalLbObjective : public DistributedObjective {
 public:
  explicit LocalLbObjective(const LocalLbParams& params);

  int dimension() const override { return 4; }
  const ProblemConstants& constants() const override { return constants_; }

  double machine_value(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd machine_gradient(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                      RngStream& rng) const override;

  std::optional<Eigen::VectorXd> known_minimizer() const override { return x_star_; }
  std::optional<double> known_optimal_value() const override { return f_star_; }

  const LocalLbParams& params() const { return params_; }
  double offset() const { return c_; }

 private:
  enum class Role { f1, f2, pad };
  Role role(int machine) const;

  LocalLbParams params_;
  double c_ = 0.0;
  double x2_star_ = 0.0;
  Eigen::VectorXd x_star_;
  double f_star_ = 0.0;
  ProblemConstants constants_;
};

LocalLbObjective build_local_lb(const LocalLbParams& params);

// Round-start values x_{0,1..R} of the averaged fourth coordinate under
// exact noiseless Local SGD on the two-machine split:
//   x_{0,r+1} = 1/2 (zeta/mu - zeta/L + (1-mu eta)^K (x_{0,r} - zeta/mu)
//                               + (1-L eta)^K (x_{0,r} + zeta/L)).
std::vector<double> closed_form_x4_trajectory(double fourth_curvature, double mu, double zeta,
                                              double eta, int local_steps, int rounds);

// min{ mu c^2 / 4 e^{-6 mu R / H}, H zeta^2 / (512 mu^2 R^2) } — the
// heterogeneity-branch suboptimality floor for any fixed stepsize <= 1/L.
double local_fixed_stepsize_floor(double mu, double offset_c, double smoothness, double zeta,
                                    int rounds);

}  // namespace hsgd
