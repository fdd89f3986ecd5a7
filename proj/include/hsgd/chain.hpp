#pragma once

#include <cstdint>

#include "hsgd/objective.hpp"

namespace hsgd {

// Coordinate-chain construction used by the communication-round lower bound.
// Two noiseless quadratics on R^d (d even):
//   F1 = (H-l)/8 (x1^2 - 2Cx1 + beta x_d^2 + sum_{i<d/2} (x_{2i+1}-x_{2i})^2) + l/2 ||x||^2
//   F2 = (H-l)/8 (sum_{i<=d/2} (x_{2i}-x_{2i-1})^2) + l/2 ||x||^2
// with q the smaller root of 1 - (2 + 8l/(H-l)) q + q^2 = 0,
// alpha = sqrt(1 + (H-l)/(2l)), beta = 1-q, x* = C sum q^i e_i and
// F* = -q C^2 (H-l)/16. Gradients release one new coordinate per
// communication round for any distributed zero-respecting method.
class ChainObjective : public DistributedObjective {
 public:
  ChainObjective(double smoothness, double strong_convexity, double scale, int rounds,
                 int machines = 2);

  int dimension() const override { return dim_; }
  const ProblemConstants& constants() const override { return constants_; }

  double machine_value(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd machine_gradient(int machine, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                      RngStream& rng) const override;

  std::optional<Eigen::VectorXd> known_minimizer() const override { return x_star_; }
  std::optional<double> known_optimal_value() const override { return f_star_; }

  double q() const { return q_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double scale() const { return scale_c_; }

 private:
  enum class Role { f1, f2, pad };
  Role role(int machine) const;

  double smoothness_, lambda_, scale_c_;
  int dim_;
  double q_, alpha_, beta_;
  Eigen::VectorXd x_star_;
  double f_star_;
  ProblemConstants constants_;
};

// d = 2 ceil((R + 1/(2 ln(1/q)))/2); requires H >= 7 lambda > 0.
ChainObjective build_chain(double smoothness, double strong_convexity, double scale, int rounds,
                           int machines = 2);

// (F(0)-F*) (q^{2R} - q^{2d}) / alpha: the suboptimality floor for any point
// supported on the first R coordinates.
double chain_residual_lower_bound(const ChainObjective& obj, int rounds);

}  // namespace hsgd
