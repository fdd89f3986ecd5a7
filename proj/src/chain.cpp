#include "hsgd/chain.hpp"

#include <cmath>
#include <stdexcept>

namespace hsgd {

ChainObjective::ChainObjective(double smoothness, double strong_convexity, double scale,
                               int rounds, int machines)
    : smoothness_(smoothness), lambda_(strong_convexity), scale_c_(scale) {
  if (!(strong_convexity > 0) || smoothness < 7.0 * strong_convexity)
    throw std::invalid_argument("chain construction requires H >= 7 lambda > 0");
  if (!(scale > 0)) throw std::invalid_argument("C must be > 0");
  if (rounds < 1) throw std::invalid_argument("R must be >= 1");
  if (machines < 2) throw std::invalid_argument("need at least two machines");

  alpha_ = std::sqrt(1.0 + (smoothness_ - lambda_) / (2.0 * lambda_));
  q_ = (alpha_ - 1.0) / (alpha_ + 1.0);
  beta_ = 1.0 - q_;

  const double min_d = rounds + 1.0 / (2.0 * std::log(1.0 / q_));
  dim_ = 2 * static_cast<int>(std::ceil(min_d / 2.0));

  x_star_ = Eigen::VectorXd::Zero(dim_);
  double p = 1.0;
  for (int i = 0; i < dim_; ++i) {
    p *= q_;
    x_star_[i] = scale_c_ * p;
  }
  f_star_ = -q_ * scale_c_ * scale_c_ * (smoothness_ - lambda_) / 16.0;

  double zsum = 0.0;
  for (int m = 0; m < machines; ++m) zsum += machine_gradient(m, x_star_).squaredNorm();

  constants_.machines = machines;
  constants_.smoothness = smoothness_;
  constants_.strong_convexity = lambda_;
  constants_.noise_std = 0.0;
  constants_.noise_std_at_opt = 0.0;
  constants_.zeta_star = std::sqrt(zsum / machines);
  constants_.zeta_bar = std::numeric_limits<double>::infinity();
  constants_.minimizer_norm_bound = x_star_.norm();
  constants_.initial_suboptimality = -f_star_;  // F(0) = 0
  constants_.validate();
}

ChainObjective::Role ChainObjective::role(int machine) const {
  const int pairs = constants_.machines / 2;
  if (machine < pairs) return Role::f1;
  if (machine < 2 * pairs) return Role::f2;
  return Role::pad;
}

double ChainObjective::machine_value(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  const double ridge = 0.5 * lambda_ * x.squaredNorm();
  if (role(machine) == Role::pad) return ridge;
  const double s = (smoothness_ - lambda_) / 8.0;
  if (role(machine) == Role::f1) {
    double acc = x[0] * x[0] - 2.0 * scale_c_ * x[0] + beta_ * x[dim_ - 1] * x[dim_ - 1];
    for (int i = 1; i + 1 < dim_; i += 2) {
      const double d = x[i + 1] - x[i];  // pairs (x_{2i}, x_{2i+1}), 1-based
      acc += d * d;
    }
    return s * acc + ridge;
  }
  double acc = 0.0;
  for (int i = 0; i + 1 < dim_; i += 2) {
    const double d = x[i + 1] - x[i];  // pairs (x_{2i-1}, x_{2i}), 1-based
    acc += d * d;
  }
  return s * acc + ridge;
}

Eigen::VectorXd ChainObjective::machine_gradient(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  if (role(machine) == Role::pad) return lambda_ * x;
  const double s = (smoothness_ - lambda_) / 8.0;
  Eigen::VectorXd grad = lambda_ * x;
  if (role(machine) == Role::f1) {
    grad[0] += s * (2.0 * x[0] - 2.0 * scale_c_);
    grad[dim_ - 1] += s * 2.0 * beta_ * x[dim_ - 1];
    for (int i = 1; i + 1 < dim_; i += 2) {
      const double d = 2.0 * s * (x[i + 1] - x[i]);
      grad[i + 1] += d;
      grad[i] -= d;
    }
  } else {
    for (int i = 0; i + 1 < dim_; i += 2) {
      const double d = 2.0 * s * (x[i + 1] - x[i]);
      grad[i + 1] += d;
      grad[i] -= d;
    }
  }
  return grad;
}

Eigen::VectorXd ChainObjective::stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                                    RngStream&) const {
  return machine_gradient(machine, x);  // noiseless construction
}

ChainObjective build_chain(double smoothness, double strong_convexity, double scale, int rounds,
                           int machines) {
  return ChainObjective(smoothness, strong_convexity, scale, rounds, machines);
}

double chain_residual_lower_bound(const ChainObjective& obj, int rounds) {
  if (rounds < 0 || rounds > obj.dimension())
    throw std::invalid_argument("need 0 <= R <= d");
  const double q = obj.q();
  const double f0_gap = *obj.constants().initial_suboptimality;
  return f0_gap * (std::pow(q, 2.0 * rounds) - std::pow(q, 2.0 * obj.dimension())) / obj.alpha();
}

}  // namespace hsgd
