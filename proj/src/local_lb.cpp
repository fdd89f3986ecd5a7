#include "hsgd/local_lb.hpp"

#include <cmath>
#include <stdexcept>

namespace hsgd {

namespace {
double positive_part(double v) { return v > 0 ? v : 0.0; }
}  // namespace

LocalLbObjective::LocalLbObjective(const LocalLbParams& p) : params_(p) {
  const double H = p.smoothness, lam = p.strong_convexity;
  if (!(H > 0) || lam < 0) throw std::invalid_argument("need H > 0 and lambda >= 0");
  if (p.mu < lam || p.mu > H / 16.0 + 1e-15)
    throw std::invalid_argument("mu must lie in [lambda, H/16]");
  if (p.fourth_curvature < lam || p.fourth_curvature > H + 1e-15)
    throw std::invalid_argument("L must lie in [lambda, H]");
  if (p.mu > 2.0 * p.fourth_curvature)
    throw std::invalid_argument("mu must be <= 2L");
  if (p.zeta < 0 || p.sigma < 0) throw std::invalid_argument("zeta and sigma must be >= 0");
  if (p.machines < 2) throw std::invalid_argument("need at least two machines");
  if (!p.norm_bound && !p.suboptimality)
    throw std::invalid_argument("one of B, Delta must be given to scale the instance");

  double c_sq;
  if (p.norm_bound) {
    if (!(*p.norm_bound > 0)) throw std::invalid_argument("B must be > 0");
    c_sq = (*p.norm_bound) * (*p.norm_bound) / 2.0;
  } else {
    if (!(*p.suboptimality > 0)) throw std::invalid_argument("Delta must be > 0");
    if (!(p.mu > 0)) throw std::invalid_argument("Delta scaling needs mu > 0");
    c_sq = *p.suboptimality / p.mu;
  }
  c_ = std::sqrt(c_sq);
  x2_star_ = std::sqrt(p.mu) * c_ / std::sqrt(H);

  const int pairs = p.machines / 2;
  const bool padded = (p.machines % 2) != 0;
  const double m = static_cast<double>(p.machines);

  // Exact minimizer of the (possibly padded) average. Without padding, or
  // with a lambda = 0 pad, this is [c, sqrt(mu) c / sqrt(H), 0, 0].
  x_star_ = Eigen::VectorXd::Zero(4);
  if (padded && lam > 0) {
    const double w = 2.0 * pairs;  // weight of the G copies in the sum
    x_star_[0] = c_ * (w * p.mu) / (w * p.mu + lam);
    x_star_[1] = x2_star_ * (w * H) / (w * H + lam);
  } else {
    x_star_[0] = c_;
    x_star_[1] = x2_star_;
  }
  // coordinates 3 and 4 minimize at exactly zero in all cases

  double fsum = 0.0;
  for (int i = 0; i < p.machines; ++i) fsum += machine_value(i, x_star_);
  f_star_ = fsum / m;

  double zsum = 0.0;
  for (int i = 0; i < p.machines; ++i) zsum += machine_gradient(i, x_star_).squaredNorm();

  constants_.machines = p.machines;
  constants_.smoothness = H;
  constants_.strong_convexity = lam;
  constants_.noise_std = p.sigma;
  constants_.noise_std_at_opt = p.sigma;
  constants_.zeta_star = std::sqrt(zsum / m);
  // differing fourth-coordinate curvature makes sup_x ||grad F_1 - grad F||
  // unbounded unless L = mu and the instance is heterogeneity-free
  constants_.zeta_bar = (p.zeta == 0 && p.fourth_curvature == p.mu)
                            ? 0.0
                            : std::numeric_limits<double>::infinity();
  constants_.minimizer_norm_bound = x_star_.norm();
  const double f0 = [&] {
    double s = 0.0;
    for (int i = 0; i < p.machines; ++i) s += machine_value(i, Eigen::VectorXd::Zero(4));
    return s / m;
  }();
  constants_.initial_suboptimality = f0 - f_star_;
  constants_.validate();
}

LocalLbObjective::Role LocalLbObjective::role(int machine) const {
  const int pairs = params_.machines / 2;
  if (machine < pairs) return Role::f1;
  if (machine < 2 * pairs) return Role::f2;
  return Role::pad;
}

double LocalLbObjective::machine_value(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  const double H = params_.smoothness;
  if (role(machine) == Role::pad)
    return 0.5 * params_.strong_convexity * x.squaredNorm();
  const double g = 0.5 * params_.mu * (x[0] - c_) * (x[0] - c_) +
                   0.5 * H * (x[1] - x2_star_) * (x[1] - x2_star_) +
                   H / 8.0 * (x[2] * x[2] + positive_part(x[2]) * positive_part(x[2]));
  if (role(machine) == Role::f1)
    return g + 0.5 * params_.fourth_curvature * x[3] * x[3] + params_.zeta * x[3];
  return g + 0.5 * params_.mu * x[3] * x[3] - params_.zeta * x[3];
}

Eigen::VectorXd LocalLbObjective::machine_gradient(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  Eigen::VectorXd grad(4);
  if (role(machine) == Role::pad) {
    grad = params_.strong_convexity * x;
    return grad;
  }
  const double H = params_.smoothness;
  grad[0] = params_.mu * (x[0] - c_);
  grad[1] = H * (x[1] - x2_star_);
  // gradient of H/8 (x3^2 + [x3]_+^2): continuous, zero at x3 = 0
  grad[2] = H / 4.0 * x[2] + H / 4.0 * positive_part(x[2]);
  if (role(machine) == Role::f1)
    grad[3] = params_.fourth_curvature * x[3] + params_.zeta;
  else
    grad[3] = params_.mu * x[3] - params_.zeta;
  return grad;
}

Eigen::VectorXd LocalLbObjective::stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                                      RngStream& rng) const {
  Eigen::VectorXd g = machine_gradient(machine, x);
  if (params_.sigma > 0 && role(machine) != Role::pad) g[2] += rng.next_normal(params_.sigma);
  return g;
}

LocalLbObjective build_local_lb(const LocalLbParams& params) { return LocalLbObjective(params); }

std::vector<double> closed_form_x4_trajectory(double fourth_curvature, double mu, double zeta,
                                              double eta, int local_steps, int rounds) {
  const double L = fourth_curvature;
  if (!(L > 0) || !(mu > 0)) throw std::invalid_argument("need L > 0 and mu > 0");
  if (eta > 1.0 / L) throw std::invalid_argument("lemma requires eta <= 1/L");
  if (mu > 2.0 * L) throw std::invalid_argument("lemma requires mu <= 2L");
  if (local_steps < 1 || rounds < 1) throw std::invalid_argument("need K, R >= 1");
  const double a = std::pow(1.0 - mu * eta, local_steps);
  const double b = std::pow(1.0 - L * eta, local_steps);
  std::vector<double> out;
  out.reserve(rounds);
  double x = 0.0;
  for (int r = 0; r < rounds; ++r) {
    x = 0.5 * (zeta / mu - zeta / L + a * (x - zeta / mu) + b * (x + zeta / L));
    out.push_back(x);
  }
  return out;
}

double local_fixed_stepsize_floor(double mu, double offset_c, double smoothness, double zeta,
                                    int rounds) {
  const double r = static_cast<double>(rounds);
  const double progress = mu * offset_c * offset_c / 4.0 * std::exp(-6.0 * mu * r / smoothness);
  const double hetero = smoothness * zeta * zeta / (512.0 * mu * mu * r * r);
  return std::min(progress, hetero);
}

}  // namespace hsgd
