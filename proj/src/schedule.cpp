#include "hsgd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsgd {

ScheduleSpec ScheduleSpec::constant(double eta) {
  if (!(eta >= 0)) throw std::invalid_argument("eta must be >= 0");
  ScheduleSpec s;
  s.kind_ = Kind::constant;
  s.eta_value_ = eta;
  return s;
}

ScheduleSpec ScheduleSpec::stich(double smoothness, double strong_convexity, int rounds) {
  if (!(smoothness > 0) || !(strong_convexity > 0))
    throw std::invalid_argument("stich schedule needs H > 0 and lambda > 0");
  if (rounds < 1) throw std::invalid_argument("R must be >= 1");
  ScheduleSpec s;
  s.kind_ = Kind::stich;
  s.lambda_ = strong_convexity;
  s.stich_eta_ = 1.0 / (4.0 * smoothness);
  s.kappa_ = 8.0 * smoothness / strong_convexity;
  s.t0_ = static_cast<int>(std::ceil(rounds / 2.0));
  s.stich_small_horizon_ = rounds <= 4.0 * smoothness / strong_convexity;
  return s;
}

ScheduleSpec ScheduleSpec::poly_decay(double strong_convexity, double a) {
  if (!(strong_convexity > 0)) throw std::invalid_argument("poly_decay needs lambda > 0");
  if (!(a >= 0)) throw std::invalid_argument("a must be >= 0");
  ScheduleSpec s;
  s.kind_ = Kind::poly_decay;
  s.lambda_ = strong_convexity;
  s.a_ = a;
  return s;
}

ScheduleSpec ScheduleSpec::local_tuned_convex(double smoothness, double norm_bound, double sigma,
                                           double sigma_star, double zeta_bar, int machines,
                                           int local_steps, int rounds) {
  if (!(smoothness > 0) || !(norm_bound > 0))
    throw std::invalid_argument("local_tuned_convex needs H > 0 and B > 0");
  if (machines < 1 || local_steps < 1 || rounds < 1)
    throw std::invalid_argument("geometry must be positive");
  const double kr = static_cast<double>(local_steps) * rounds;
  double eta = 1.0 / (10.0 * smoothness);
  if (sigma_star > 0)
    eta = std::min(eta, norm_bound * std::sqrt(static_cast<double>(machines)) /
                            (sigma_star * std::sqrt(kr)));
  const double kk = static_cast<double>(local_steps) * local_steps;
  if (sigma > 0)
    eta = std::min(eta, std::cbrt(norm_bound * norm_bound / (smoothness * kk * sigma * sigma)));
  if (zeta_bar > 0 && std::isfinite(zeta_bar))
    eta = std::min(eta,
                   std::cbrt(norm_bound * norm_bound / (smoothness * kk * zeta_bar * zeta_bar)));
  ScheduleSpec s;
  s.kind_ = Kind::local_tuned_convex;
  s.eta_value_ = eta;
  return s;
}

double ScheduleSpec::minibatch_tuned_convex_eta(double smoothness, double norm_bound, double sigma_star,
                                         int machines, int local_steps, int rounds) {
  double eta = 1.0 / (4.0 * smoothness);
  if (sigma_star > 0)
    eta = std::min(eta, norm_bound * std::sqrt(static_cast<double>(machines) * local_steps) /
                            (sigma_star * std::sqrt(static_cast<double>(rounds))));
  return eta;
}

double ScheduleSpec::eta(int t) const {
  switch (kind_) {
    case Kind::constant:
    case Kind::local_tuned_convex:
      return eta_value_;
    case Kind::poly_decay:
      return 2.0 / (lambda_ * (a_ + t + 1));
    case Kind::stich:
      if (stich_small_horizon_ || t < t0_) return stich_eta_;
      return 2.0 / (lambda_ * (kappa_ + t - t0_));
  }
  return eta_value_;
}

double ScheduleSpec::weight(int t) const {
  switch (kind_) {
    case Kind::constant:
    case Kind::local_tuned_convex:
      return 1.0;
    case Kind::poly_decay:
      return a_ + t;
    case Kind::stich:
      if (stich_small_horizon_)
        return std::pow(1.0 - lambda_ * stich_eta_, -(t + 1.0));
      if (t < t0_) return 0.0;
      return (kappa_ + t - t0_) * (kappa_ + t - t0_);
  }
  return 1.0;
}

std::string ScheduleSpec::name() const {
  switch (kind_) {
    case Kind::constant: return "constant";
    case Kind::stich: return "stich";
    case Kind::poly_decay: return "poly_decay";
    case Kind::local_tuned_convex: return "local_tuned_convex";
  }
  return "constant";
}

double ScheduleSpec::constant_eta() const {
  if (kind_ != Kind::constant && kind_ != Kind::local_tuned_convex)
    throw std::logic_error("schedule has no single stepsize");
  return eta_value_;
}

}  // namespace hsgd
