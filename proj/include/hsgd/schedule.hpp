#pragma once

#include <string>

namespace hsgd {

// Stepsize/weight schedules used by the runners. eta(t) is the stepsize of
// update t and weight(t) the averaging weight of the iterate *before* that
// update; outputs are weighted averages of pre-update consensus iterates.
class ScheduleSpec {
 public:
  enum class Kind { constant, stich, poly_decay, local_tuned_convex };

  static ScheduleSpec constant(double eta);

  // Exponential-then-polynomial schedule with kappa = 8H/lambda and
  // t0 = ceil(R/2):
  //   R <= 4H/lambda:           eta_t = 1/(4H), w_t = (1-lambda eta)^{-(t+1)}
  //   R  > 4H/lambda, t <  t0:  eta_t = 1/(4H), w_t = 0
  //   R  > 4H/lambda, t >= t0:  eta_t = 2/(lambda (kappa+t-t0)),
  //                             w_t = (kappa+t-t0)^2
  static ScheduleSpec stich(double smoothness, double strong_convexity, int rounds);

  // eta_t = 2/(lambda (a+t+1)), w_t = a+t
  static ScheduleSpec poly_decay(double strong_convexity, double a);

  // constant eta = min{1/(10H), B sqrt(M)/(sigma* sqrt(KR)),
  //                    (B^2/(H K^2 sigma^2))^{1/3}, (B^2/(H K^2 zetabar^2))^{1/3}}
  // (branches with a zero denominator are skipped); uniform weights
  static ScheduleSpec local_tuned_convex(double smoothness, double norm_bound, double sigma,
                                      double sigma_star, double zeta_bar, int machines,
                                      int local_steps, int rounds);

  // constant eta = min{1/(4H), B sqrt(MK)/(sigma* sqrt(R))}
  static double minibatch_tuned_convex_eta(double smoothness, double norm_bound, double sigma_star,
                                    int machines, int local_steps, int rounds);

  double eta(int t) const;
  double weight(int t) const;
  Kind kind() const { return kind_; }
  std::string name() const;
  double constant_eta() const;  // only for constant-like kinds

 private:
  ScheduleSpec() = default;
  Kind kind_ = Kind::constant;
  double eta_value_ = 0.0;     // constant / theorem2
  double lambda_ = 0.0;
  double a_ = 0.0;             // poly_decay offset
  double kappa_ = 0.0;         // stich
  int t0_ = 0;
  bool stich_small_horizon_ = true;
  double stich_eta_ = 0.0;
};

}  // namespace hsgd
