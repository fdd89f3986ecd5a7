#include "hsgd/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace hsgd {

namespace {

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw std::invalid_argument(std::string("missing parameter: ") + name);
  if (!(*v >= 0)) throw std::invalid_argument(std::string("parameter must be >= 0: ") + name);
  return *v;
}

double need_pos(const std::optional<double>& v, const char* name) {
  const double x = need(v, name);
  if (!(x > 0)) throw std::invalid_argument(std::string("parameter must be > 0: ") + name);
  return x;
}

double need_lambda(const BoundParams& p) {
  const double lam = need(p.lambda, "lambda");
  if (!(lam > 0))
    throw std::invalid_argument("lambda = 0 passed to a strongly convex row");
  return lam;
}

struct Ctx {
  const BoundParams& p;
  double H() const { return need_pos(p.H, "H"); }
  double B() const { return need_pos(p.B, "B"); }
  double Delta() const { return need_pos(p.Delta, "Delta"); }
  double lam() const { return need_lambda(p); }
  double sigma() const { return need(p.sigma, "sigma"); }
  double sigma_star() const { return need(p.sigma_star, "sigma_star"); }
  double zs() const { return need(p.zeta_star, "zeta_star"); }
  double zb() const { return need(p.zeta_bar, "zeta_bar"); }
  double M() const { return need_pos(p.machines, "M"); }
  double K() const { return need_pos(p.local_steps, "K"); }
  double R() const { return need_pos(p.rounds, "R"); }
  double S() const { return need_pos(p.participants, "S"); }
  double MKR() const { return M() * K() * R(); }
};

double cbrt_term(double num, double denom_pow) { return std::cbrt(num) / denom_pow; }

double mbsgd_convex(const Ctx& c) {
  return c.H() * c.B() * c.B() / c.R() + c.sigma_star() * c.B() / std::sqrt(c.MKR());
}

double accel_mbsgd_convex(const Ctx& c) {
  return c.H() * c.B() * c.B() / (c.R() * c.R()) + c.sigma() * c.B() / std::sqrt(c.MKR());
}

double koloskova_convex(const Ctx& c) {
  const double b = c.B(), h = c.H(), r = c.R();
  const double b4 = b * b * b * b;
  return h * b * b / r + c.sigma_star() * b / std::sqrt(c.MKR()) +
         cbrt_term(h * c.zs() * c.zs() * b4, std::pow(r, 2.0 / 3.0)) +
         cbrt_term(h * c.sigma_star() * c.sigma_star() * b4,
                   std::cbrt(c.K()) * std::pow(r, 2.0 / 3.0));
}

double khaled_convex(const Ctx& c) {
  const double b = c.B(), h = c.H(), r = c.R();
  const double mix = c.sigma_star() * c.sigma_star() + c.zs() * c.zs();
  return h * b * b / r + b * std::sqrt(mix) / std::sqrt(c.MKR()) +
         cbrt_term(h * mix * b * b * b * b, std::pow(r, 2.0 / 3.0));
}

double scaffold_convex(const Ctx& c) {
  const double b = c.B(), h = c.H(), r = c.R();
  return h * b * b / r + c.sigma() * b / std::sqrt(c.MKR()) + c.zs() * c.zs() / (h * r) +
         c.sigma() * c.zs() / (h * std::sqrt(c.MKR()));
}

double local_ub_convex(const Ctx& c) {
  const double b = c.B(), h = c.H(), r = c.R(), k = c.K();
  const double b4 = b * b * b * b;
  return h * b * b / (k * r) + c.sigma_star() * b / std::sqrt(c.MKR()) +
         cbrt_term(h * c.zb() * c.zb() * b4, std::pow(r, 2.0 / 3.0)) +
         cbrt_term(h * c.sigma() * c.sigma() * b4, std::cbrt(k) * std::pow(r, 2.0 / 3.0));
}

double local_lb_convex(const Ctx& c) {
  const double b = c.B(), h = c.H(), r = c.R(), k = c.K();
  const double b4 = b * b * b * b;
  const double hetero = std::min(h * b * b / r,
                                 cbrt_term(h * c.zs() * c.zs() * b4, std::pow(r, 2.0 / 3.0)));
  return hetero + c.sigma() * b / std::sqrt(c.MKR()) +
         cbrt_term(h * c.sigma() * c.sigma() * b4,
                   std::pow(k, 2.0 / 3.0) * std::pow(r, 2.0 / 3.0));
}

double dzr_lb_convex(const Ctx& c) {
  const double b = c.B(), h = c.H(), r = c.R();
  return std::min(c.zs() * c.zs() / (h * r * r), h * b * b / (r * r)) +
         c.sigma() * b / std::sqrt(c.MKR());
}

double mbsgd_sc(const Ctx& c) {
  const double lam = c.lam();
  return c.H() * c.Delta() / lam * std::exp(-lam * c.R() / c.H()) +
         c.sigma_star() * c.sigma_star() / (lam * c.MKR());
}

double accel_mbsgd_sc(const Ctx& c) {
  const double lam = c.lam();
  return c.Delta() * std::exp(-std::sqrt(lam) * c.R() / std::sqrt(c.H())) +
         c.sigma() * c.sigma() / (lam * c.MKR());
}

double koloskova_sc(const Ctx& c) {
  const double lam = c.lam(), r = c.R(), h = c.H();
  return c.sigma_star() * c.sigma_star() / (lam * c.MKR()) +
         h * c.zs() * c.zs() / (lam * lam * r * r) +
         h * c.sigma_star() * c.sigma_star() / (lam * lam * c.K() * r * r);
}

double scaffold_sc(const Ctx& c) {
  const double lam = c.lam(), h = c.H();
  return (h * c.Delta() + lam * c.zs() * c.zs() / (h * h)) * std::exp(-lam * c.R() / h) +
         c.sigma() * c.sigma() / (lam * c.MKR());
}

// Strongly convex local SGD guarantee, log factor included where the
// source analysis places it.
double local_ub_sc(const Ctx& c) {
  const double lam = c.lam(), h = c.H(), k = c.K(), r = c.R(), b = c.B();
  const double log_term = std::log(h / lam + k * r);
  return h * h * b * b / (h * k * r + lam * k * k * r * r) +
         (h * c.zb() * c.zb() / (lam * lam * r * r) +
          h * c.sigma() * c.sigma() / (lam * lam * k * r * r)) *
             log_term +
         c.sigma_star() * c.sigma_star() / (lam * c.MKR());
}

double local_lb_sc(const Ctx& c) {
  const double lam = c.lam(), h = c.H(), r = c.R(), k = c.K();
  return std::min(c.Delta() * std::exp(-lam * r / h), h * c.zs() * c.zs() / (lam * lam * r * r)) +
         c.sigma() * c.sigma() / (lam * c.MKR()) +
         std::min(c.Delta(), h * c.sigma() * c.sigma() / (lam * lam * k * k * r * r));
}

double dzr_lb_sc(const Ctx& c) {
  const double lam = c.lam(), h = c.H();
  return std::min(c.Delta() * std::sqrt(lam) / std::sqrt(h), lam * c.zs() * c.zs() / (h * h)) *
             std::exp(-std::sqrt(lam) * c.R() / std::sqrt(h)) +
         c.sigma() * c.sigma() / (lam * c.MKR());
}

double subset_mbsgd_convex(const Ctx& c) {
  const double s = c.S(), m = c.M(), r = c.R(), b = c.B();
  return c.H() * b * b / r + c.sigma_star() * b / std::sqrt(s * c.K() * r) +
         std::sqrt(1.0 - s / m) * c.zs() * b / std::sqrt(s * r);
}

double subset_mbsgd_sc(const Ctx& c) {
  const double s = c.S(), m = c.M(), r = c.R(), lam = c.lam();
  return lam * c.B() * c.B() * std::exp(-lam * r / c.H()) +
         c.sigma_star() * c.sigma_star() / (lam * s * c.K() * r) +
         (1.0 - s / m) * c.zs() * c.zs() / (lam * s * r);
}

double scaffold_subset_convex(const Ctx& c) {
  const double s = c.S(), m = c.M(), r = c.R(), b = c.B(), h = c.H();
  return h * b * b / r + c.sigma() * b / std::sqrt(s * c.K() * r) +
         m * c.zs() * c.zs() / (h * s * r) +
         c.sigma() * c.zs() * std::sqrt(m) / (h * s * std::sqrt(c.K() * r));
}

double scaffold_subset_sc(const Ctx& c) {
  const double s = c.S(), m = c.M(), r = c.R(), lam = c.lam(), h = c.H();
  return lam * (c.B() * c.B() + m * c.zs() * c.zs() / (s * h * h)) *
             std::exp(-std::min(lam / h, s / m) * r) +
         c.sigma() * c.sigma() / (lam * s * c.K() * r);
}

double inner_outer_min(const Ctx& c) {
  return std::min(mbsgd_convex(c), local_ub_convex(c));
}

}  // namespace

std::vector<std::string> bound_names() {
  return {"mbsgd_convex",   "accel_mbsgd_convex", "koloskova_convex",
          "khaled_convex",  "scaffold_convex",    "local_ub_convex",
          "local_lb_convex", "dzr_lb_convex",     "mbsgd_sc",
          "accel_mbsgd_sc", "koloskova_sc",       "scaffold_sc",
          "local_ub_sc",    "local_lb_sc",        "dzr_lb_sc",
          "inner_outer_min", "subset_mbsgd_convex", "subset_mbsgd_sc",
          "scaffold_subset_convex", "scaffold_subset_sc"};
}

double eval_bound(const std::string& name, const BoundParams& params, ConstantMode) {
  const Ctx c{params};
  if (name == "mbsgd_convex") return mbsgd_convex(c);
  if (name == "accel_mbsgd_convex") return accel_mbsgd_convex(c);
  if (name == "koloskova_convex") return koloskova_convex(c);
  if (name == "khaled_convex") return khaled_convex(c);
  if (name == "scaffold_convex") return scaffold_convex(c);
  if (name == "local_ub_convex") return local_ub_convex(c);
  if (name == "local_lb_convex") return local_lb_convex(c);
  if (name == "dzr_lb_convex") return dzr_lb_convex(c);
  if (name == "mbsgd_sc") return mbsgd_sc(c);
  if (name == "accel_mbsgd_sc") return accel_mbsgd_sc(c);
  if (name == "koloskova_sc") return koloskova_sc(c);
  if (name == "scaffold_sc") return scaffold_sc(c);
  if (name == "local_ub_sc") return local_ub_sc(c);
  if (name == "local_lb_sc") return local_lb_sc(c);
  if (name == "dzr_lb_sc") return dzr_lb_sc(c);
  if (name == "inner_outer_min") return inner_outer_min(c);
  if (name == "subset_mbsgd_convex") return subset_mbsgd_convex(c);
  if (name == "subset_mbsgd_sc") return subset_mbsgd_sc(c);
  if (name == "scaffold_subset_convex") return scaffold_subset_convex(c);
  if (name == "scaffold_subset_sc") return scaffold_subset_sc(c);
  throw std::invalid_argument("unknown bound: " + name);
}

double crossover_zeta(double smoothness, double norm_bound, double rounds) {
  if (!(smoothness > 0) || !(norm_bound > 0) || !(rounds > 0))
    throw std::invalid_argument("crossover_zeta needs positive inputs");
  return smoothness * smoothness * norm_bound * norm_bound / rounds;
}

OptimalityVerdict optimality_region(ConvexityCase which, const BoundParams& params) {
  const Ctx c{params};
  if (which == ConvexityCase::convex) {
    const double threshold = c.H() * c.B();
    const double edge = threshold / std::sqrt(c.R());
    if (c.zs() >= threshold) return OptimalityVerdict::accelerated_mb_optimal;
    if (c.zs() >= edge) return OptimalityVerdict::gap_region;
    return OptimalityVerdict::low_heterogeneity;
  }
  const double threshold = std::pow(c.H(), 1.5) / std::sqrt(c.lam());
  const double zs_sq = c.zs() * c.zs();
  if (zs_sq >= threshold) return OptimalityVerdict::accelerated_mb_optimal;
  if (zs_sq >= threshold / c.R()) return OptimalityVerdict::gap_region;
  return OptimalityVerdict::low_heterogeneity;
}

std::string verdict_name(OptimalityVerdict v) {
  switch (v) {
    case OptimalityVerdict::accelerated_mb_optimal: return "accelerated_mb_optimal";
    case OptimalityVerdict::gap_region: return "gap_region";
    case OptimalityVerdict::low_heterogeneity: return "low_heterogeneity";
  }
  return "low_heterogeneity";
}

}  // namespace hsgd
