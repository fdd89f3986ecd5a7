#include "hsgd/checks.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "hsgd/chain.hpp"
#include "hsgd/dataset.hpp"
#include "hsgd/harness.hpp"
#include "hsgd/local_lb.hpp"
#include "hsgd/logreg.hpp"
#include "hsgd/optimizers.hpp"
#include "hsgd/quadratic.hpp"
#include "hsgd/rates.hpp"

namespace hsgd {

namespace {

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

bool bitwise_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() || std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

CheckResult check_variance_law() {
  // full participation: round-estimator variance sigma^2/(MK) at a fixed x
  LocalLbParams lp;
  lp.smoothness = 16.0;
  lp.strong_convexity = 1.0;
  lp.mu = 1.0;
  lp.fourth_curvature = 8.0;
  lp.zeta = 1.0;
  lp.sigma = 2.0;
  lp.suboptimality = 1.0;
  lp.machines = 4;
  const LocalLbObjective obj(lp);
  Eigen::VectorXd x(4);
  x << 0.3, -0.2, 0.5, 0.1;
  const Eigen::VectorXd mean = average_gradient(obj, x);
  const int repeats = 100000, k_steps = 5;
  double acc = 0.0;
  for (int r = 0; r < repeats; ++r)
    acc += (minibatch_gradient(obj, x, k_steps, 99, 0, static_cast<std::uint64_t>(r)) - mean)
               .squaredNorm();
  const double var_full = acc / repeats;
  const double want_full = lp.sigma * lp.sigma / (lp.machines * k_steps);  // 0.2
  const double rel_full = std::abs(var_full / want_full - 1.0);

  // random-subset participation at the optimum:
  // sigma*^2/(SK) + (1 - S/M) zeta*^2 / S
  const int m_sub = 25, s_sub = 10, k_sub = 2;
  const double zeta_sq = 1.0, sigma_sub = 2.0;
  const MeanShiftQuadratic qobj = exact_zeta_quadratic(6, m_sub, zeta_sq, sigma_sub, 11);
  const Eigen::VectorXd xs = *qobj.known_minimizer();
  double acc_sub = 0.0;
  for (int r = 0; r < repeats; ++r)
    acc_sub += subset_minibatch_gradient(qobj, xs, k_sub, s_sub, 123, 0,
                                         static_cast<std::uint64_t>(r))
                   .squaredNorm();
  const double var_sub = acc_sub / repeats;
  const double want_sub = sigma_sub * sigma_sub / (s_sub * k_sub) +
                          (1.0 - static_cast<double>(s_sub) / m_sub) * zeta_sq / s_sub;
  const double rel_sub = std::abs(var_sub / want_sub - 1.0);

  CheckResult res;
  res.name = "minibatch variance law";
  res.pass = rel_full <= 0.05 && rel_sub <= 0.05;
  res.detail = fmt("full %.5f vs %.5f (rel %.3f%%), subset %.5f vs %.5f (rel %.3f%%)", var_full,
                   want_full, 100 * rel_full, var_sub, want_sub, 100 * rel_sub);
  return res;
}

CheckResult check_heterogeneity_immunity() {
  CheckResult res;
  res.name = "minibatch heterogeneity immunity";
  res.pass = true;
  for (int machines : {2, 4}) {
    std::vector<RunResult> runs;
    for (double zeta : {0.0, 1.0, 10.0}) {
      LocalLbParams lp;
      lp.smoothness = 16.0;
      lp.strong_convexity = 1.0;
      lp.mu = 1.0;
      lp.fourth_curvature = 8.0;
      lp.zeta = zeta;
      lp.sigma = 0.0;
      lp.suboptimality = 1.0;
      lp.machines = machines;
      const LocalLbObjective obj(lp);
      CommGeometry geom{machines, 3, 20, -1};
      RunOptions opts;
      opts.record_iterates = true;
      runs.push_back(
          run_minibatch_sgd(obj, geom, ScheduleSpec::constant(0.05), 2024, opts));
    }
    for (std::size_t i = 1; i < runs.size(); ++i) {
      if (!bitwise_equal(runs[0].suboptimality_series, runs[i].suboptimality_series) ||
          !bitwise_equal(runs[0].output_point, runs[i].output_point))
        res.pass = false;
      for (std::size_t r = 0; r < runs[0].iterates.size(); ++r)
        if (!bitwise_equal(runs[0].iterates[r], runs[i].iterates[r])) res.pass = false;
    }
  }
  res.detail = res.pass ? "trajectories bit-identical for zeta in {0,1,10}, M in {2,4}"
                        : "trajectories differ across zeta";
  return res;
}

CheckResult check_x4_closed_form() {
  CheckResult res;
  res.name = "local SGD fourth-coordinate closed form";
  res.pass = true;
  double worst = 0.0;
  const double etas[] = {0.001, 0.004, 0.01, 0.03, 0.06, 0.09, 0.115, 0.125, 0.05, 0.02};
  const int ks[] = {1, 2, 4, 8, 3, 5, 16, 2, 6, 10};
  const int rs[] = {1, 3, 5, 8, 12, 20, 4, 30, 10, 7};
  for (int i = 0; i < 10; ++i) {
    LocalLbParams lp;
    lp.smoothness = 16.0;
    lp.strong_convexity = 1.0;
    lp.mu = 1.0;
    lp.fourth_curvature = 8.0;
    lp.zeta = 1.5;
    lp.sigma = 0.0;
    lp.suboptimality = 1.0;
    const LocalLbObjective obj(lp);
    CommGeometry geom{2, ks[i], rs[i], -1};
    RunOptions opts;
    opts.record_iterates = true;
    const RunResult run =
        run_local_sgd(obj, geom, ScheduleSpec::constant(etas[i]), 7 + i, opts);
    const auto oracle =
        closed_form_x4_trajectory(lp.fourth_curvature, lp.mu, lp.zeta, etas[i], ks[i], rs[i]);
    for (int r = 0; r < rs[i]; ++r) {
      const double diff = std::abs(run.iterates[r][3] - oracle[r]);
      worst = std::max(worst, diff);
      if (diff > 1e-12) res.pass = false;
    }
  }
  res.detail = fmt("max |simulated - recursion| = %.3g over 10 grid points", worst);
  return res;
}

CheckResult check_stepsize_floor_and_crossover() {
  LocalLbParams lp;
  lp.smoothness = 16.0;
  lp.strong_convexity = 0.0;
  lp.mu = 1.0;
  lp.fourth_curvature = 16.0;  // L = H sharpens the noiseless comparison
  lp.zeta = std::sqrt(10.0);
  lp.sigma = 0.0;
  lp.suboptimality = 1.0;
  const LocalLbObjective obj(lp);
  const int k_steps = 8, rounds = 32;
  const double floor = local_fixed_stepsize_floor(lp.mu, obj.offset(), lp.smoothness, lp.zeta,
                                                  rounds);

  const double b = *obj.constants().minimizer_norm_bound;
  const double crossover = crossover_zeta(lp.smoothness, b, rounds);
  const bool above_crossover = lp.zeta * lp.zeta >= crossover;

  auto log_grid = [](double lo, double hi, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i)
      out.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1)));
    return out;
  };

  CommGeometry geom{2, k_steps, rounds, -1};
  bool floor_holds = true;
  double local_best = std::numeric_limits<double>::infinity();
  double worst_margin = std::numeric_limits<double>::infinity();
  for (double eta : log_grid(1e-4, 1.0 / lp.fourth_curvature, 50)) {
    const RunResult run = run_local_sgd(obj, geom, ScheduleSpec::constant(eta), 5);
    const double err = run.final_round_suboptimality;
    local_best = std::min(local_best, err);
    worst_margin = std::min(worst_margin, err - floor);
    if (err < floor * (1.0 - 1e-9)) floor_holds = false;
  }

  double minibatch_best = std::numeric_limits<double>::infinity();
  for (double eta : log_grid(1e-4, 1.9 / lp.smoothness, 50)) {
    const RunResult run = run_minibatch_sgd(obj, geom, ScheduleSpec::constant(eta), 5);
    minibatch_best = std::min(minibatch_best, run.final_round_suboptimality);
  }
  const bool ordering = local_best > minibatch_best;

  CheckResult res;
  res.name = "fixed-stepsize floor and crossover ordering";
  res.pass = floor_holds && above_crossover && ordering;
  res.detail = fmt("floor %.3g, min margin %.3g, local best %.3g > minibatch best %.3g, "
                   "zeta^2 %.2f >= crossover %.2f",
                   floor, worst_margin, local_best, minibatch_best, lp.zeta * lp.zeta, crossover);
  return res;
}

CheckResult check_explicit_constant_bounds() {
  int violations = 0;
  double worst_ratio = 0.0;  // empirical / bound, max over runs
  const int instances = 20, seeds = 5;

  // (a) convex minibatch with the tuned constant stepsize:
  //     4 H B^2 / R + 3 sigma* B / sqrt(MKR)
  for (int i = 0; i < instances; ++i) {
    const int m = 2 + (i % 4), k = 1 + (i % 3), r = 8 << (i % 3);
    const double sigma = 0.5 * (i % 3);
    const double zeta_rms = 0.4 * (i % 4);
    const MeanShiftQuadratic obj =
        random_quadratic(8, m, 0.25, 2.0 + 0.25 * i, 1.5, zeta_rms, sigma, 300 + i);
    const auto& c = obj.constants();
    const double b_star = *c.minimizer_norm_bound;
    const double eta = ScheduleSpec::minibatch_tuned_convex_eta(c.smoothness, b_star,
                                                                c.noise_std_at_opt, m, k, r);
    const double bound = 4.0 * c.smoothness * b_star * b_star / r +
                         3.0 * c.noise_std_at_opt * b_star /
                             std::sqrt(static_cast<double>(m) * k * r);
    for (int s = 0; s < seeds; ++s) {
      RunOptions opts;
      opts.replicate = static_cast<std::uint64_t>(s);
      const RunResult run = run_minibatch_sgd(obj, CommGeometry{m, k, r, -1},
                                              ScheduleSpec::constant(eta), 400 + s, opts);
      worst_ratio = std::max(worst_ratio, run.output_suboptimality / bound);
      if (run.output_suboptimality > bound) ++violations;
    }
  }

  // (b) strongly convex minibatch with the stich schedule:
  //     128 H ||x0 - x*||^2 exp(-lambda R/(8H)) + 72 sigma*^2/(lambda MKR)
  for (int i = 0; i < instances; ++i) {
    const int m = 2 + (i % 3), k = 1 + (i % 4), r = (i % 2) ? 16 : 96;
    const double sigma = 0.5 * (i % 3);
    const MeanShiftQuadratic obj =
        random_quadratic(6, m, 0.5, 3.0, 1.2, 0.3 * (i % 3), sigma, 900 + i);
    const auto& c = obj.constants();
    const double dist_sq = obj.known_minimizer()->squaredNorm();
    const double bound =
        128.0 * c.smoothness * dist_sq *
            std::exp(-c.strong_convexity * r / (8.0 * c.smoothness)) +
        72.0 * c.noise_std_at_opt * c.noise_std_at_opt /
            (c.strong_convexity * static_cast<double>(m) * k * r);
    const auto sched = ScheduleSpec::stich(c.smoothness, c.strong_convexity, r);
    for (int s = 0; s < seeds; ++s) {
      RunOptions opts;
      opts.replicate = static_cast<std::uint64_t>(s);
      const RunResult run =
          run_minibatch_sgd(obj, CommGeometry{m, k, r, -1}, sched, 500 + s, opts);
      worst_ratio = std::max(worst_ratio, run.output_suboptimality / bound);
      if (run.output_suboptimality > bound) ++violations;
    }
  }

  // (c) convex local SGD with the tuned stepsize: the four-term guarantee
  //     with constants (10, 13, 7, 4)
  for (int i = 0; i < instances; ++i) {
    const int m = 2 + (i % 3), k = 2 << (i % 3), r = 8 << (i % 2);
    const double sigma = 0.3 + 0.3 * (i % 3);
    const double zeta_rms = 0.2 + 0.3 * (i % 4);
    const MeanShiftQuadratic obj =
        random_quadratic(8, m, 0.25, 2.5, 1.5, zeta_rms, sigma, 1300 + i);
    const auto& c = obj.constants();
    const double b_star = *c.minimizer_norm_bound;
    const double b4 = b_star * b_star * b_star * b_star;
    const double bound =
        10.0 * c.smoothness * b_star * b_star / (static_cast<double>(k) * r) +
        13.0 * std::cbrt(c.smoothness * c.zeta_bar * c.zeta_bar * b4) / std::pow(r, 2.0 / 3.0) +
        7.0 * std::cbrt(c.smoothness * c.noise_std * c.noise_std * b4) /
            (std::cbrt(static_cast<double>(k)) * std::pow(r, 2.0 / 3.0)) +
        4.0 * c.noise_std_at_opt * b_star / std::sqrt(static_cast<double>(m) * k * r);
    const auto sched = ScheduleSpec::local_tuned_convex(c.smoothness, b_star, c.noise_std,
                                                        c.noise_std_at_opt, c.zeta_bar, m, k, r);
    for (int s = 0; s < seeds; ++s) {
      RunOptions opts;
      opts.replicate = static_cast<std::uint64_t>(s);
      const RunResult run = run_local_sgd(obj, CommGeometry{m, k, r, -1}, sched, 600 + s, opts);
      worst_ratio = std::max(worst_ratio, run.output_suboptimality / bound);
      if (run.output_suboptimality > bound) ++violations;
    }
  }

  CheckResult res;
  res.name = "explicit-constant upper bounds";
  res.pass = violations == 0;
  res.detail = fmt("%d violations over %d runs, worst empirical/bound = %.4f", violations,
                   3 * instances * seeds, worst_ratio);
  return res;
}

CheckResult check_chain_geometry() {
  CheckResult res;
  res.name = "chain lower-bound geometry";
  res.pass = true;
  std::ostringstream detail;

  const ChainObjective obj = build_chain(9.0, 1.0, 1.0, 3);
  // independent root of 1 - 3q + q^2 = 0 (smaller branch) by bisection
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((1.0 - 3.0 * mid + mid * mid > 0) ? lo : hi) = mid;
  }
  if (std::abs(obj.q() - lo) > 1e-9) res.pass = false;

  const Eigen::VectorXd xs = *obj.known_minimizer();
  const double grad_norm = average_gradient(obj, xs).norm();
  if (!(grad_norm < 1e-8)) res.pass = false;

  const double f_direct = obj.value(xs);
  const double f_closed = *obj.known_optimal_value();
  if (std::abs(f_direct - f_closed) > 1e-10 * std::abs(f_closed)) res.pass = false;
  detail << fmt("q err %.2g, |grad F(x*)| %.2g, F* rel err %.2g", std::abs(obj.q() - lo),
                grad_norm, std::abs(f_direct / f_closed - 1.0));

  // every runner stays zero-respecting on the chain
  const int rounds = 6;
  const ChainObjective chain = build_chain(9.0, 1.0, 1.0, rounds, 4);
  RunOptions opts;
  opts.record_support = true;
  const CommGeometry geom{4, 3, rounds, -1};
  const CommGeometry sub_geom{4, 3, rounds, 2};
  const auto sched = ScheduleSpec::constant(0.05);
  const std::vector<RunResult> runs = {
      run_minibatch_sgd(chain, geom, sched, 3, opts),
      run_local_sgd(chain, geom, sched, 3, opts),
      run_inner_outer(chain, geom, 0.03, 0.02, 3, opts),
      run_acsa(chain, geom, false, 3, opts),
      run_multistage_acsa(chain, geom, *chain.constants().initial_suboptimality, 3, opts),
      run_local_sgd(chain, sub_geom, sched, 3, opts),
  };
  for (const auto& run : runs) {
    const auto verdict = check_support_progress(run);
    if (!verdict.pass) {
      res.pass = false;
      detail << fmt("; %s leaked coord %d at round %d", run.algorithm.c_str(),
                    verdict.coordinate, verdict.round);
    }
  }

  // residual floor vs exact restricted minimization (small dimensions)
  const ChainObjective small = build_chain(9.0, 1.0, 1.0, 4);  // d = 6
  const int d = small.dimension();
  if (d > 8) res.pass = false;
  Eigen::MatrixXd hess(d, d);
  const Eigen::VectorXd g0 = average_gradient(small, Eigen::VectorXd::Zero(d));
  for (int j = 0; j < d; ++j)
    hess.col(j) = average_gradient(small, Eigen::VectorXd::Unit(d, j)) - g0;
  const double fstar = *small.known_optimal_value();
  double min_gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= d; ++k) {
    const Eigen::VectorXd xk = [&] {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(d);
      full.head(k) = hess.topLeftCorner(k, k).ldlt().solve(-g0.head(k));
      return full;
    }();
    const double restricted = small.value(xk) - fstar;
    const double bound = chain_residual_lower_bound(small, k);
    min_gap = std::min(min_gap, restricted - bound);
    if (restricted < bound - 1e-12) res.pass = false;
  }
  detail << fmt("; restricted-min slack >= %.3g", min_gap);

  res.detail = detail.str();
  return res;
}

CheckResult check_reduction_identities() {
  CheckResult res;
  res.name = "reduction identities";
  res.pass = true;
  std::string failure;

  const MeanShiftQuadratic obj = random_quadratic(6, 3, 0.5, 3.0, 1.0, 0.5, 0.8, 77);
  const double eta = 0.07;

  {  // K = 1: local == minibatch, everything bit-identical
    const CommGeometry geom{3, 1, 9, -1};
    const auto a = run_local_sgd(obj, geom, ScheduleSpec::constant(eta), 42);
    const auto b = run_minibatch_sgd(obj, geom, ScheduleSpec::constant(eta), 42);
    if (!bitwise_equal(a.suboptimality_series, b.suboptimality_series) ||
        !bitwise_equal(a.final_iterate, b.final_iterate) ||
        !bitwise_equal(a.output_point, b.output_point))
      failure += "K=1;";
  }
  {  // equal stepsizes: inner/outer == local, bit-identical
    const CommGeometry geom{3, 4, 7, -1};
    const auto a = run_inner_outer(obj, geom, eta, eta, 42);
    const auto b = run_local_sgd(obj, geom, ScheduleSpec::constant(eta), 42);
    if (!bitwise_equal(a.suboptimality_series, b.suboptimality_series) ||
        !bitwise_equal(a.final_iterate, b.final_iterate) ||
        !bitwise_equal(a.output_point, b.output_point))
      failure += "inner=outer;";
  }
  {  // zero inner stepsize: inner/outer == minibatch on the same per-step
     // scale eta/K (the dual-stepsize rule sums K local directions)
    const int k = 4;
    const CommGeometry geom{3, k, 7, -1};
    const auto a = run_inner_outer(obj, geom, 0.0, eta / k, 42);
    const auto b = run_minibatch_sgd(obj, geom, ScheduleSpec::constant(eta), 42);
    if (!bitwise_equal(a.suboptimality_series, b.suboptimality_series) ||
        !bitwise_equal(a.final_iterate, b.final_iterate))
      failure += "inner=0;";
  }
  {  // S = M subsets match full participation
    const CommGeometry full{3, 2, 8, -1};
    const CommGeometry all{3, 2, 8, 3};
    const auto a = run_local_sgd(obj, full, ScheduleSpec::constant(eta), 42);
    const auto b = run_local_sgd(obj, all, ScheduleSpec::constant(eta), 42);
    const auto c = run_minibatch_sgd(obj, full, ScheduleSpec::constant(eta), 42);
    const auto d = run_minibatch_sgd(obj, all, ScheduleSpec::constant(eta), 42);
    if (!bitwise_equal(a.output_point, b.output_point) ||
        !bitwise_equal(a.suboptimality_series, b.suboptimality_series) ||
        !bitwise_equal(c.output_point, d.output_point))
      failure += "S=M;";
  }
  res.pass = failure.empty();
  res.detail = res.pass ? "all reductions bit-identical" : "failed: " + failure;
  return res;
}

namespace {

// Straight-line re-computation of every row, kept deliberately independent
// of rates.cpp.
double reference_bound(const std::string& name, double H, double B, double D, double lam,
                       double sg, double ss, double zs, double zb, double M, double K, double R,
                       double S) {
  const double MKR = M * K * R;
  const double B4 = B * B * B * B;
  const double r23 = std::pow(R, 2.0 / 3.0);
  if (name == "mbsgd_convex") return H * B * B / R + ss * B / std::sqrt(MKR);
  if (name == "accel_mbsgd_convex") return H * B * B / (R * R) + sg * B / std::sqrt(MKR);
  if (name == "koloskova_convex")
    return H * B * B / R + ss * B / std::sqrt(MKR) + std::cbrt(H * zs * zs * B4) / r23 +
           std::cbrt(H * ss * ss * B4) / (std::cbrt(K) * r23);
  if (name == "khaled_convex")
    return H * B * B / R + B * std::sqrt(ss * ss + zs * zs) / std::sqrt(MKR) +
           std::cbrt(H * (ss * ss + zs * zs) * B4) / r23;
  if (name == "scaffold_convex")
    return H * B * B / R + sg * B / std::sqrt(MKR) + zs * zs / (H * R) +
           sg * zs / (H * std::sqrt(MKR));
  if (name == "local_ub_convex")
    return H * B * B / (K * R) + ss * B / std::sqrt(MKR) + std::cbrt(H * zb * zb * B4) / r23 +
           std::cbrt(H * sg * sg * B4) / (std::cbrt(K) * r23);
  if (name == "local_lb_convex")
    return std::min(H * B * B / R, std::cbrt(H * zs * zs * B4) / r23) + sg * B / std::sqrt(MKR) +
           std::cbrt(H * sg * sg * B4) / (std::pow(K, 2.0 / 3.0) * r23);
  if (name == "dzr_lb_convex")
    return std::min(zs * zs / (H * R * R), H * B * B / (R * R)) + sg * B / std::sqrt(MKR);
  if (name == "mbsgd_sc")
    return H * D / lam * std::exp(-lam * R / H) + ss * ss / (lam * MKR);
  if (name == "accel_mbsgd_sc")
    return D * std::exp(-std::sqrt(lam / H) * R) + sg * sg / (lam * MKR);
  if (name == "koloskova_sc")
    return ss * ss / (lam * MKR) + H * zs * zs / (lam * lam * R * R) +
           H * ss * ss / (lam * lam * K * R * R);
  if (name == "scaffold_sc")
    return (H * D + lam * zs * zs / (H * H)) * std::exp(-lam * R / H) + sg * sg / (lam * MKR);
  if (name == "local_ub_sc")
    return H * H * B * B / (H * K * R + lam * K * K * R * R) +
           (H * zb * zb / (lam * lam * R * R) + H * sg * sg / (lam * lam * K * R * R)) *
               std::log(H / lam + K * R) +
           ss * ss / (lam * MKR);
  if (name == "local_lb_sc")
    return std::min(D * std::exp(-lam * R / H), H * zs * zs / (lam * lam * R * R)) +
           sg * sg / (lam * MKR) + std::min(D, H * sg * sg / (lam * lam * K * K * R * R));
  if (name == "dzr_lb_sc")
    return std::min(D * std::sqrt(lam / H), lam * zs * zs / (H * H)) *
               std::exp(-std::sqrt(lam / H) * R) +
           sg * sg / (lam * MKR);
  if (name == "inner_outer_min")
    return std::min(reference_bound("mbsgd_convex", H, B, D, lam, sg, ss, zs, zb, M, K, R, S),
                    reference_bound("local_ub_convex", H, B, D, lam, sg, ss, zs, zb, M, K, R, S));
  if (name == "subset_mbsgd_convex")
    return H * B * B / R + ss * B / std::sqrt(S * K * R) +
           std::sqrt(1.0 - S / M) * zs * B / std::sqrt(S * R);
  if (name == "subset_mbsgd_sc")
    return lam * B * B * std::exp(-lam * R / H) + ss * ss / (lam * S * K * R) +
           (1.0 - S / M) * zs * zs / (lam * S * R);
  if (name == "scaffold_subset_convex")
    return H * B * B / R + sg * B / std::sqrt(S * K * R) + M * zs * zs / (H * S * R) +
           sg * zs * std::sqrt(M) / (H * S * std::sqrt(K * R));
  if (name == "scaffold_subset_sc")
    return lam * (B * B + M * zs * zs / (S * H * H)) *
               std::exp(-std::min(lam / H, S / M) * R) +
           sg * sg / (lam * S * K * R);
  throw std::invalid_argument("reference_bound: " + name);
}

}  // namespace

CheckResult check_rate_tables() {
  CheckResult res;
  res.name = "rate-table fidelity";
  res.pass = true;
  double worst = 0.0;

  const double sets[3][13] = {
      // H    B    D   lam   sg   ss   zs   zb    M    K    R    S
      {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
      {3.7, 1.4, 2.2, 0.41, 1.9, 0.8, 2.6, 3.1, 16, 8, 64, 10},
      {9.0, 0.6, 5.0, 0.09, 0.3, 0.1, 7.7, 9.9, 25, 32, 128, 5},
  };
  for (const auto& v : sets) {
    BoundParams p;
    p.H = v[0]; p.B = v[1]; p.Delta = v[2]; p.lambda = v[3];
    p.sigma = v[4]; p.sigma_star = v[5]; p.zeta_star = v[6]; p.zeta_bar = v[7];
    p.machines = v[8]; p.local_steps = v[9]; p.rounds = v[10]; p.participants = v[11];
    for (const auto& name : bound_names()) {
      const double got = eval_bound(name, p);
      const double want = reference_bound(name, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7],
                                          v[8], v[9], v[10], v[11]);
      const double rel = std::abs(got - want) / std::max(1e-300, std::abs(want));
      worst = std::max(worst, rel);
      if (rel > 1e-12) res.pass = false;
    }
    // combined rule is exactly the min of its two branches
    const double combined = eval_bound("inner_outer_min", p);
    if (combined != std::min(eval_bound("mbsgd_convex", p), eval_bound("local_ub_convex", p)))
      res.pass = false;
    // convex subset rows collapse onto full participation at S = M
    BoundParams q = p;
    q.participants = q.machines;
    if (std::abs(eval_bound("subset_mbsgd_convex", q) - eval_bound("mbsgd_convex", q)) >
        1e-12 * eval_bound("mbsgd_convex", q))
      res.pass = false;
    if (std::abs(eval_bound("scaffold_subset_convex", q) - eval_bound("scaffold_convex", q)) >
        1e-12 * eval_bound("scaffold_convex", q))
      res.pass = false;
  }

  // homogeneous limit drops the heterogeneity term
  {
    BoundParams p;
    p.H = 2.0; p.B = 1.5; p.sigma = 1.0; p.sigma_star = 0.7; p.zeta_bar = 0.0;
    p.machines = 4; p.local_steps = 8; p.rounds = 16;
    const double got = eval_bound("local_ub_convex", p);
    const double b = 1.5, b4 = b * b * b * b;
    const double want = 2.0 * b * b / (8.0 * 16.0) + 0.7 * b / std::sqrt(4.0 * 8.0 * 16.0) +
                        std::cbrt(2.0 * 1.0 * b4) / (std::cbrt(8.0) * std::pow(16.0, 2.0 / 3.0));
    if (std::abs(got - want) > 1e-12 * want) res.pass = false;
  }
  res.detail = fmt("max relative deviation %.3g over %zu rows x 3 parameter sets", worst,
                   bound_names().size());
  return res;
}

CheckResult check_pipeline() {
  CheckResult res;
  res.name = "data pipeline";
  res.pass = true;
  std::ostringstream detail;

  // IDX fixtures round-trip
  {
    IdxImages img;
    img.count = 1; img.rows = 2; img.cols = 2;
    img.pixels = {0, 255, 16, 32};
    const auto bytes = encode_idx_images(img);
    const auto back = parse_idx(bytes);
    if (back.kind != IdxKind::images || back.images.pixels != img.pixels ||
        back.images.rows != 2 || back.images.cols != 2)
      res.pass = false;
    IdxLabels lbl;
    lbl.labels = {3, 1, 4};
    if (parse_idx(encode_idx_labels(lbl)).labels.labels != lbl.labels) res.pass = false;
  }

  const FeatureDataset raw = synth_digit_corpus(71, 120, 40);
  const FeatureDataset ds = pca_reduce_dataset(raw, 16);

  // analytic logistic derivatives vs central finite differences
  {
    const auto assignment = build_tasks_and_assign(ds, 0.6, 5);
    const LogisticObjective obj(ds, assignment);
    RngStream rng(99, StreamTag::probe);
    double worst_g = 0.0, worst_h = 0.0;
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXd x(obj.dimension());
      for (int i = 0; i < x.size(); ++i) x[i] = rng.next_normal(0.4);
      const int m = probe % obj.machines();
      const double step = 1e-6 * (1.0 + x.norm());
      const Eigen::VectorXd g = obj.machine_gradient(m, x);
      const Eigen::MatrixXd h = obj.machine_hessian(m, x);
      for (int j = 0; j < std::min<int>(4, x.size()); ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
        e[j] = step;
        const double fd_g = (obj.machine_value(m, x + e) - obj.machine_value(m, x - e)) /
                            (2.0 * step);
        worst_g = std::max(worst_g, std::abs(fd_g - g[j]) / std::max(1.0, std::abs(g[j])));
        const Eigen::VectorXd fd_h =
            (obj.machine_gradient(m, x + e) - obj.machine_gradient(m, x - e)) / (2.0 * step);
        worst_h = std::max(worst_h,
                           (fd_h - h.col(j)).norm() / std::max(1.0, h.col(j).norm()));
      }
    }
    if (worst_g > 1e-6 || worst_h > 1e-4) res.pass = false;
    detail << fmt("fd grad %.2g hess %.2g", worst_g, worst_h);
  }

  // Newton reaches the target gradient norm on the surrogate corpus
  {
    const auto assignment = build_tasks_and_assign(ds, 0.4, 5);
    LogisticObjective obj(ds, assignment);
    const Eigen::VectorXd xs = newton_minimize(obj, 1e-10);
    const double gn = obj.global_gradient(xs).norm();
    if (!(gn <= 1e-10)) res.pass = false;
    detail << fmt("; newton |grad| %.2g", gn);
  }

  // zeta*^2(p) non-decreasing within two standard errors over four seeds
  {
    const std::vector<double> grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<std::vector<double>> profiles;
    for (std::uint64_t seed : {21u, 22u, 23u, 24u}) {
      std::vector<double> prof;
      for (const auto& [p, z] : measure_zeta_profile(ds, grid, seed)) prof.push_back(z);
      profiles.push_back(std::move(prof));
    }
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      double mean = 0.0, var = 0.0;
      std::vector<double> diffs;
      for (const auto& prof : profiles) diffs.push_back(prof[i + 1] - prof[i]);
      for (double d : diffs) mean += d;
      mean /= diffs.size();
      for (double d : diffs) var += (d - mean) * (d - mean);
      const double se = std::sqrt(var / (diffs.size() - 1) / diffs.size());
      if (mean < -2.0 * se) res.pass = false;
    }
    detail << "; zeta profile monotone within 2 SE";
  }

  res.detail = detail.str();
  return res;
}

CheckResult check_determinism() {
  const char* config_text = R"({
    "schema_version": 1,
    "instance": {"family": "local_lb", "H": 16, "lambda": 1, "mu": 1, "L": 8,
                 "zeta": 1.0, "sigma": 0.5, "Delta": 1.0, "M": 4},
    "algorithms": [{"algo": "minibatch"}, {"algo": "local"}],
    "geometry": {"M": [4], "K": [2, 4], "R": [10], "S": [4, 2]},
    "stepsizes": {"min": 0.001, "max": 0.1, "points": 4},
    "replicates": 2,
    "master_seed": 31
  })";
  const auto cfg = parse_experiment_config(config_text);
  const auto a = sweep(cfg, 1);
  const auto b = sweep(cfg, 4);
  const auto c = sweep(cfg, 3);
  CheckResult res;
  res.name = "thread-count determinism";
  res.pass = a.cells_csv == b.cells_csv && a.summary_csv == b.summary_csv &&
             a.cells_csv == c.cells_csv && a.summary_csv == c.summary_csv;
  res.detail = res.pass ? fmt("byte-identical CSV across 1/3/4 threads (%zu bytes)",
                              a.cells_csv.size())
                        : "outputs differ across thread counts";
  return res;
}

std::vector<CheckResult> run_acceptance_checks() {
  return {check_variance_law(),       check_heterogeneity_immunity(),
          check_x4_closed_form(),     check_stepsize_floor_and_crossover(),
          check_explicit_constant_bounds(), check_chain_geometry(),
          check_reduction_identities(), check_rate_tables(),
          check_pipeline(),           check_determinism()};
}

std::vector<CheckResult> run_lb_checks() {
  return {check_heterogeneity_immunity(), check_x4_closed_form(),
          check_stepsize_floor_and_crossover(), check_chain_geometry()};
}

}  // namespace hsgd
