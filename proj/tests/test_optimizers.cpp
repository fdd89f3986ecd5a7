#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

#include "hsgd/local_lb.hpp"
#include "hsgd/logreg.hpp"
#include "hsgd/optimizers.hpp"
#include "hsgd/quadratic.hpp"

using namespace hsgd;

namespace {

bool same_bits(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

}  // namespace

TEST_SUITE("schedules") {

TEST_CASE("stich schedule branches") {
  SUBCASE("short horizon keeps 1/(4H) with geometric weights") {
    const auto s = ScheduleSpec::stich(2.0, 1.0, 6);  // R <= 4H/lambda = 8
    for (int t = 0; t < 6; ++t) {
      CHECK(s.eta(t) == doctest::Approx(0.125));
      CHECK(s.weight(t) == doctest::Approx(std::pow(1.0 - 0.125, -(t + 1.0))));
    }
  }
  SUBCASE("long horizon switches to polynomial decay at t0") {
    const int r = 40;
    const auto s = ScheduleSpec::stich(2.0, 1.0, r);  // 4H/lambda = 8 < 40
    const int t0 = 20;
    const double kappa = 16.0;
    CHECK(s.eta(t0 - 1) == doctest::Approx(0.125));
    CHECK(s.weight(t0 - 1) == 0.0);
    for (int t = t0; t < r; ++t) {
      CHECK(s.eta(t) == doctest::Approx(2.0 / (kappa + t - t0)));
      CHECK(s.weight(t) == doctest::Approx((kappa + t - t0) * (kappa + t - t0)));
    }
  }
}

TEST_CASE("polynomial decay") {
  const auto s = ScheduleSpec::poly_decay(0.5, 10.0);
  for (int t = 0; t < 5; ++t) {
    CHECK(s.eta(t) == doctest::Approx(2.0 / (0.5 * (10.0 + t + 1))));
    CHECK(s.weight(t) == doctest::Approx(10.0 + t));
  }
}

TEST_CASE("tuned convex local stepsize takes the binding branch") {
  // all four branches present
  const double eta = ScheduleSpec::local_tuned_convex(2.0, 1.0, 1.0, 0.5, 0.3, 4, 8, 16)
                         .constant_eta();
  const double want = std::min(
      std::min(1.0 / 20.0, 1.0 * 2.0 / (0.5 * std::sqrt(128.0))),
      std::min(std::cbrt(1.0 / (2.0 * 64.0 * 1.0)), std::cbrt(1.0 / (2.0 * 64.0 * 0.09))));
  CHECK(eta == doctest::Approx(want).epsilon(1e-12));
  // degenerate noise levels drop their branches
  CHECK(ScheduleSpec::local_tuned_convex(2.0, 1.0, 0.0, 0.0,
                                         std::numeric_limits<double>::infinity(), 4, 8, 16)
            .constant_eta() == doctest::Approx(0.05));
}

}  // TEST_SUITE

TEST_SUITE("optimizers") {

TEST_CASE("noiseless minibatch started at the minimizer stays there") {
  // the averaged gradient is exactly zero at x*, so the consensus never
  // moves, whatever the heterogeneity
  LocalLbParams p;
  p.zeta = 3.0;
  p.suboptimality = 1.0;
  const LocalLbObjective obj(p);
  RunOptions opts;
  opts.start = *obj.known_minimizer();
  const auto run =
      run_minibatch_sgd(obj, CommGeometry{2, 3, 10, -1}, ScheduleSpec::constant(0.05), 1, opts);
  CHECK(same_bits(run.final_iterate, opts.start));
  CHECK(run.final_round_suboptimality <= 1e-15);

  // local SGD drifts off x* between rounds when zeta > 0 (the machines pull
  // apart), but stays put when the local gradients themselves vanish
  LocalLbParams q = p;
  q.zeta = 0.0;
  const LocalLbObjective homog(q);
  RunOptions hopts;
  hopts.start = *homog.known_minimizer();
  const auto local =
      run_local_sgd(homog, CommGeometry{2, 3, 10, -1}, ScheduleSpec::constant(0.05), 1, hopts);
  CHECK(same_bits(local.final_iterate, hopts.start));
  const auto hetero =
      run_local_sgd(obj, CommGeometry{2, 3, 10, -1}, ScheduleSpec::constant(0.05), 1, opts);
  CHECK(hetero.final_round_suboptimality > 0.0);
}

TEST_CASE("suboptimality series stays above the numerical floor") {
  const auto obj = random_quadratic(5, 3, 0.5, 2.0, 1.0, 0.4, 0.6, 2);
  const auto run = run_local_sgd(obj, CommGeometry{3, 4, 30, -1},
                                 ScheduleSpec::constant(0.05), 9);
  for (double v : run.suboptimality_series) CHECK(v >= -1e-10);
}

TEST_CASE("single-step rounds make local and minibatch coincide") {
  const auto obj = random_quadratic(6, 4, 0.5, 3.0, 1.0, 0.5, 0.8, 5);
  const CommGeometry geom{4, 1, 12, -1};
  const auto a = run_local_sgd(obj, geom, ScheduleSpec::constant(0.06), 17);
  const auto b = run_minibatch_sgd(obj, geom, ScheduleSpec::constant(0.06), 17);
  CHECK(same_bits(a.suboptimality_series, b.suboptimality_series));
  CHECK(same_bits(a.final_iterate, b.final_iterate));
  CHECK(same_bits(a.output_point, b.output_point));
}

TEST_CASE("dual-stepsize endpoints recover both base rules") {
  const auto obj = random_quadratic(6, 3, 0.5, 3.0, 1.0, 0.5, 0.8, 6);
  const int k = 4;
  const CommGeometry geom{3, k, 9, -1};
  const double eta = 0.05;
  SUBCASE("matched stepsizes give local SGD") {
    const auto a = run_inner_outer(obj, geom, eta, eta, 23);
    const auto b = run_local_sgd(obj, geom, ScheduleSpec::constant(eta), 23);
    CHECK(same_bits(a.suboptimality_series, b.suboptimality_series));
    CHECK(same_bits(a.final_iterate, b.final_iterate));
    CHECK(same_bits(a.output_point, b.output_point));
  }
  SUBCASE("zero inner stepsize gives minibatch on the summed directions") {
    const auto a = run_inner_outer(obj, geom, 0.0, eta / k, 23);
    const auto b = run_minibatch_sgd(obj, geom, ScheduleSpec::constant(eta), 23);
    CHECK(same_bits(a.suboptimality_series, b.suboptimality_series));
    CHECK(same_bits(a.final_iterate, b.final_iterate));
  }
  SUBCASE("both stepsizes zero returns the start point") {
    const auto run = run_inner_outer(obj, geom, 0.0, 0.0, 23);
    CHECK(run.final_iterate.isZero(0.0));
    CHECK(run.output_point.isZero(0.0));
  }
  SUBCASE("negative stepsizes are rejected") {
    CHECK_THROWS_AS(run_inner_outer(obj, geom, -0.1, 0.1, 23), std::invalid_argument);
  }
}

TEST_CASE("full-participation subset is the identity") {
  const auto obj = random_quadratic(5, 4, 0.5, 2.0, 1.0, 0.6, 0.7, 8);
  const auto a = run_local_sgd(obj, CommGeometry{4, 3, 8, -1}, ScheduleSpec::constant(0.05), 4);
  const auto b = run_local_sgd(obj, CommGeometry{4, 3, 8, 4}, ScheduleSpec::constant(0.05), 4);
  CHECK(same_bits(a.output_point, b.output_point));
  CHECK(same_bits(a.suboptimality_series, b.suboptimality_series));
  CHECK_THROWS_AS(run_local_sgd(obj, CommGeometry{4, 3, 8, 5}, ScheduleSpec::constant(0.05), 4),
                  std::invalid_argument);
}

TEST_CASE("subset round estimator variance at the optimum") {
  const int m = 25, s = 10, k = 2;
  const auto obj = exact_zeta_quadratic(4, m, 1.0, 2.0, 3);
  const Eigen::VectorXd xs = *obj.known_minimizer();
  const int repeats = 20000;
  double acc = 0.0;
  for (int r = 0; r < repeats; ++r)
    acc += subset_minibatch_gradient(obj, xs, k, s, 7, 0, static_cast<std::uint64_t>(r))
               .squaredNorm();
  const double want = 4.0 / (s * k) + (1.0 - static_cast<double>(s) / m) * 1.0 / s;
  CHECK(acc / repeats == doctest::Approx(want).epsilon(0.08));

  SUBCASE("zero heterogeneity and noise leave nothing") {
    const auto clean = exact_zeta_quadratic(4, m, 0.0, 0.0, 3);
    const Eigen::VectorXd g =
        subset_minibatch_gradient(clean, *clean.known_minimizer(), k, s, 7, 0, 0);
    CHECK(g.norm() == 0.0);
  }
}

TEST_CASE("averaging helper") {
  std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(3.0, 2.0)};
  SUBCASE("uniform weights take the mean") {
    const Eigen::VectorXd avg = average_iterates(pts, {1.0, 1.0});
    CHECK(avg[0] == 2.0);
    CHECK(avg[1] == 1.0);
  }
  SUBCASE("a single iterate is returned unchanged") {
    const Eigen::VectorXd avg = average_iterates({pts[0]}, {2.5});
    CHECK(avg[0] == 1.0);
  }
  SUBCASE("all-zero weights are rejected") {
    CHECK_THROWS_AS(average_iterates(pts, {0.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("accelerated runner") {
  SUBCASE("noiseless strongly convex runs beat plain minibatch head-to-head") {
    for (std::uint64_t gen : {12u, 40u, 41u}) {
      const auto obj = random_quadratic(5, 2, 0.5, 4.0, 1.0, 0.0, 0.0, gen);
      const CommGeometry geom{2, 2, 30, -1};
      const auto accel = run_acsa(obj, geom, false, 2);
      const auto plain = run_minibatch_sgd(
          obj, geom,
          ScheduleSpec::constant(1.0 / (4.0 * obj.constants().smoothness)), 2);
      CHECK(accel.final_round_suboptimality < plain.final_round_suboptimality);
      CHECK(accel.final_round_suboptimality <
            1e-2 * *obj.constants().initial_suboptimality);
    }
  }
  SUBCASE("the first momentum point is the start point") {
    // alpha_1 = 1 pins the first query to x0: one iteration from x0 = x*,
    // where the averaged gradient is exactly zero, leaves everything at x*
    LocalLbParams p;
    p.zeta = 2.0;
    p.strong_convexity = 1.0;
    p.suboptimality = 1.0;
    const LocalLbObjective obj(p);
    RunOptions opts;
    opts.start = *obj.known_minimizer();
    const auto one = run_acsa(obj, CommGeometry{2, 2, 1, -1}, false, 2, opts);
    CHECK(same_bits(one.final_iterate, opts.start));
  }
  SUBCASE("weakly convex objective needs the proximal flag") {
    const FeatureDataset ds = pca_reduce_dataset(synth_digit_corpus(6, 20, 10), 5);
    LogisticObjective weak(ds, build_tasks_and_assign(ds, 0.5, 1));
    weak.set_fitted_minimizer(newton_minimize(weak));
    const CommGeometry geom{25, 2, 20, -1};
    CHECK_THROWS_AS(run_acsa(weak, geom, false, 2), std::invalid_argument);
    const auto run = run_acsa(weak, geom, true, 2);
    CHECK(std::isfinite(run.output_suboptimality));
    CHECK(run.output_suboptimality < *weak.constants().initial_suboptimality);
  }
}

TEST_CASE("multi-stage runner") {
  SUBCASE("noiseless stage length is the conditioning term") {
    CHECK(multistage_stage_length(4.0, 1.0, 0.0, 1.0, 1) == 12);  // ceil(4 sqrt(8))
    CHECK(multistage_stage_length(4.0, 1.0, 0.0, 1.0, 5) == 12);  // every stage
  }
  SUBCASE("noiseless gamma scale is 2H") {
    CHECK(multistage_stage_phi(4.0, 1.0, 0.0, 1.0, 1, 12) == 8.0);
    CHECK(multistage_stage_phi(4.0, 1.0, 0.25, 1.0, 3, 12) >= 8.0);
  }
  SUBCASE("round budget is consumed exactly, truncating the last stage") {
    const auto obj = random_quadratic(4, 2, 0.5, 2.0, 1.0, 0.3, 0.5, 9);
    const int rounds = 17;  // not a multiple of any stage length
    const auto run = run_multistage_acsa(obj, CommGeometry{2, 2, rounds, -1},
                                         *obj.constants().initial_suboptimality, 6);
    CHECK(static_cast<int>(run.suboptimality_series.size()) == rounds);
    CHECK(std::isfinite(run.final_round_suboptimality));
  }
  SUBCASE("weak convexity is rejected") {
    Eigen::MatrixXd curv = Eigen::MatrixXd::Zero(2, 2);
    curv(0, 0) = 1.0;
    const MeanShiftQuadratic weak(curv, Eigen::MatrixXd::Zero(2, 2), 0.0);
    CHECK_THROWS_AS(
        run_multistage_acsa(weak, CommGeometry{2, 1, 4, -1}, 1.0, 1),
        std::invalid_argument);
  }
}

TEST_CASE("noise never helps on average") {
  const int replicates = 20;
  double prev_mean = -1.0;
  double prev_se = 0.0;
  for (double sigma : {0.0, 0.4, 1.2}) {
    const auto obj = random_quadratic(5, 3, 0.5, 2.0, 1.0, 0.4, sigma, 30);
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < replicates; ++rep) {
      RunOptions opts;
      opts.replicate = static_cast<std::uint64_t>(rep);
      const auto run = run_minibatch_sgd(obj, CommGeometry{3, 2, 20, -1},
                                         ScheduleSpec::constant(0.1), 13, opts);
      sum += run.output_suboptimality;
      sum_sq += run.output_suboptimality * run.output_suboptimality;
    }
    const double mean = sum / replicates;
    const double var = std::max(0.0, sum_sq / replicates - mean * mean);
    const double se = std::sqrt(var / replicates);
    if (prev_mean >= 0.0) CHECK(mean >= prev_mean - (se + prev_se));
    prev_mean = mean;
    prev_se = se;
  }
}

TEST_CASE("algorithm names round-trip") {
  for (const auto algo : {Algorithm::minibatch, Algorithm::local, Algorithm::inner_outer,
                          Algorithm::acsa, Algorithm::multistage_acsa})
    CHECK(algorithm_from_name(algorithm_name(algo)) == algo);
  CHECK_THROWS_AS(algorithm_from_name("sgd"), std::invalid_argument);
}

}  // TEST_SUITE
