#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hsgd/rates.hpp"

using namespace hsgd;

namespace {

BoundParams all_ones() {
  BoundParams p;
  p.H = p.B = p.Delta = p.lambda = p.sigma = p.sigma_star = p.zeta_star = p.zeta_bar = 1.0;
  p.machines = p.local_steps = p.rounds = p.participants = 1.0;
  return p;
}

}  // namespace

TEST_SUITE("rates") {

TEST_CASE("all-ones spot values") {
  const auto p = all_ones();
  CHECK(eval_bound("mbsgd_convex", p) == 2.0);
  CHECK(eval_bound("accel_mbsgd_convex", p) == 2.0);
  CHECK(eval_bound("koloskova_convex", p) == 4.0);
  CHECK(eval_bound("local_lb_convex", p) == 3.0);
  CHECK(eval_bound("dzr_lb_convex", p) == 2.0);
  CHECK(eval_bound("mbsgd_sc", p) == doctest::Approx(std::exp(-1.0) + 1.0).epsilon(1e-15));
}

TEST_CASE("fixed-stepsize floor keeps its min structure") {
  // zeta*^2 = 1/R puts the two branches at comparable scale
  BoundParams p = all_ones();
  p.rounds = 4.0;
  p.zeta_star = 0.5;
  const double branch_progress = 1.0 / 4.0;
  const double branch_hetero = std::cbrt(0.25) / std::pow(4.0, 2.0 / 3.0);
  const double rest = 1.0 / std::sqrt(4.0) + 1.0 / (std::pow(4.0, 2.0 / 3.0));
  CHECK(eval_bound("local_lb_convex", p) ==
        doctest::Approx(std::min(branch_progress, branch_hetero) + rest).epsilon(1e-14));
}

TEST_CASE("subset guarantees collapse at full participation") {
  BoundParams p = all_ones();
  p.machines = 8;
  p.local_steps = 4;
  p.rounds = 16;
  p.participants = 8;
  p.zeta_star = 2.0;
  CHECK(eval_bound("subset_mbsgd_convex", p) ==
        doctest::Approx(eval_bound("mbsgd_convex", p)).epsilon(1e-14));
  CHECK(eval_bound("scaffold_subset_convex", p) ==
        doctest::Approx(eval_bound("scaffold_convex", p)).epsilon(1e-14));
  // strongly convex twins lose exactly the partial-participation term
  BoundParams q = p;
  q.zeta_star = 0.0;
  CHECK(eval_bound("subset_mbsgd_sc", p) ==
        doctest::Approx(eval_bound("subset_mbsgd_sc", q)).epsilon(1e-14));
}

TEST_CASE("combined dual-stepsize guarantee is the exact min of its branches") {
  BoundParams p = all_ones();
  for (double k : {1.0, 4.0, 32.0}) {
    for (double zb : {0.1, 1.0, 10.0}) {
      p.local_steps = k;
      p.zeta_bar = zb;
      CHECK(eval_bound("inner_outer_min", p) ==
            std::min(eval_bound("mbsgd_convex", p), eval_bound("local_ub_convex", p)));
    }
  }
}

TEST_CASE("homogeneous limit drops only the heterogeneity term") {
  BoundParams p = all_ones();
  p.machines = 4;
  p.local_steps = 8;
  p.rounds = 16;
  p.zeta_bar = 0.0;
  const double b4 = 1.0;
  const double want = 1.0 / (8.0 * 16.0) + 1.0 / std::sqrt(4.0 * 8.0 * 16.0) +
                      std::cbrt(b4) / (std::cbrt(8.0) * std::pow(16.0, 2.0 / 3.0));
  CHECK(eval_bound("local_ub_convex", p) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("bounds never increase with more rounds") {
  for (const auto& name : bound_names()) {
    BoundParams p = all_ones();
    p.machines = 4;
    p.local_steps = 4;
    p.participants = 2;
    p.Delta = 2.0;
    p.zeta_star = 1.5;
    p.zeta_bar = 2.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
      p.rounds = r;
      const double v = eval_bound(name, p);
      CHECK(v <= prev * (1.0 + 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("bounds never increase with more local steps, log-factor row aside") {
  for (const auto& name : bound_names()) {
    if (name == "local_ub_sc") continue;  // its log factor grows with K
    BoundParams p = all_ones();
    p.machines = 4;
    p.rounds = 16;
    p.participants = 2;
    p.Delta = 2.0;
    p.zeta_star = 1.5;
    p.zeta_bar = 2.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double k : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      p.local_steps = k;
      const double v = eval_bound(name, p);
      CHECK(v <= prev * (1.0 + 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("missing parameters are reported by name") {
  BoundParams p = all_ones();
  p.sigma_star.reset();
  CHECK_THROWS_WITH_AS(eval_bound("mbsgd_convex", p), "missing parameter: sigma_star",
                       std::invalid_argument);
  CHECK_THROWS_AS(eval_bound("nonsense", all_ones()), std::invalid_argument);
}

TEST_CASE("strongly convex rows reject lambda = 0") {
  BoundParams p = all_ones();
  p.lambda = 0.0;
  CHECK_THROWS_AS(eval_bound("mbsgd_sc", p), std::invalid_argument);
  CHECK_NOTHROW(eval_bound("mbsgd_convex", p));  // convex rows allow it
}

TEST_CASE("crossover threshold") {
  CHECK(crossover_zeta(1.0, 1.0, 1.0) == 1.0);
  CHECK(crossover_zeta(2.0, 1.0, 4.0) == 1.0);
  // scales linearly in 1/R
  CHECK(crossover_zeta(3.0, 2.0, 10.0) == doctest::Approx(2.0 * crossover_zeta(3.0, 2.0, 20.0)));
  CHECK_THROWS_AS(crossover_zeta(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("optimality region verdicts") {
  BoundParams p;
  p.H = 2.0;
  p.B = 1.5;
  p.rounds = 100.0;
  const double hb = 3.0;
  SUBCASE("far above the threshold") {
    p.zeta_star = 2.0 * hb;
    CHECK(optimality_region(ConvexityCase::convex, p) ==
          OptimalityVerdict::accelerated_mb_optimal);
  }
  SUBCASE("below the gap's lower edge") {
    p.zeta_star = hb / (2.0 * std::sqrt(100.0));
    CHECK(optimality_region(ConvexityCase::convex, p) == OptimalityVerdict::low_heterogeneity);
  }
  SUBCASE("inside the gap") {
    p.zeta_star = hb / 2.0;
    CHECK(optimality_region(ConvexityCase::convex, p) == OptimalityVerdict::gap_region);
  }
  SUBCASE("strongly convex threshold") {
    p.lambda = 0.5;
    p.zeta_star = std::sqrt(std::pow(2.0, 1.5) / std::sqrt(0.5)) * 1.01;
    CHECK(optimality_region(ConvexityCase::strongly_convex, p) ==
          OptimalityVerdict::accelerated_mb_optimal);
  }
  CHECK(verdict_name(OptimalityVerdict::gap_region) == "gap_region");
}

}  // TEST_SUITE
