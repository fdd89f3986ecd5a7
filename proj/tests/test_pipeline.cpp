#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "hsgd/dataset.hpp"
#include "hsgd/idx.hpp"
#include "hsgd/logreg.hpp"
#include "test_util.hpp"

using namespace hsgd;

TEST_SUITE("idx") {

TEST_CASE("hand-built image buffer") {
  const std::vector<std::uint8_t> buf = {0x00, 0x00, 0x08, 0x03,  // magic
                                         0x00, 0x00, 0x00, 0x01,  // count
                                         0x00, 0x00, 0x00, 0x02,  // rows
                                         0x00, 0x00, 0x00, 0x02,  // cols
                                         0, 255, 16, 32};
  const auto parsed = parse_idx(buf);
  REQUIRE(parsed.kind == IdxKind::images);
  CHECK(parsed.images.count == 1);
  CHECK(parsed.images.rows == 2);
  CHECK(parsed.images.cols == 2);
  CHECK(parsed.images.pixels == std::vector<std::uint8_t>{0, 255, 16, 32});
}

TEST_CASE("unknown magic is rejected") {
  const std::vector<std::uint8_t> buf = {0x12, 0x34, 0x56, 0x78, 0, 0, 0, 0};
  CHECK_THROWS_WITH_AS(parse_idx(buf), "unrecognized magic 0x12345678", std::invalid_argument);
}

TEST_CASE("truncated payload is a short read") {
  std::vector<std::uint8_t> buf = {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x05, 1, 2};
  CHECK_THROWS_AS(parse_idx(buf), std::invalid_argument);
}

TEST_CASE("empty label file with zero count") {
  const std::vector<std::uint8_t> buf = {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x00};
  CHECK(parse_idx(buf).labels.labels.empty());
}

TEST_CASE("encode/parse round-trips") {
  IdxImages img;
  img.count = 2;
  img.rows = 1;
  img.cols = 3;
  img.pixels = {9, 8, 7, 6, 5, 4};
  CHECK(parse_idx_images(encode_idx_images(img)).pixels == img.pixels);
  IdxLabels lbl;
  lbl.labels = {0, 9, 4, 4};
  CHECK(parse_idx_labels(encode_idx_labels(lbl)).labels == lbl.labels);
}

}  // TEST_SUITE

TEST_SUITE("pca") {

TEST_CASE("two opposed points define the axis") {
  Eigen::MatrixXd pts(2, 2);
  pts << -1.0, 0.0, 1.0, 0.0;
  const auto [proj, basis] = pca_reduce(pts, 1);
  CHECK(std::abs(basis(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(basis(1, 0)) == doctest::Approx(0.0));
  CHECK(std::abs(proj(0, 0)) == doctest::Approx(1.0));
  CHECK(proj(0, 0) == doctest::Approx(-proj(1, 0)));
}

TEST_CASE("full-rank projection reconstructs exactly") {
  RngStream rng(4, StreamTag::probe);
  Eigen::MatrixXd data(12, 5);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 5; ++j) data(i, j) = rng.next_normal();
  const auto [proj, basis] = pca_reduce(data, 5);
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd rebuilt = (proj * basis.transpose()).rowwise() + mean;
  CHECK((rebuilt - data).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK((basis.transpose() * basis - Eigen::MatrixXd::Identity(5, 5))
            .lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("captured variance matches the dense eigensolver") {
  RngStream rng(13, StreamTag::probe);
  Eigen::MatrixXd data(50, 10);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 10; ++j) data(i, j) = rng.next_normal() * (1.0 + j);
  const auto [proj, basis] = pca_reduce(data, 3);
  const double captured = proj.squaredNorm() / 50.0;
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered / 50.0);
  const double top3 = eig.eigenvalues().tail(3).sum();
  CHECK(captured == doctest::Approx(top3).epsilon(1e-10));
}

TEST_CASE("component count is validated") {
  CHECK_THROWS_AS(pca_reduce(Eigen::MatrixXd::Zero(3, 4), 5), std::invalid_argument);
  CHECK_THROWS_AS(pca_reduce(Eigen::MatrixXd::Zero(3, 4), 0), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("tasks") {

TEST_CASE("endpoints of the mixing knob") {
  const FeatureDataset ds = synth_digit_corpus(5, 30, 10);
  SUBCASE("pure task data at p = 1") {
    const auto a = build_tasks_and_assign(ds, 1.0, 3);
    CHECK(a.machine_rows.size() == 25);
    for (std::size_t m = 0; m < 25; ++m) {
      const auto [even, odd] = a.task_digits[m];
      CHECK(a.machine_rows[m].size() == 60);
      for (int row : a.machine_rows[m]) {
        const int digit = ds.labels[row];
        CHECK((digit == even || digit == odd));
      }
    }
  }
  SUBCASE("pure mixture at p = 0 touches other digits") {
    const auto a = build_tasks_and_assign(ds, 0.0, 3);
    bool saw_foreign = false;
    for (std::size_t m = 0; m < 25; ++m) {
      const auto [even, odd] = a.task_digits[m];
      for (int row : a.machine_rows[m])
        saw_foreign = saw_foreign || (ds.labels[row] != even && ds.labels[row] != odd);
    }
    CHECK(saw_foreign);
  }
}

TEST_CASE("assignment is a pure function of the seed") {
  const FeatureDataset ds = synth_digit_corpus(5, 20, 8);
  const auto a = build_tasks_and_assign(ds, 0.4, 11);
  const auto b = build_tasks_and_assign(ds, 0.4, 11);
  const auto c = build_tasks_and_assign(ds, 0.4, 12);
  CHECK(a.machine_rows == b.machine_rows);
  CHECK(a.machine_rows != c.machine_rows);
}

TEST_CASE("a missing digit is an error") {
  FeatureDataset ds = synth_digit_corpus(5, 10, 8);
  for (auto& lbl : ds.labels)
    if (lbl == 7) lbl = 6;
  CHECK_THROWS_AS(build_tasks_and_assign(ds, 0.5, 1), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("logreg") {

TEST_CASE("derivatives match finite differences") {
  const FeatureDataset ds = pca_reduce_dataset(synth_digit_corpus(9, 40, 20), 8);
  const auto assignment = build_tasks_and_assign(ds, 0.6, 2);
  const LogisticObjective obj(ds, assignment);
  RngStream rng(31, StreamTag::probe);
  for (int probe = 0; probe < 20; ++probe) {
    Eigen::VectorXd x(obj.dimension());
    for (int i = 0; i < x.size(); ++i) x[i] = rng.next_normal(0.5);
    const int m = probe % obj.machines();
    const auto fd = test_util::finite_difference_gradient(
        [&](const Eigen::VectorXd& y) { return obj.machine_value(m, y); }, x);
    const Eigen::VectorXd g = obj.machine_gradient(m, x);
    CHECK((fd - g).norm() / std::max(1.0, g.norm()) < 1e-6);
  }
}

TEST_CASE("gradient Lipschitz constant respects the curvature bound") {
  const FeatureDataset ds = pca_reduce_dataset(synth_digit_corpus(9, 25, 12), 6);
  const LogisticObjective obj(ds, build_tasks_and_assign(ds, 0.4, 3));
  const double h = obj.constants().smoothness;
  RngStream rng(14, StreamTag::probe);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd x(obj.dimension()), y(obj.dimension());
    for (int i = 0; i < x.size(); ++i) {
      x[i] = rng.next_normal();
      y[i] = rng.next_normal();
    }
    const int m = trial % obj.machines();
    const double lhs = (obj.machine_gradient(m, x) - obj.machine_gradient(m, y)).norm();
    CHECK(lhs <= h * (x - y).norm() + 1e-8);
  }
}

TEST_CASE("single-example oracle is unbiased for the machine gradient") {
  const FeatureDataset ds = pca_reduce_dataset(synth_digit_corpus(9, 20, 10), 5);
  const auto assignment = build_tasks_and_assign(ds, 0.5, 4);
  const LogisticObjective obj(ds, assignment);
  Eigen::VectorXd x(obj.dimension());
  RngStream probe(2, StreamTag::probe);
  for (int i = 0; i < x.size(); ++i) x[i] = probe.next_normal(0.3);
  const int m = 7, draws = 100000;
  RngStream rng(6, StreamTag::probe, 0, m, 0, 0);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(obj.dimension());
  for (int i = 0; i < draws; ++i) mean += obj.stochastic_gradient(m, x, rng);
  mean /= draws;
  const Eigen::VectorXd exact = obj.machine_gradient(m, x);
  // crude per-coordinate deviation scale: feature spread over sqrt(draws)
  const double se = obj.constants().noise_std / std::sqrt(static_cast<double>(draws));
  CHECK((mean - exact).lpNorm<Eigen::Infinity>() < 4.0 * se);
}

TEST_CASE("one-dimensional ridge problem agrees with a bisection oracle") {
  // two separable points with ridge 0.1: stationarity in one variable
  FeatureDataset ds;
  ds.features.resize(2, 1);
  ds.features << 1.0, -1.0;
  ds.labels = {0, 1};  // +1 at phi=1, -1 at phi=-1: both margins equal x
  const double ridge = 0.1;
  const LogisticObjective obj(ds, ridge);
  const Eigen::VectorXd xs = newton_minimize(obj, 1e-12);

  // oracle: solve -sigmoid(-x) + 0.1 x = 0 by bisection
  auto slope = [&](double x) { return -1.0 / (1.0 + std::exp(x)) + ridge * x; };
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0 ? lo : hi) = mid;
  }
  CHECK(xs[0] == doctest::Approx(lo).epsilon(1e-9));
  CHECK(obj.global_gradient(xs).norm() <= 1e-12);
}

TEST_CASE("sign-symmetric data sits at the origin") {
  FeatureDataset ds;
  ds.features.resize(4, 2);
  ds.features << 1.0, 0.5, -1.0, -0.5, 2.0, -1.0, -2.0, 1.0;
  ds.labels = {0, 0, 1, 1};  // labels +1 +1 -1 -1 on mirrored features
  const LogisticObjective obj(ds, 0.0);
  CHECK(obj.global_gradient(Eigen::VectorXd::Zero(2)).norm() < 1e-15);
  const Eigen::VectorXd xs = newton_minimize(obj, 1e-10);
  CHECK(xs.norm() < 1e-10);
}

TEST_CASE("looser tolerances are honored") {
  const FeatureDataset ds = pca_reduce_dataset(synth_digit_corpus(9, 30, 12), 6);
  const LogisticObjective obj(ds);
  const Eigen::VectorXd coarse = newton_minimize(obj, 1e-4);
  const Eigen::VectorXd fine = newton_minimize(obj, 1e-10);
  CHECK(obj.global_gradient(coarse).norm() <= 1e-4);
  CHECK(obj.global_gradient(fine).norm() <= 1e-10);
}

TEST_CASE("degenerate single-machine split has no heterogeneity") {
  const FeatureDataset ds = pca_reduce_dataset(synth_digit_corpus(9, 25, 12), 6);
  LogisticObjective obj(ds);  // one pooled machine
  obj.set_fitted_minimizer(newton_minimize(obj));
  CHECK(measure_zeta_star(obj) < 1e-18);
}

TEST_CASE("zeta profile is sorted and repeatable") {
  const FeatureDataset ds = pca_reduce_dataset(synth_digit_corpus(9, 25, 12), 6);
  const std::vector<double> grid = {0.8, 0.0, 0.4};
  const auto prof = measure_zeta_profile(ds, grid, 3);
  REQUIRE(prof.size() == 3);
  CHECK(prof[0].first == 0.0);
  CHECK(prof[1].first == 0.4);
  CHECK(prof[2].first == 0.8);
  const auto again = measure_zeta_profile(ds, grid, 3);
  for (int i = 0; i < 3; ++i) CHECK(prof[i].second == again[i].second);
  // private data concentrates disagreement at the fit point
  CHECK(prof[0].second < prof[2].second);
}

}  // TEST_SUITE

TEST_SUITE("cache") {

TEST_CASE("serialize/deserialize round-trips") {
  const FeatureDataset ds = synth_digit_corpus(17, 6, 5);
  const auto bytes = serialize_cache(ds);
  const auto back = deserialize_cache(bytes);
  CHECK(back.labels == ds.labels);
  CHECK((back.features - ds.features).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("foreign bytes are rejected") {
  const std::vector<std::uint8_t> junk = {'n', 'o', 'p', 'e', 0, 0};
  CHECK_THROWS_AS(deserialize_cache(junk), std::invalid_argument);
}

TEST_CASE("idx ingestion scales bytes into [0, 1]") {
  IdxImages img;
  img.count = 2;
  img.rows = 1;
  img.cols = 2;
  img.pixels = {0, 255, 51, 102};
  IdxLabels lbl;
  lbl.labels = {3, 8};
  const auto ds = dataset_from_idx(img, lbl);
  CHECK(ds.features(0, 1) == 1.0);
  CHECK(ds.features(1, 0) == doctest::Approx(0.2));
  CHECK(ds.labels == std::vector<int>{3, 8});
  lbl.labels = {3};
  CHECK_THROWS_AS(dataset_from_idx(img, lbl), std::invalid_argument);
}

}  // TEST_SUITE
