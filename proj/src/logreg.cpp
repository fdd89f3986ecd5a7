#include "hsgd/logreg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hsgd {

namespace {

// log(1 + exp(-t)) without overflow
double log1pexp_neg(double t) {
  if (t > 0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double binary_label(int digit) { return digit % 2 == 0 ? 1.0 : -1.0; }

}  // namespace

LogisticObjective::LogisticObjective(const FeatureDataset& ds, const TaskAssignment& assignment,
                                     double ridge, bool full_batch)
    : dim_(static_cast<int>(ds.features.cols())), ridge_(ridge), full_batch_(full_batch) {
  for (const auto& rows : assignment.machine_rows) {
    if (rows.empty()) throw std::invalid_argument("a machine received no data");
    Eigen::MatrixXd phi(static_cast<int>(rows.size()), dim_);
    Eigen::VectorXd y(static_cast<int>(rows.size()));
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      phi.row(i) = ds.features.row(rows[i]);
      y[i] = binary_label(ds.labels[rows[i]]);
    }
    features_.push_back(std::move(phi));
    labels_.push_back(std::move(y));
  }
  finish_setup();
}

LogisticObjective::LogisticObjective(const FeatureDataset& ds, double ridge, bool full_batch)
    : dim_(static_cast<int>(ds.features.cols())), ridge_(ridge), full_batch_(full_batch) {
  Eigen::MatrixXd phi = ds.features;
  Eigen::VectorXd y(phi.rows());
  for (int i = 0; i < phi.rows(); ++i) y[i] = binary_label(ds.labels[i]);
  features_.push_back(std::move(phi));
  labels_.push_back(std::move(y));
  finish_setup();
}

void LogisticObjective::finish_setup() {
  double h = 0.0;
  double max_row_norm = 0.0;
  for (const auto& phi : features_) {
    const Eigen::MatrixXd gram = phi.transpose() * phi / (4.0 * phi.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    h = std::max(h, eig.eigenvalues().maxCoeff());
    for (int i = 0; i < phi.rows(); ++i)
      max_row_norm = std::max(max_row_norm, phi.row(i).norm());
  }
  constants_.machines = static_cast<int>(features_.size());
  constants_.smoothness = h + ridge_;
  constants_.strong_convexity = ridge_;
  // per-example gradient deviates from the machine mean by at most twice the
  // largest feature norm, uniformly in x
  constants_.noise_std = full_batch_ ? 0.0 : 2.0 * max_row_norm;
  constants_.noise_std_at_opt = constants_.noise_std;
  constants_.zeta_star = 0.0;  // measured after fitting
  constants_.zeta_bar = std::numeric_limits<double>::infinity();
  constants_.minimizer_norm_bound = std::nullopt;
  constants_.initial_suboptimality = std::log(2.0);  // F(0) = log 2, F* >= 0
}

double LogisticObjective::machine_value(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  const Eigen::VectorXd margins =
      labels_[machine].cwiseProduct(features_[machine] * x);
  double acc = 0.0;
  for (int i = 0; i < margins.size(); ++i) acc += log1pexp_neg(margins[i]);
  return acc / margins.size() + 0.5 * ridge_ * x.squaredNorm();
}

Eigen::VectorXd LogisticObjective::machine_gradient(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  const auto& phi = features_[machine];
  const auto& y = labels_[machine];
  const Eigen::VectorXd margins = y.cwiseProduct(phi * x);
  Eigen::VectorXd coeff(margins.size());
  for (int i = 0; i < margins.size(); ++i) coeff[i] = -y[i] * sigmoid(-margins[i]);
  return phi.transpose() * coeff / margins.size() + ridge_ * x;
}

Eigen::VectorXd LogisticObjective::stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                                       RngStream& rng) const {
  check_dimension(x);
  if (full_batch_) return machine_gradient(machine, x);
  const auto& phi = features_[machine];
  const auto& y = labels_[machine];
  const int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(phi.rows())));
  const double margin = y[i] * phi.row(i).dot(x);
  return -y[i] * sigmoid(-margin) * phi.row(i).transpose() + ridge_ * x;
}

Eigen::MatrixXd LogisticObjective::machine_hessian(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  const auto& phi = features_[machine];
  const auto& y = labels_[machine];
  const Eigen::VectorXd margins = y.cwiseProduct(phi * x);
  Eigen::VectorXd w(margins.size());
  for (int i = 0; i < margins.size(); ++i) {
    const double s = sigmoid(margins[i]);
    w[i] = s * (1.0 - s);
  }
  return phi.transpose() * w.asDiagonal() * phi / margins.size() +
         ridge_ * Eigen::MatrixXd::Identity(dim_, dim_);
}

double LogisticObjective::global_value(const Eigen::VectorXd& x) const { return value(x); }

Eigen::VectorXd LogisticObjective::global_gradient(const Eigen::VectorXd& x) const {
  return average_gradient(*this, x);
}

Eigen::MatrixXd LogisticObjective::global_hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int m = 0; m < machines(); ++m) acc += machine_hessian(m, x);
  return acc / machines();
}

void LogisticObjective::set_fitted_minimizer(Eigen::VectorXd x_star) {
  check_dimension(x_star);
  fitted_value_ = global_value(x_star);
  fitted_ = std::move(x_star);
  double zs = 0.0;
  for (int m = 0; m < machines(); ++m) zs += machine_gradient(m, *fitted_).squaredNorm();
  constants_.zeta_star = std::sqrt(zs / machines());
  constants_.minimizer_norm_bound = fitted_->norm();
  constants_.initial_suboptimality =
      global_value(Eigen::VectorXd::Zero(dim_)) - *fitted_value_;
}

std::optional<Eigen::VectorXd> LogisticObjective::known_minimizer() const { return fitted_; }
std::optional<double> LogisticObjective::known_optimal_value() const { return fitted_value_; }

Eigen::VectorXd newton_minimize(const LogisticObjective& obj, double tol, int max_iters) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
  const int d = obj.dimension();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  double grad_norm = 0.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd g = obj.global_gradient(x);
    grad_norm = g.norm();
    if (grad_norm <= tol) return x;
    Eigen::MatrixXd h = obj.global_hessian(x);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step = -ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || g.dot(step) >= 0) {
      h.diagonal().array() += 1e-8;  // singular-Hessian safeguard
      step = -h.ldlt().solve(g);
    }
    const double f0 = obj.global_value(x);
    const double slope = g.dot(step);
    // inside the quadratic-convergence region the predicted decrease falls
    // below the resolution of f; take the full Newton step there
    if (std::abs(slope) <= 1e-14 * (1.0 + std::abs(f0))) {
      x += step;
      continue;
    }
    double t = 1.0;
    int backtracks = 0;
    while (obj.global_value(x + t * step) > f0 + 1e-4 * t * slope && backtracks < 60) {
      t *= 0.5;
      ++backtracks;
    }
    x += t * step;
  }
  const Eigen::VectorXd g = obj.global_gradient(x);
  if (g.norm() <= tol) return x;
  char msg[96];
  std::snprintf(msg, sizeof msg, "newton_minimize did not converge: ||grad|| = %.3g", g.norm());
  throw std::runtime_error(msg);
}

std::vector<std::pair<double, double>> measure_zeta_profile(const FeatureDataset& ds,
                                                            const std::vector<double>& p_grid,
                                                            std::uint64_t seed, double ridge) {
  std::vector<std::pair<double, double>> out;
  for (double p : p_grid) {
    const auto assignment = build_tasks_and_assign(ds, p, seed);
    LogisticObjective obj(ds, assignment, ridge);
    const Eigen::VectorXd x_star = newton_minimize(obj);
    out.emplace_back(p, measure_zeta_star(obj, x_star));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace hsgd
