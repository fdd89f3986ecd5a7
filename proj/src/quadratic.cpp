#include "hsgd/quadratic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace hsgd {

MeanShiftQuadratic::MeanShiftQuadratic(Eigen::MatrixXd curvature, Eigen::MatrixXd shifts,
                                       double sigma)
    : curvature_(std::move(curvature)), shifts_(std::move(shifts)) {
  if (curvature_.rows() != curvature_.cols())
    throw std::invalid_argument("curvature matrix must be square");
  if (shifts_.rows() != curvature_.rows())
    throw std::invalid_argument("shift dimension mismatch");
  const int m = static_cast<int>(shifts_.cols());
  if (m < 1) throw std::invalid_argument("need at least one machine");

  mean_shift_ = shifts_.rowwise().mean();
  x_star_ = curvature_.ldlt().solve(mean_shift_);
  f_star_ = 0.5 * x_star_.dot(curvature_ * x_star_) - mean_shift_.dot(x_star_);
  noise_scale_ = sigma / std::sqrt(static_cast<double>(curvature_.rows()));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(curvature_);
  double zs = 0.0, zb = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d2 = (shifts_.col(i) - mean_shift_).squaredNorm();
    zs += d2;
    zb = std::max(zb, d2);
  }
  constants_.machines = m;
  constants_.smoothness = eig.eigenvalues().maxCoeff();
  constants_.strong_convexity = std::max(0.0, eig.eigenvalues().minCoeff());
  constants_.noise_std = sigma;
  constants_.noise_std_at_opt = sigma;
  constants_.zeta_star = std::sqrt(zs / m);
  constants_.zeta_bar = std::sqrt(zb);
  constants_.minimizer_norm_bound = x_star_.norm();
  constants_.initial_suboptimality = -f_star_;  // F(0) = 0
  constants_.validate();
}

double MeanShiftQuadratic::machine_value(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  return 0.5 * x.dot(curvature_ * x) - shifts_.col(machine).dot(x);
}

Eigen::VectorXd MeanShiftQuadratic::machine_gradient(int machine, const Eigen::VectorXd& x) const {
  check_dimension(x);
  return curvature_ * x - shifts_.col(machine);
}

Eigen::VectorXd MeanShiftQuadratic::stochastic_gradient(int machine, const Eigen::VectorXd& x,
                                                        RngStream& rng) const {
  Eigen::VectorXd g = machine_gradient(machine, x);
  if (noise_scale_ > 0) {
    for (int i = 0; i < g.size(); ++i) g[i] += rng.next_normal(noise_scale_);
  }
  return g;
}

MeanShiftQuadratic random_quadratic(int dimension, int machines, double curv_min, double curv_max,
                                    double target_norm, double zeta_rms, double sigma,
                                    std::uint64_t seed) {
  if (curv_min <= 0 || curv_max < curv_min)
    throw std::invalid_argument("need 0 < curv_min <= curv_max");
  RngStream rng(seed, StreamTag::instance_gen, 0, 0, 0, 0);

  Eigen::MatrixXd raw(dimension, dimension);
  for (int i = 0; i < dimension; ++i)
    for (int j = 0; j < dimension; ++j) raw(i, j) = rng.next_normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ();

  Eigen::VectorXd eigs(dimension);
  const double lo = std::log(curv_min), hi = std::log(curv_max);
  for (int i = 0; i < dimension; ++i) eigs[i] = std::exp(lo + (hi - lo) * rng.next_uniform());
  eigs[0] = curv_max;  // pin H
  if (dimension > 1) eigs[1] = curv_min;
  Eigen::MatrixXd a = q * eigs.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();

  Eigen::VectorXd xs(dimension);
  for (int i = 0; i < dimension; ++i) xs[i] = rng.next_normal();
  xs *= target_norm / xs.norm();

  Eigen::MatrixXd deltas = Eigen::MatrixXd::Zero(dimension, machines);
  if (machines > 1 && zeta_rms > 0) {
    for (int m = 0; m < machines; ++m)
      for (int i = 0; i < dimension; ++i) deltas(i, m) = rng.next_normal();
    const Eigen::VectorXd mean = deltas.rowwise().mean();
    deltas.colwise() -= mean;
    const double rms = std::sqrt(deltas.squaredNorm() / machines);
    if (rms > 0) deltas *= zeta_rms / rms;
  }
  Eigen::MatrixXd shifts = deltas;
  const Eigen::VectorXd b_mean = a * xs;
  shifts.colwise() += b_mean;
  return MeanShiftQuadratic(std::move(a), std::move(shifts), sigma);
}

MeanShiftQuadratic exact_zeta_quadratic(int dimension, int machines, double zeta_sq, double sigma,
                                        std::uint64_t seed) {
  RngStream rng(seed, StreamTag::instance_gen, 0, 1, 0, 0);
  Eigen::MatrixXd deltas = Eigen::MatrixXd::Zero(dimension, machines);
  if (machines > 1 && zeta_sq > 0) {
    for (int m = 0; m < machines; ++m)
      for (int i = 0; i < dimension; ++i) deltas(i, m) = rng.next_normal();
    const Eigen::VectorXd mean = deltas.rowwise().mean();
    deltas.colwise() -= mean;
    deltas *= std::sqrt(zeta_sq * machines / deltas.squaredNorm());
  }
  return MeanShiftQuadratic(Eigen::MatrixXd::Identity(dimension, dimension), std::move(deltas),
                            sigma);
}

}  // namespace hsgd
