#include "hsgd/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hsgd {

void ProblemConstants::validate() const {
  if (machines < 1) throw std::invalid_argument("machines must be >= 1");
  if (!(smoothness > 0)) throw std::invalid_argument("smoothness H must be > 0");
  if (strong_convexity < 0) throw std::invalid_argument("lambda must be >= 0");
  if (strong_convexity > smoothness + 1e-12)
    throw std::invalid_argument("lambda must be <= H");
  if (noise_std < 0 || noise_std_at_opt < 0)
    throw std::invalid_argument("noise levels must be >= 0");
  if (noise_std_at_opt > noise_std + 1e-12)
    throw std::invalid_argument("sigma_star must be <= sigma");
  if (zeta_star < 0) throw std::invalid_argument("zeta_star must be >= 0");
  if (std::isfinite(zeta_bar) && zeta_star > zeta_bar + 1e-12)
    throw std::invalid_argument("zeta_star must be <= zeta_bar");
  if (!minimizer_norm_bound && !initial_suboptimality)
    throw std::invalid_argument("at least one of B, Delta must be present");
}

void DistributedObjective::check_dimension(const Eigen::VectorXd& x) const {
  if (x.size() != dimension())
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(dimension()) +
                                ", got " + std::to_string(x.size()));
}

double DistributedObjective::value(const Eigen::VectorXd& x) const {
  check_dimension(x);
  double sum = 0.0;
  for (int m = 0; m < machines(); ++m) sum += machine_value(m, x);
  return sum / machines();
}

Eigen::VectorXd average_gradient(const DistributedObjective& obj, const Eigen::VectorXd& x) {
  obj.check_dimension(x);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(obj.dimension());
  for (int m = 0; m < obj.machines(); ++m) sum += obj.machine_gradient(m, x);
  return sum / obj.machines();
}

Eigen::VectorXd minibatch_gradient(const DistributedObjective& obj, const Eigen::VectorXd& x,
                                   int local_steps, std::uint64_t master_seed,
                                   std::uint64_t replicate, std::uint64_t round) {
  obj.check_dimension(x);
  if (local_steps < 1) throw std::invalid_argument("K must be >= 1");
  // noiseless oracle: every draw equals the exact gradient, so the round
  // estimate is exactly the average gradient
  if (obj.constants().noise_std == 0.0) return average_gradient(obj, x);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(obj.dimension());
  for (int k = 0; k < local_steps; ++k) {
    for (int m = 0; m < obj.machines(); ++m) {
      RngStream rng(master_seed, StreamTag::gradient_noise, replicate,
                    static_cast<std::uint64_t>(m), round, static_cast<std::uint64_t>(k));
      sum += obj.stochastic_gradient(m, x, rng);
    }
  }
  return sum / (static_cast<double>(obj.machines()) * local_steps);
}

std::vector<int> sample_participants(int machines, int participants, std::uint64_t master_seed,
                                     std::uint64_t replicate, std::uint64_t round) {
  if (participants < 1 || participants > machines)
    throw std::invalid_argument("participants S must satisfy 1 <= S <= M");
  std::vector<int> pool(machines);
  std::iota(pool.begin(), pool.end(), 0);
  if (participants == machines) return pool;
  RngStream rng(master_seed, StreamTag::participation, replicate, 0, round, 0);
  for (int i = 0; i < participants; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(machines - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(participants);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Eigen::VectorXd subset_minibatch_gradient(const DistributedObjective& obj,
                                          const Eigen::VectorXd& x, int local_steps,
                                          int participants, std::uint64_t master_seed,
                                          std::uint64_t replicate, std::uint64_t round) {
  obj.check_dimension(x);
  if (local_steps < 1) throw std::invalid_argument("K must be >= 1");
  const auto sel = sample_participants(obj.machines(), participants, master_seed, replicate, round);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(obj.dimension());
  for (int k = 0; k < local_steps; ++k) {
    for (int m : sel) {
      RngStream rng(master_seed, StreamTag::gradient_noise, replicate,
                    static_cast<std::uint64_t>(m), round, static_cast<std::uint64_t>(k));
      sum += obj.stochastic_gradient(m, x, rng);
    }
  }
  return sum / (static_cast<double>(sel.size()) * local_steps);
}

double measure_zeta_star(const DistributedObjective& obj,
                         const std::optional<Eigen::VectorXd>& minimizer) {
  std::optional<Eigen::VectorXd> xs = minimizer ? minimizer : obj.known_minimizer();
  if (!xs) throw std::invalid_argument("minimizer required");
  obj.check_dimension(*xs);
  double sum = 0.0;
  for (int m = 0; m < obj.machines(); ++m) sum += obj.machine_gradient(m, *xs).squaredNorm();
  return sum / obj.machines();
}

double estimate_sigma_star(const DistributedObjective& obj, int draws, std::uint64_t master_seed) {
  auto xs = obj.known_minimizer();
  if (!xs) throw std::invalid_argument("minimizer required");
  if (draws < 1) throw std::invalid_argument("draws must be >= 1");
  double worst = 0.0;
  for (int m = 0; m < obj.machines(); ++m) {
    const Eigen::VectorXd exact = obj.machine_gradient(m, *xs);
    RngStream rng(master_seed, StreamTag::probe, 0, static_cast<std::uint64_t>(m), 0, 0);
    double acc = 0.0;
    for (int i = 0; i < draws; ++i)
      acc += (obj.stochastic_gradient(m, *xs, rng) - exact).squaredNorm();
    worst = std::max(worst, acc / draws);
  }
  return worst;
}

}  // namespace hsgd
