#include "hsgd/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace hsgd {

namespace {

constexpr double kSupportThreshold = 1e-14;

std::vector<int> support_of(const Eigen::VectorXd& x) {
  std::vector<int> coords;
  for (int i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > kSupportThreshold) coords.push_back(i);
  return coords;
}

double resolve_fstar(const DistributedObjective& obj, const RunOptions& opts) {
  if (opts.fstar_override) return *opts.fstar_override;
  if (auto f = obj.known_optimal_value()) return *f;
  throw std::invalid_argument("F* unknown: supply fstar_override to compute suboptimality");
}

Eigen::VectorXd resolve_start(const DistributedObjective& obj, const RunOptions& opts) {
  if (opts.start.size() == 0) return Eigen::VectorXd::Zero(obj.dimension());
  obj.check_dimension(opts.start);
  return opts.start;
}

struct OutputAverager {
  Eigen::VectorXd acc;
  double total_weight = 0.0;

  explicit OutputAverager(int dim) : acc(Eigen::VectorXd::Zero(dim)) {}
  void add(double w, const Eigen::VectorXd& x) {
    if (w == 0.0) return;
    acc += w * x;
    total_weight += w;
  }
  Eigen::VectorXd result(const Eigen::VectorXd& fallback) const {
    if (total_weight <= 0) return fallback;
    return acc / total_weight;
  }
};

void record_round(const DistributedObjective& obj, double fstar, const Eigen::VectorXd& consensus,
                  const std::vector<Eigen::VectorXd>* locals, const std::vector<int>* sel,
                  const RunOptions& opts, RunResult& out) {
  out.suboptimality_series.push_back(obj.value(consensus) - fstar);
  if (opts.record_iterates) out.iterates.push_back(consensus);
  if (opts.record_support) {
    std::vector<std::vector<int>> per_machine(obj.machines());
    const auto consensus_supp = support_of(consensus);
    for (int m = 0; m < obj.machines(); ++m) per_machine[m] = consensus_supp;
    if (locals && sel) {
      for (std::size_t i = 0; i < sel->size(); ++i)
        per_machine[(*sel)[i]] = support_of((*locals)[i]);
    }
    out.support_history.push_back(std::move(per_machine));
  }
}

void finalize(const DistributedObjective& obj, double fstar, const Eigen::VectorXd& consensus,
              const OutputAverager& avg, RunResult& out) {
  out.final_iterate = consensus;
  out.final_round_suboptimality =
      out.suboptimality_series.empty() ? obj.value(consensus) - fstar
                                       : out.suboptimality_series.back();
  out.output_point = avg.result(consensus);
  out.output_suboptimality = obj.value(out.output_point) - fstar;
}

}  // namespace

void CommGeometry::validate() const {
  if (machines < 1) throw std::invalid_argument("M must be >= 1");
  if (local_steps < 1) throw std::invalid_argument("K must be >= 1");
  if (rounds < 1) throw std::invalid_argument("R must be >= 1");
  const int s = effective_participants();
  if (s < 1 || s > machines) throw std::invalid_argument("S must satisfy 1 <= S <= M");
}

RunResult run_minibatch_sgd(const DistributedObjective& obj, const CommGeometry& geom,
                            const ScheduleSpec& sched, std::uint64_t master_seed,
                            const RunOptions& opts) {
  geom.validate();
  const double fstar = resolve_fstar(obj, opts);
  Eigen::VectorXd x = resolve_start(obj, opts);
  OutputAverager avg(obj.dimension());
  RunResult out;
  out.algorithm = "minibatch";
  out.geometry = geom;
  out.schedule = sched.name();
  out.master_seed = master_seed;
  out.replicate = opts.replicate;

  const int k_steps = geom.local_steps;
  for (int r = 0; r < geom.rounds; ++r) {
    avg.add(sched.weight(r), x);
    const auto sel = sample_participants(geom.machines, geom.effective_participants(), master_seed,
                                         opts.replicate, static_cast<std::uint64_t>(r));
    const double step_scale = sched.eta(r) / static_cast<double>(k_steps);
    Eigen::VectorXd scaled_sum = Eigen::VectorXd::Zero(obj.dimension());
    // step-outer, machine-inner: each step's machine block sums in index
    // order, mirroring the local engine's accumulation
    for (int k = 0; k < k_steps; ++k) {
      for (int m : sel) {
        RngStream rng(master_seed, StreamTag::gradient_noise, opts.replicate,
                      static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r),
                      static_cast<std::uint64_t>(k));
        scaled_sum += step_scale * obj.stochastic_gradient(m, x, rng);
      }
    }
    x -= scaled_sum * (1.0 / static_cast<double>(sel.size()));
    record_round(obj, fstar, x, nullptr, nullptr, opts, out);
  }
  finalize(obj, fstar, x, avg, out);
  out.eta_inner = 0.0;
  out.eta_outer = sched.eta(0);
  return out;
}

namespace {

// Shared engine for Local SGD (query_scale == outer_scale taken from the
// schedule per step) and the inner/outer rule (fixed scales). Round update:
//   x <- x - (sum_m sum_k fl(outer_eta * g)) / |sel|
// accumulated in machine-major order; local query points advance by
// fl(inner_eta * g). The per-step virtual consensus used for output
// averaging is x - (sum_m D_m)/|sel| with D_m the scaled query displacement.
RunResult run_local_engine(const DistributedObjective& obj, const CommGeometry& geom,
                           const ScheduleSpec* sched, double eta_inner, double eta_outer,
                           std::uint64_t master_seed, const RunOptions& opts,
                           bool schedule_mode) {
  geom.validate();
  const double fstar = resolve_fstar(obj, opts);
  Eigen::VectorXd x = resolve_start(obj, opts);
  OutputAverager avg(obj.dimension());
  RunResult out;
  out.algorithm = schedule_mode ? "local" : "inner_outer";
  out.geometry = geom;
  out.schedule = schedule_mode ? sched->name() : "constant";
  out.master_seed = master_seed;
  out.replicate = opts.replicate;
  out.eta_inner = schedule_mode ? sched->eta(0) : eta_inner;
  out.eta_outer = schedule_mode ? sched->eta(0) : eta_outer;

  const int k_steps = geom.local_steps;
  std::vector<Eigen::VectorXd> query, displacement;
  for (int r = 0; r < geom.rounds; ++r) {
    const auto sel = sample_participants(geom.machines, geom.effective_participants(), master_seed,
                                         opts.replicate, static_cast<std::uint64_t>(r));
    const double inv_sel = 1.0 / static_cast<double>(sel.size());
    query.assign(sel.size(), x);
    displacement.assign(sel.size(), Eigen::VectorXd::Zero(obj.dimension()));
    Eigen::VectorXd outer_sum = Eigen::VectorXd::Zero(obj.dimension());

    for (int k = 0; k < k_steps; ++k) {
      const int t = r * k_steps + k;
      const double w = schedule_mode ? sched->weight(t) : 1.0;
      if (w != 0.0) {
        Eigen::VectorXd disp_sum = Eigen::VectorXd::Zero(obj.dimension());
        for (std::size_t i = 0; i < sel.size(); ++i) disp_sum += displacement[i];
        avg.add(w, x - disp_sum * inv_sel);
      }
      const double inner = schedule_mode ? sched->eta(t) : eta_inner;
      const double outer = schedule_mode ? sched->eta(t) : eta_outer;
      for (std::size_t i = 0; i < sel.size(); ++i) {
        RngStream rng(master_seed, StreamTag::gradient_noise, opts.replicate,
                      static_cast<std::uint64_t>(sel[i]), static_cast<std::uint64_t>(r),
                      static_cast<std::uint64_t>(k));
        const Eigen::VectorXd g = obj.stochastic_gradient(sel[i], query[i], rng);
        displacement[i] += inner * g;
        query[i] -= inner * g;
        outer_sum += outer * g;
      }
    }
    x -= outer_sum * inv_sel;
    record_round(obj, fstar, x, &query, &sel, opts, out);
  }
  finalize(obj, fstar, x, avg, out);
  return out;
}

}  // namespace

RunResult run_local_sgd(const DistributedObjective& obj, const CommGeometry& geom,
                        const ScheduleSpec& sched, std::uint64_t master_seed,
                        const RunOptions& opts) {
  return run_local_engine(obj, geom, &sched, 0.0, 0.0, master_seed, opts, true);
}

RunResult run_inner_outer(const DistributedObjective& obj, const CommGeometry& geom,
                          double eta_inner, double eta_outer, std::uint64_t master_seed,
                          const RunOptions& opts) {
  if (eta_inner < 0 || eta_outer < 0)
    throw std::invalid_argument("inner/outer stepsizes must be >= 0");
  return run_local_engine(obj, geom, nullptr, eta_inner, eta_outer, master_seed, opts, false);
}

namespace {

Eigen::VectorXd round_gradient(const DistributedObjective& obj, const Eigen::VectorXd& x,
                               const CommGeometry& geom, std::uint64_t master_seed,
                               std::uint64_t replicate, int round) {
  const auto sel = sample_participants(geom.machines, geom.effective_participants(), master_seed,
                                       replicate, static_cast<std::uint64_t>(round));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(obj.dimension());
  for (int k = 0; k < geom.local_steps; ++k) {
    for (int m : sel) {
      RngStream rng(master_seed, StreamTag::gradient_noise, replicate,
                    static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(round),
                    static_cast<std::uint64_t>(k));
      sum += obj.stochastic_gradient(m, x, rng);
    }
  }
  return sum / (static_cast<double>(sel.size()) * geom.local_steps);
}

struct AcsaState {
  Eigen::VectorXd x;
  Eigen::VectorXd x_ag;
};

// One AC-SA iteration (t >= 1) on the lambda_eff-strongly convex objective,
// with the quadratic subproblem solved in closed form over all of R^d.
void acsa_step(AcsaState& s, int t, double lambda_eff, double phi,
               const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& oracle) {
  const double alpha = 2.0 / (t + 1.0);
  const double gamma = 4.0 * phi / (static_cast<double>(t) * (t + 1.0));
  const double denom_md = gamma + (1.0 - alpha * alpha) * lambda_eff;
  const Eigen::VectorXd x_md =
      ((1.0 - alpha) * (lambda_eff + gamma) / denom_md) * s.x_ag +
      (alpha * ((1.0 - alpha) * lambda_eff + gamma) / denom_md) * s.x;
  const Eigen::VectorXd g = oracle(x_md, t);
  s.x = (alpha * lambda_eff * x_md + ((1.0 - alpha) * lambda_eff + gamma) * s.x - alpha * g) /
        (lambda_eff + gamma);
  s.x_ag = alpha * s.x + (1.0 - alpha) * s.x_ag;
}

void record_acsa_round(const DistributedObjective& obj, double fstar, const AcsaState& s,
                       const RunOptions& opts, RunResult& out) {
  out.suboptimality_series.push_back(obj.value(s.x_ag) - fstar);
  if (opts.record_iterates) out.iterates.push_back(s.x_ag);
  if (opts.record_support) {
    auto supp = support_of(s.x_ag);
    const auto supp_x = support_of(s.x);
    supp.insert(supp.end(), supp_x.begin(), supp_x.end());
    std::sort(supp.begin(), supp.end());
    supp.erase(std::unique(supp.begin(), supp.end()), supp.end());
    out.support_history.emplace_back(obj.machines(), supp);
  }
}

}  // namespace

RunResult run_acsa(const DistributedObjective& obj, const CommGeometry& geom, bool regularize,
                   std::uint64_t master_seed, const RunOptions& opts) {
  geom.validate();
  const double lambda = obj.constants().strong_convexity;
  if (lambda <= 0 && !regularize)
    throw std::invalid_argument("AC-SA needs lambda > 0 or the regularize flag");
  const double fstar = resolve_fstar(obj, opts);
  const Eigen::VectorXd x0 = resolve_start(obj, opts);

  double lambda_reg = 0.0;
  if (lambda <= 0) {
    const double sigma = obj.constants().noise_std;
    const auto b = obj.constants().minimizer_norm_bound;
    if (!b || !(*b > 0))
      throw std::invalid_argument("regularized AC-SA needs the norm bound B");
    const double samples = static_cast<double>(geom.effective_participants()) *
                           geom.local_steps * geom.rounds;
    lambda_reg = sigma / (*b * std::sqrt(samples));  // (lambda_reg/2)||x-x0||^2
  }
  const double lambda_eff = lambda + lambda_reg;
  const double phi = 2.0 * (obj.constants().smoothness + lambda_reg);

  RunResult out;
  out.algorithm = "acsa";
  out.geometry = geom;
  out.schedule = regularize ? "acsa_regularized" : "acsa";
  out.master_seed = master_seed;
  out.replicate = opts.replicate;

  AcsaState s{x0, x0};
  auto oracle = [&](const Eigen::VectorXd& q, int t) {
    Eigen::VectorXd g = round_gradient(obj, q, geom, master_seed, opts.replicate, t - 1);
    if (lambda_reg > 0) g += lambda_reg * (q - x0);
    return g;
  };
  for (int t = 1; t <= geom.rounds; ++t) {
    // lambda_eff > 0 always holds unless the objective is noiseless and
    // weakly convex; fall back to the plain convex recursion then
    acsa_step(s, t, lambda_eff, phi, oracle);
    record_acsa_round(obj, fstar, s, opts, out);
  }
  out.output_point = s.x_ag;
  out.output_suboptimality = obj.value(s.x_ag) - fstar;
  out.final_iterate = s.x_ag;
  out.final_round_suboptimality = out.suboptimality_series.back();
  return out;
}

long long multistage_stage_length(double smoothness, double strong_convexity,
                                  double sigma_mb_sq, double initial_suboptimality, int stage) {
  const double delta_k = initial_suboptimality * std::pow(2.0, -(stage + 1));
  double n_real = 4.0 * std::sqrt(2.0 * smoothness / strong_convexity);
  if (sigma_mb_sq > 0)
    n_real = std::max(n_real, 128.0 * sigma_mb_sq / (3.0 * strong_convexity * delta_k));
  return std::max<long long>(1, static_cast<long long>(std::ceil(n_real)));
}

double multistage_stage_phi(double smoothness, double strong_convexity, double sigma_mb_sq,
                            double initial_suboptimality, int stage, long long stage_length) {
  double phi = 2.0 * smoothness;
  if (sigma_mb_sq > 0) {
    const double delta_prev = initial_suboptimality * std::pow(2.0, -(stage - 1));
    const double nd = static_cast<double>(stage_length);
    phi = std::max(phi, std::sqrt(strong_convexity * sigma_mb_sq /
                                  (3.0 * delta_prev * nd * (nd + 1.0) * (nd + 2.0))));
  }
  return phi;
}

RunResult run_multistage_acsa(const DistributedObjective& obj, const CommGeometry& geom,
                              double initial_suboptimality, std::uint64_t master_seed,
                              const RunOptions& opts) {
  geom.validate();
  const double lambda = obj.constants().strong_convexity;
  const double smooth = obj.constants().smoothness;
  if (!(lambda > 0)) throw std::invalid_argument("multi-stage AC-SA needs lambda > 0");
  if (!(initial_suboptimality > 0)) throw std::invalid_argument("Delta must be > 0");
  const double fstar = resolve_fstar(obj, opts);

  const double sigma = obj.constants().noise_std;
  const double sigma_mb_sq = sigma * sigma / (static_cast<double>(geom.effective_participants()) *
                                              geom.local_steps);
  RunResult out;
  out.algorithm = "multistage_acsa";
  out.geometry = geom;
  out.schedule = "multistage_acsa";
  out.master_seed = master_seed;
  out.replicate = opts.replicate;

  AcsaState s{resolve_start(obj, opts), Eigen::VectorXd()};
  s.x_ag = s.x;
  int rounds_used = 0;
  int stage = 1;
  while (rounds_used < geom.rounds) {
    const long long n_k =
        multistage_stage_length(smooth, lambda, sigma_mb_sq, initial_suboptimality, stage);
    const double phi =
        multistage_stage_phi(smooth, lambda, sigma_mb_sq, initial_suboptimality, stage, n_k);
    const long long budget = std::min<long long>(n_k, geom.rounds - rounds_used);
    AcsaState stage_state{s.x_ag, s.x_ag};  // warm start p_{k-1}
    auto oracle = [&](const Eigen::VectorXd& q, int t) {
      return round_gradient(obj, q, geom, master_seed, opts.replicate,
                            rounds_used + t - 1);
    };
    for (int t = 1; t <= budget; ++t) {
      acsa_step(stage_state, t, lambda, phi, oracle);
      record_acsa_round(obj, fstar, stage_state, opts, out);
    }
    s = stage_state;
    rounds_used += static_cast<int>(budget);
    ++stage;
  }
  out.output_point = s.x_ag;
  out.output_suboptimality = obj.value(s.x_ag) - fstar;
  out.final_iterate = s.x_ag;
  out.final_round_suboptimality = out.suboptimality_series.back();
  return out;
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "minibatch") return Algorithm::minibatch;
  if (name == "local") return Algorithm::local;
  if (name == "inner_outer") return Algorithm::inner_outer;
  if (name == "acsa") return Algorithm::acsa;
  if (name == "multistage_acsa") return Algorithm::multistage_acsa;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::minibatch: return "minibatch";
    case Algorithm::local: return "local";
    case Algorithm::inner_outer: return "inner_outer";
    case Algorithm::acsa: return "acsa";
    case Algorithm::multistage_acsa: return "multistage_acsa";
  }
  return "minibatch";
}

RunResult run_with_subset(Algorithm algo, const DistributedObjective& obj,
                          const CommGeometry& geom, const ScheduleSpec& sched, double eta_inner,
                          double eta_outer, std::uint64_t master_seed, const RunOptions& opts) {
  switch (algo) {
    case Algorithm::minibatch:
      return run_minibatch_sgd(obj, geom, sched, master_seed, opts);
    case Algorithm::local:
      return run_local_sgd(obj, geom, sched, master_seed, opts);
    case Algorithm::inner_outer:
      return run_inner_outer(obj, geom, eta_inner, eta_outer, master_seed, opts);
    case Algorithm::acsa: {
      const bool regularize = obj.constants().strong_convexity <= 0;
      return run_acsa(obj, geom, regularize, master_seed, opts);
    }
    case Algorithm::multistage_acsa: {
      const auto delta = obj.constants().initial_suboptimality;
      if (!delta) throw std::invalid_argument("multistage AC-SA needs Delta");
      return run_multistage_acsa(obj, geom, *delta, master_seed, opts);
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd average_iterates(const std::vector<Eigen::VectorXd>& iterates,
                                 const std::vector<double>& weights) {
  if (iterates.empty() || iterates.size() != weights.size())
    throw std::invalid_argument("iterates and weights must be non-empty and the same length");
  double total = 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(iterates.front().size());
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    acc += weights[i] * iterates[i];
    total += weights[i];
  }
  if (!(total > 0)) throw std::invalid_argument("weights must have positive total");
  return acc / total;
}

}  // namespace hsgd
