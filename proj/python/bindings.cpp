#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hsgd/chain.hpp"
#include "hsgd/checks.hpp"
#include "hsgd/dataset.hpp"
#include "hsgd/harness.hpp"
#include "hsgd/local_lb.hpp"
#include "hsgd/logreg.hpp"
#include "hsgd/optimizers.hpp"
#include "hsgd/quadratic.hpp"
#include "hsgd/rates.hpp"

namespace py = pybind11;
using namespace hsgd;

namespace {

BoundParams params_from_dict(const py::dict& d) {
  BoundParams p;
  auto set = [&](const char* key, std::optional<double>& field) {
    if (d.contains(key)) field = d[key].cast<double>();
  };
  set("H", p.H);
  set("B", p.B);
  set("Delta", p.Delta);
  set("lambda", p.lambda);
  set("sigma", p.sigma);
  set("sigma_star", p.sigma_star);
  set("zeta_star", p.zeta_star);
  set("zeta_bar", p.zeta_bar);
  set("M", p.machines);
  set("K", p.local_steps);
  set("R", p.rounds);
  set("S", p.participants);
  return p;
}

RunResult run_by_name(const std::string& algo, const DistributedObjective& obj, int machines,
                      int local_steps, int rounds, int participants, double eta,
                      double eta_inner, double eta_outer, const std::string& schedule,
                      std::uint64_t seed, std::uint64_t replicate, bool record_iterates,
                      bool record_support) {
  CommGeometry geom{machines, local_steps, rounds, participants};
  RunOptions opts;
  opts.replicate = replicate;
  opts.record_iterates = record_iterates;
  opts.record_support = record_support;
  const auto& c = obj.constants();
  ScheduleSpec sched = ScheduleSpec::constant(eta);
  if (schedule == "stich")
    sched = ScheduleSpec::stich(c.smoothness, c.strong_convexity, rounds);
  else if (schedule == "poly_decay")
    sched = ScheduleSpec::poly_decay(c.strong_convexity,
                                     20.0 * c.smoothness / c.strong_convexity);
  else if (schedule == "local_tuned_convex")
    sched = ScheduleSpec::local_tuned_convex(c.smoothness, c.minimizer_norm_bound.value_or(1.0),
                                             c.noise_std, c.noise_std_at_opt, c.zeta_bar,
                                             machines, local_steps, rounds);
  else if (schedule != "constant")
    throw std::invalid_argument("unknown schedule: " + schedule);
  return run_with_subset(algorithm_from_name(algo), obj, geom, sched, eta_inner, eta_outer,
                         seed, opts);
}

}  // namespace

PYBIND11_MODULE(_hsgd, m) {
  m.doc() = "heterogeneous intermittent-communication SGD simulator";

  py::class_<ProblemConstants>(m, "ProblemConstants")
      .def_readonly("machines", &ProblemConstants::machines)
      .def_readonly("smoothness", &ProblemConstants::smoothness)
      .def_readonly("strong_convexity", &ProblemConstants::strong_convexity)
      .def_readonly("noise_std", &ProblemConstants::noise_std)
      .def_readonly("noise_std_at_opt", &ProblemConstants::noise_std_at_opt)
      .def_readonly("zeta_star", &ProblemConstants::zeta_star)
      .def_readonly("zeta_bar", &ProblemConstants::zeta_bar)
      .def_readonly("minimizer_norm_bound", &ProblemConstants::minimizer_norm_bound)
      .def_readonly("initial_suboptimality", &ProblemConstants::initial_suboptimality);

  py::class_<DistributedObjective>(m, "DistributedObjective")
      .def_property_readonly("dimension", &DistributedObjective::dimension)
      .def_property_readonly("machines", &DistributedObjective::machines)
      .def_property_readonly("constants", &DistributedObjective::constants,
                             py::return_value_policy::reference_internal)
      .def("value", &DistributedObjective::value)
      .def("machine_value", &DistributedObjective::machine_value)
      .def("machine_gradient", &DistributedObjective::machine_gradient)
      .def("known_minimizer", &DistributedObjective::known_minimizer)
      .def("known_optimal_value", &DistributedObjective::known_optimal_value)
      .def("average_gradient",
           [](const DistributedObjective& o, const Eigen::VectorXd& x) {
             return average_gradient(o, x);
           })
      .def("minibatch_gradient",
           [](const DistributedObjective& o, const Eigen::VectorXd& x, int k,
              std::uint64_t seed, std::uint64_t replicate, std::uint64_t round) {
             return minibatch_gradient(o, x, k, seed, replicate, round);
           },
           py::arg("x"), py::arg("local_steps"), py::arg("seed"), py::arg("replicate") = 0,
           py::arg("round") = 0)
      .def("measure_zeta_star",
           [](const DistributedObjective& o) { return measure_zeta_star(o); })
      .def("estimate_sigma_star",
           [](const DistributedObjective& o, int draws, std::uint64_t seed) {
             return estimate_sigma_star(o, draws, seed);
           },
           py::arg("draws"), py::arg("seed") = 0);

  py::class_<LocalLbObjective, DistributedObjective>(m, "LocalLbInstance")
      .def_property_readonly("offset", &LocalLbObjective::offset);
  py::class_<ChainObjective, DistributedObjective>(m, "ChainInstance")
      .def_property_readonly("q", &ChainObjective::q)
      .def_property_readonly("alpha", &ChainObjective::alpha)
      .def_property_readonly("beta", &ChainObjective::beta);
  py::class_<MeanShiftQuadratic, DistributedObjective>(m, "MeanShiftQuadratic");
  py::class_<LogisticObjective, DistributedObjective>(m, "LogisticObjective");

  m.def("build_local_lb",
        [](double H, double lambda, double mu, double L, double zeta, double sigma,
           std::optional<double> B, std::optional<double> Delta, int machines) {
          LocalLbParams p{H, lambda, mu, L, zeta, sigma, B, Delta, machines};
          return LocalLbObjective(p);
        },
        py::arg("H"), py::arg("lambda_"), py::arg("mu"), py::arg("L"), py::arg("zeta") = 0.0,
        py::arg("sigma") = 0.0, py::arg("B") = std::nullopt, py::arg("Delta") = std::nullopt,
        py::arg("machines") = 2);
  m.def("build_chain", &build_chain, py::arg("H"), py::arg("lambda_"), py::arg("C"),
        py::arg("rounds"), py::arg("machines") = 2);
  m.def("chain_residual_lower_bound", &chain_residual_lower_bound);
  m.def("closed_form_x4_trajectory", &closed_form_x4_trajectory, py::arg("L"), py::arg("mu"),
        py::arg("zeta"), py::arg("eta"), py::arg("local_steps"), py::arg("rounds"));
  m.def("local_fixed_stepsize_floor", &local_fixed_stepsize_floor, py::arg("mu"),
        py::arg("offset_c"), py::arg("smoothness"), py::arg("zeta"), py::arg("rounds"));
  m.def("random_quadratic", &random_quadratic, py::arg("dimension"), py::arg("machines"),
        py::arg("curv_min"), py::arg("curv_max"), py::arg("target_norm"), py::arg("zeta_rms"),
        py::arg("sigma"), py::arg("seed"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("output_point", &RunResult::output_point)
      .def_readonly("output_suboptimality", &RunResult::output_suboptimality)
      .def_readonly("final_iterate", &RunResult::final_iterate)
      .def_readonly("final_round_suboptimality", &RunResult::final_round_suboptimality)
      .def_readonly("suboptimality_series", &RunResult::suboptimality_series)
      .def_readonly("iterates", &RunResult::iterates)
      .def_readonly("support_history", &RunResult::support_history)
      .def_readonly("algorithm", &RunResult::algorithm)
      .def_readonly("schedule", &RunResult::schedule)
      .def_readonly("eta_inner", &RunResult::eta_inner)
      .def_readonly("eta_outer", &RunResult::eta_outer)
      .def_readonly("master_seed", &RunResult::master_seed)
      .def_readonly("replicate", &RunResult::replicate);

  m.def("run", &run_by_name, py::arg("algo"), py::arg("objective"), py::arg("machines"),
        py::arg("local_steps"), py::arg("rounds"), py::arg("participants") = -1,
        py::arg("eta") = 0.0, py::arg("eta_inner") = 0.0, py::arg("eta_outer") = 0.0,
        py::arg("schedule") = "constant", py::arg("seed") = 0, py::arg("replicate") = 0,
        py::arg("record_iterates") = false, py::arg("record_support") = false);

  m.def("bound_names", &bound_names);
  m.def("eval_bound",
        [](const std::string& name, const py::dict& params) {
          return eval_bound(name, params_from_dict(params));
        });
  m.def("crossover_zeta", &crossover_zeta, py::arg("H"), py::arg("B"), py::arg("R"));
  m.def("optimality_region", [](const std::string& which, const py::dict& params) {
    const auto verdict = optimality_region(
        which == "strongly_convex" ? ConvexityCase::strongly_convex : ConvexityCase::convex,
        params_from_dict(params));
    return verdict_name(verdict);
  });

  m.def("synth_digit_corpus",
        [](std::uint64_t seed, int per_digit, int dim) {
          const auto ds = synth_digit_corpus(seed, per_digit, dim);
          return py::make_tuple(ds.features, ds.labels);
        },
        py::arg("seed"), py::arg("per_digit") = 200, py::arg("dim") = 50);
  m.def("pca_reduce", &pca_reduce, py::arg("data"), py::arg("k"));
  m.def("measure_zeta_profile",
        [](const Eigen::MatrixXd& features, const std::vector<int>& labels,
           const std::vector<double>& grid, std::uint64_t seed) {
          FeatureDataset ds{features, labels};
          return measure_zeta_profile(ds, grid, seed);
        },
        py::arg("features"), py::arg("labels"), py::arg("p_grid"), py::arg("seed") = 0);
  m.def("logistic_objective",
        [](const Eigen::MatrixXd& features, const std::vector<int>& labels, double p,
           std::uint64_t seed, double ridge) {
          FeatureDataset ds{features, labels};
          auto obj = std::make_unique<LogisticObjective>(
              ds, build_tasks_and_assign(ds, p, seed), ridge);
          obj->set_fitted_minimizer(newton_minimize(*obj));
          return obj;
        },
        py::arg("features"), py::arg("labels"), py::arg("p"), py::arg("seed") = 0,
        py::arg("ridge") = 0.0);

  m.def("sweep",
        [](const std::string& config_json, int threads) {
          const auto out = sweep(parse_experiment_config(config_json), threads);
          return py::make_tuple(out.cells_csv, out.summary_csv);
        },
        py::arg("config_json"), py::arg("threads") = 1);

  m.def("acceptance_checks", [] {
    py::list out;
    for (const auto& r : run_acceptance_checks())
      out.append(py::make_tuple(r.name, r.pass, r.detail));
    return out;
  });
}
