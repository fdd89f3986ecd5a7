#include "hsgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hsgd/chain.hpp"
#include "hsgd/dataset.hpp"
#include "hsgd/local_lb.hpp"
#include "hsgd/logreg.hpp"
#include "hsgd/quadratic.hpp"
#include "hsgd/rates.hpp"

namespace hsgd {

using json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument(std::string("invalid JSON in ") + what);
  return j;
}

double get_num(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw std::invalid_argument(std::string("missing config field: ") + key);
  }
  return j.at(key).get<double>();
}

}  // namespace

std::unique_ptr<DistributedObjective> InstanceSpec::materialize(int rounds) const {
  const json p = parse_json(params_json, "instance params");
  if (family == "local_lb") {
    LocalLbParams lp;
    lp.smoothness = get_num(p, "H");
    lp.strong_convexity = get_num(p, "lambda", 0.0);
    lp.mu = get_num(p, "mu");
    lp.fourth_curvature = get_num(p, "L", lp.smoothness / 2.0);
    lp.zeta = get_num(p, "zeta", 0.0);
    lp.sigma = get_num(p, "sigma", 0.0);
    if (p.contains("B")) lp.norm_bound = p.at("B").get<double>();
    if (p.contains("Delta")) lp.suboptimality = p.at("Delta").get<double>();
    lp.machines = static_cast<int>(get_num(p, "M", 2));
    return std::make_unique<LocalLbObjective>(lp);
  }
  if (family == "chain") {
    return std::make_unique<ChainObjective>(get_num(p, "H"), get_num(p, "lambda"),
                                            get_num(p, "C", 1.0), rounds,
                                            static_cast<int>(get_num(p, "M", 2)));
  }
  if (family == "quadratic") {
    return std::make_unique<MeanShiftQuadratic>(random_quadratic(
        static_cast<int>(get_num(p, "dim", 10)), static_cast<int>(get_num(p, "M", 4)),
        get_num(p, "curv_min", 0.5), get_num(p, "curv_max", 4.0), get_num(p, "B", 1.0),
        get_num(p, "zeta_rms", 0.0), get_num(p, "sigma", 0.0),
        static_cast<std::uint64_t>(get_num(p, "gen_seed", 0))));
  }
  if (family == "exact_zeta") {
    return std::make_unique<MeanShiftQuadratic>(exact_zeta_quadratic(
        static_cast<int>(get_num(p, "dim", 10)), static_cast<int>(get_num(p, "M", 25)),
        get_num(p, "zeta_sq"), get_num(p, "sigma", 0.0),
        static_cast<std::uint64_t>(get_num(p, "gen_seed", 0))));
  }
  if (family == "logreg_synth" || family == "logreg_cache") {
    FeatureDataset ds =
        family == "logreg_synth"
            ? synth_digit_corpus(static_cast<std::uint64_t>(get_num(p, "corpus_seed", 0)),
                                 static_cast<int>(get_num(p, "per_digit", 200)),
                                 static_cast<int>(get_num(p, "dim", 50)))
            : load_cache(p.at("cache").get<std::string>());
    if (p.contains("pca")) ds = pca_reduce_dataset(ds, p.at("pca").get<int>());
    const auto assignment = build_tasks_and_assign(
        ds, get_num(p, "p"), static_cast<std::uint64_t>(get_num(p, "assign_seed", 0)));
    auto obj = std::make_unique<LogisticObjective>(ds, assignment, get_num(p, "ridge", 0.0));
    obj->set_fitted_minimizer(newton_minimize(*obj));
    return obj;
  }
  throw std::invalid_argument("unknown instance family: " + family);
}

std::string InstanceSpec::label() const {
  const json p = parse_json(params_json, "instance params");
  std::string out = family;
  for (auto it = p.begin(); it != p.end(); ++it) {
    out += ";" + it.key() + "=";
    if (it.value().is_number()) out += format_double(it.value().get<double>());
    else out += it.value().dump();
  }
  // logistic F* comes from the Newton fit, not a closed form
  if (family == "logreg_synth" || family == "logreg_cache") out += ";fstar=newton";
  return out;
}

InstanceSpec instance_from_json(const std::string& json_text) {
  json j = parse_json(json_text, "instance");
  if (!j.contains("family")) throw std::invalid_argument("instance needs a family");
  InstanceSpec spec;
  spec.family = j.at("family").get<std::string>();
  static const char* known[] = {"local_lb",   "chain",        "quadratic",
                                "exact_zeta", "logreg_synth", "logreg_cache"};
  if (std::find_if(std::begin(known), std::end(known),
                   [&](const char* k) { return spec.family == k; }) == std::end(known))
    throw std::invalid_argument("unknown instance family: " + spec.family);
  j.erase("family");
  spec.params_json = j.dump();
  return spec;
}

std::string instance_to_json(const InstanceSpec& spec) {
  json j = parse_json(spec.params_json, "instance params");
  json out;
  out["family"] = spec.family;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value();
  return out.dump();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  try {
    return parse_experiment_config_impl(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
  }
}

ExperimentConfig parse_experiment_config_impl(const std::string& json_text) {
  const json j = parse_json(json_text, "experiment config");
  ExperimentConfig cfg;
  cfg.schema_version = j.contains("schema_version") ? j.at("schema_version").get<int>() : 1;
  if (cfg.schema_version != 1) throw std::invalid_argument("unsupported schema_version");
  cfg.instance = instance_from_json(j.at("instance").dump());
  if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty())
    throw std::invalid_argument("config needs a non-empty algorithms list");
  for (const auto& a : j.at("algorithms")) {
    AlgorithmConfig ac;
    ac.algo = a.at("algo").get<std::string>();
    algorithm_from_name(ac.algo);  // validates
    if (a.contains("schedule")) ac.schedule = a.at("schedule").get<std::string>();
    if (ac.schedule != "constant" && ac.schedule != "stich" && ac.schedule != "poly_decay" &&
        ac.schedule != "local_tuned_convex")
      throw std::invalid_argument("unknown schedule: " + ac.schedule);
    ac.eta = get_num(a, "eta", 0.0);
    ac.eta_inner = get_num(a, "eta_inner", 0.0);
    ac.eta_outer = get_num(a, "eta_outer", 0.0);
    ac.poly_a = get_num(a, "poly_a", 0.0);
    if (a.contains("sweep_eta")) ac.sweep_eta = a.at("sweep_eta").get<bool>();
    if (a.contains("stepsizes")) {
      const auto& s = a.at("stepsizes");
      if (s.contains("values")) {
        for (const auto& v : s.at("values")) ac.eta_grid.push_back(v.get<double>());
      } else {
        const double lo = s.at("min").get<double>(), hi = s.at("max").get<double>();
        const int points = s.at("points").get<int>();
        if (points < 1 || !(lo > 0) || !(hi >= lo))
          throw std::invalid_argument("bad per-algorithm stepsize grid");
        for (int i = 0; i < points; ++i) {
          const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
          ac.eta_grid.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
        }
      }
    }
    cfg.algorithms.push_back(std::move(ac));
  }
  const auto& g = j.at("geometry");
  auto ints = [&](const char* key, std::vector<int> fallback) {
    if (!g.contains(key)) return fallback;
    std::vector<int> out;
    for (const auto& v : g.at(key)) out.push_back(v.get<int>());
    if (out.empty()) throw std::invalid_argument(std::string("empty geometry list: ") + key);
    return out;
  };
  cfg.machines = ints("M", {1});
  cfg.local_steps = ints("K", {1});
  cfg.rounds = ints("R", {1});
  cfg.participants = ints("S", {-1});
  if (j.contains("stepsizes")) {
    const auto& s = j.at("stepsizes");
    if (s.contains("values")) {
      for (const auto& v : s.at("values")) cfg.stepsizes.push_back(v.get<double>());
    } else {
      const double lo = s.at("min").get<double>(), hi = s.at("max").get<double>();
      const int points = s.at("points").get<int>();
      if (points < 1 || !(lo > 0) || !(hi >= lo))
        throw std::invalid_argument("bad stepsize grid");
      for (int i = 0; i < points; ++i) {
        const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        cfg.stepsizes.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
      }
    }
  }
  cfg.replicates = j.contains("replicates") ? j.at("replicates").get<int>() : 1;
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  cfg.master_seed = j.contains("master_seed")
                        ? j.at("master_seed").get<std::uint64_t>()
                        : 0;
  for (int m : cfg.machines)
    for (int k : cfg.local_steps)
      for (int r : cfg.rounds)
        for (int s : cfg.participants) {
          CommGeometry geom{m, k, r, s};
          geom.validate();
        }
  return cfg;
}

std::string serialize_experiment_config(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["instance"] = parse_json(instance_to_json(cfg.instance), "instance");
  json algos = json::array();
  for (const auto& a : cfg.algorithms) {
    json aj;
    aj["algo"] = a.algo;
    aj["schedule"] = a.schedule;
    aj["eta"] = a.eta;
    aj["eta_inner"] = a.eta_inner;
    aj["eta_outer"] = a.eta_outer;
    aj["poly_a"] = a.poly_a;
    aj["sweep_eta"] = a.sweep_eta;
    if (!a.eta_grid.empty()) aj["stepsizes"] = {{"values", a.eta_grid}};
    algos.push_back(aj);
  }
  j["algorithms"] = algos;
  j["geometry"] = {{"M", cfg.machines},
                   {"K", cfg.local_steps},
                   {"R", cfg.rounds},
                   {"S", cfg.participants}};
  if (!cfg.stepsizes.empty()) j["stepsizes"] = {{"values", cfg.stepsizes}};
  j["replicates"] = cfg.replicates;
  j["master_seed"] = cfg.master_seed;
  return j.dump(2);
}

const char* const kCellsCsvHeader =
    "instance,algo,M,K,R,S,eta_inner,eta_outer,schedule,seed,replicate,zeta_star_sq,sigma,"
    "final_subopt,rounds_to_tol";
const char* const kSummaryCsvHeader =
    "instance,algo,M,K,R,S,schedule,best_eta_inner,best_eta_outer,mean_final_subopt,"
    "stderr_final_subopt,replicates";

namespace {

struct Cell {
  const AlgorithmConfig* algo;
  CommGeometry geom;
  double eta;          // constant stepsize for this cell (0 = schedule-defined)
  int replicate;
  std::size_t group;   // summary group id
};

ScheduleSpec cell_schedule(const AlgorithmConfig& ac, const DistributedObjective& obj,
                           const CommGeometry& geom, double eta) {
  const auto& c = obj.constants();
  if (ac.schedule == "stich")
    return ScheduleSpec::stich(c.smoothness, c.strong_convexity, geom.rounds);
  if (ac.schedule == "poly_decay")
    return ScheduleSpec::poly_decay(c.strong_convexity,
                                    ac.poly_a > 0 ? ac.poly_a
                                                  : 20.0 * c.smoothness / c.strong_convexity);
  if (ac.schedule == "local_tuned_convex") {
    const double b = c.minimizer_norm_bound.value_or(1.0);
    return ScheduleSpec::local_tuned_convex(c.smoothness, b, c.noise_std, c.noise_std_at_opt,
                                         c.zeta_bar, geom.machines, geom.local_steps,
                                         geom.rounds);
  }
  return ScheduleSpec::constant(eta);
}

RunResult run_cell(const DistributedObjective& obj, const Cell& cell, std::uint64_t master_seed) {
  RunOptions opts;
  opts.replicate = static_cast<std::uint64_t>(cell.replicate);
  const auto algo = algorithm_from_name(cell.algo->algo);
  const auto sched = cell_schedule(*cell.algo, obj, cell.geom, cell.eta);
  double eta_inner = cell.algo->eta_inner, eta_outer = cell.algo->eta_outer;
  if (algo == Algorithm::inner_outer && cell.eta > 0 && cell.algo->sweep_eta)
    eta_inner = eta_outer = cell.eta;
  return run_with_subset(algo, obj, cell.geom, sched, eta_inner, eta_outer, master_seed, opts);
}

int rounds_to_tol(const RunResult& run, double initial_gap) {
  const double tol = 1e-6 * initial_gap;
  for (std::size_t r = 0; r < run.suboptimality_series.size(); ++r)
    if (run.suboptimality_series[r] <= tol) return static_cast<int>(r) + 1;
  return -1;
}

}  // namespace

SweepOutput sweep(const ExperimentConfig& cfg, int threads) {
  if (threads < 1) threads = 1;

  // chain dimensions depend on R: materialize one objective per round count
  std::map<int, std::unique_ptr<DistributedObjective>> instances;
  for (int r : cfg.rounds)
    if (!instances.count(r)) instances[r] = cfg.instance.materialize(r);

  std::vector<Cell> cells;
  std::size_t group = 0;
  for (const auto& algo : cfg.algorithms) {
    for (int m : cfg.machines)
      for (int k : cfg.local_steps)
        for (int r : cfg.rounds)
          for (int s : cfg.participants) {
            const CommGeometry geom{m, k, r, s};
            const auto& grid_src = algo.eta_grid.empty() ? cfg.stepsizes : algo.eta_grid;
            const bool grid = !grid_src.empty() && algo.sweep_eta &&
                              algo.schedule == "constant";
            const std::vector<double> etas =
                grid ? grid_src : std::vector<double>{algo.eta};
            for (double eta : etas)
              for (int rep = 0; rep < cfg.replicates; ++rep)
                cells.push_back(Cell{&algo, geom, eta, rep, group});
            ++group;
          }
  }

  struct CellResult {
    double final_subopt = 0.0;
    int to_tol = -1;
    double eta_inner = 0.0, eta_outer = 0.0;
    std::string schedule;
  };
  std::vector<CellResult> results(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const auto& cell = cells[i];
      const auto& obj = *instances.at(cell.geom.rounds);
      const RunResult run = run_cell(obj, cell, cfg.master_seed);
      const double gap = obj.constants().initial_suboptimality.value_or(1.0);
      results[i] = CellResult{run.output_suboptimality, rounds_to_tol(run, gap), run.eta_inner,
                              run.eta_outer, run.schedule};
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::string cells_csv = std::string(kCellsCsvHeader) + "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    const auto& res = results[i];
    const auto& obj = *instances.at(cell.geom.rounds);
    const auto& c = obj.constants();
    cells_csv += cfg.instance.label() + "," + cell.algo->algo + "," +
                 std::to_string(cell.geom.machines) + "," +
                 std::to_string(cell.geom.local_steps) + "," +
                 std::to_string(cell.geom.rounds) + "," +
                 std::to_string(cell.geom.effective_participants()) + "," +
                 format_double(res.eta_inner) + "," + format_double(res.eta_outer) + "," +
                 res.schedule + "," + std::to_string(cfg.master_seed) + "," +
                 std::to_string(cell.replicate) + "," +
                 format_double(c.zeta_star * c.zeta_star) + "," + format_double(c.noise_std) +
                 "," + format_double(res.final_subopt) + "," + std::to_string(res.to_tol) + "\n";
  }

  // summary: best constant stepsize per group by mean final suboptimality,
  // ties to the smaller stepsize
  struct Agg {
    double eta_key = 0.0;
    std::vector<double> values;
    double eta_inner = 0.0, eta_outer = 0.0;
    std::string schedule;
  };
  std::map<std::pair<std::size_t, double>, Agg> agg;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& a = agg[{cells[i].group, cells[i].eta}];
    a.eta_key = cells[i].eta;
    a.values.push_back(results[i].final_subopt);
    a.eta_inner = results[i].eta_inner;
    a.eta_outer = results[i].eta_outer;
    a.schedule = results[i].schedule;
  }
  std::string summary_csv = std::string(kSummaryCsvHeader) + "\n";
  std::size_t current = SIZE_MAX;
  const Agg* best = nullptr;
  double best_mean = 0.0;
  std::vector<std::pair<std::size_t, const Cell*>> group_repr;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (group_repr.empty() || group_repr.back().first != cells[i].group)
      group_repr.emplace_back(cells[i].group, &cells[i]);
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  auto stderr_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / (v.size() - 1) / v.size());
  };
  for (const auto& [gid, repr] : group_repr) {
    best = nullptr;
    current = gid;
    // agg iterates etas ascending, so strict < keeps the smaller eta on ties
    for (const auto& [key, a] : agg) {
      if (key.first != current) continue;
      const double mu = mean_of(a.values);
      if (!best || mu < best_mean) {
        best = &a;
        best_mean = mu;
      }
    }
    summary_csv += cfg.instance.label() + "," + repr->algo->algo + "," +
                   std::to_string(repr->geom.machines) + "," +
                   std::to_string(repr->geom.local_steps) + "," +
                   std::to_string(repr->geom.rounds) + "," +
                   std::to_string(repr->geom.effective_participants()) + "," + best->schedule +
                   "," + format_double(best->eta_inner) + "," + format_double(best->eta_outer) +
                   "," + format_double(best_mean) + "," + format_double(stderr_of(best->values)) +
                   "," + std::to_string(cfg.replicates) + "\n";
  }
  return SweepOutput{std::move(cells_csv), std::move(summary_csv)};
}

SupportVerdict check_support_progress(const RunResult& run) {
  if (run.support_history.empty())
    throw std::invalid_argument("run has no support history: enable record_support");
  SupportVerdict v;
  for (std::size_t r = 0; r < run.support_history.size(); ++r) {
    const auto& machines = run.support_history[r];
    for (std::size_t m = 0; m < machines.size(); ++m) {
      for (int coord : machines[m]) {
        if (coord > static_cast<int>(r)) {
          return SupportVerdict{false, static_cast<int>(r), static_cast<int>(m), coord};
        }
      }
    }
  }
  return v;
}

std::string emit_report(const std::vector<ReportEntry>& entries) {
  json rows = json::array();
  for (const auto& e : entries) {
    json row;
    row["label"] = e.label;
    row["empirical"] = e.empirical;
    json bounds;
    for (const auto& [name, value] : e.bounds) {
      bounds[name] = value;
      if (!(value >= 0) && !(value <= 0))
        throw std::invalid_argument("bound value for " + name + " is not a number");
    }
    row["bounds"] = bounds;
    json verdicts;
    for (const auto& [name, value] : e.bounds)
      verdicts[name] = e.empirical <= value ? "within" : "above";
    row["verdicts"] = verdicts;
    rows.push_back(row);
  }
  json out;
  out["schema_version"] = 1;
  out["rows"] = rows;
  return out.dump(2) + "\n";
}

}  // namespace hsgd
