#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "hsgd/checks.hpp"
#include "hsgd/dataset.hpp"
#include "hsgd/harness.hpp"
#include "hsgd/idx.hpp"
#include "hsgd/optimizers.hpp"
#include "hsgd/rates.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;
constexpr int kExitCheckFailure = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const std::string s = read_file(path);
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
}

struct BoundsOptions {
  std::map<std::string, double> values;
  bool table = false;
};

hsgd::BoundParams to_params(const std::map<std::string, double>& v) {
  hsgd::BoundParams p;
  auto get = [&](const char* key) -> std::optional<double> {
    auto it = v.find(key);
    if (it == v.end()) return std::nullopt;
    return it->second;
  };
  p.H = get("H");
  p.B = get("B");
  p.Delta = get("Delta");
  p.lambda = get("lambda");
  p.sigma = get("sigma");
  p.sigma_star = get("sigma_star");
  p.zeta_star = get("zeta_star");
  p.zeta_bar = get("zeta_bar");
  p.machines = get("M");
  p.local_steps = get("K");
  p.rounds = get("R");
  p.participants = get("S");
  return p;
}

int cmd_bounds(const BoundsOptions& opts, const std::string& out_path) {
  const auto params = to_params(opts.values);
  if (opts.table) {
    std::string csv = "bound,value,note\n";
    for (const auto& name : hsgd::bound_names()) {
      try {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", hsgd::eval_bound(name, params));
        csv += name + "," + buf + ",\n";
      } catch (const std::exception& e) {
        csv += name + ",,\"" + e.what() + "\"\n";
      }
    }
    if (out_path.empty())
      std::fputs(csv.c_str(), stdout);
    else
      write_file(out_path, csv);
    return kExitOk;
  }
  json out;
  for (const auto& name : hsgd::bound_names()) {
    try {
      out[name] = hsgd::eval_bound(name, params);
    } catch (const std::exception&) {
      // skip rows whose parameters were not supplied
    }
  }
  const std::string text = out.dump(2) + "\n";
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_file(out_path, text);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads,
              std::optional<std::uint64_t> seed) {
  auto cfg = hsgd::parse_experiment_config(read_file(config_path));
  if (seed) cfg.master_seed = *seed;
  const auto result = hsgd::sweep(cfg, threads);
  if (out_dir.empty()) {
    std::fputs(result.cells_csv.c_str(), stdout);
  } else {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/cells.csv", result.cells_csv);
    write_file(out_dir + "/summary.csv", result.summary_csv);
  }
  return kExitOk;
}

// single-cell run: detailed JSON (default) or the one-row CSV
int cmd_run(const std::string& config_path, const std::string& out_path,
            std::optional<std::uint64_t> seed, bool csv) {
  auto cfg = hsgd::parse_experiment_config(read_file(config_path));
  if (seed) cfg.master_seed = *seed;
  const std::size_t cells = cfg.algorithms.size() * cfg.machines.size() *
                            cfg.local_steps.size() * cfg.rounds.size() *
                            cfg.participants.size() *
                            std::max<std::size_t>(1, cfg.stepsizes.size()) * cfg.replicates;
  if (cells != 1)
    throw std::invalid_argument("run expects a single-cell config (" + std::to_string(cells) +
                                " cells found); use sweep for grids");
  const auto result = hsgd::sweep(cfg, 1);
  std::string text;
  if (csv) {
    text = result.cells_csv;
  } else {
    const auto& algo = cfg.algorithms.front();
    auto obj = cfg.instance.materialize(cfg.rounds.front());
    hsgd::CommGeometry geom{cfg.machines.front(), cfg.local_steps.front(), cfg.rounds.front(),
                            cfg.participants.front()};
    hsgd::ScheduleSpec sched = hsgd::ScheduleSpec::constant(
        cfg.stepsizes.empty() ? algo.eta : cfg.stepsizes.front());
    if (algo.schedule == "stich")
      sched = hsgd::ScheduleSpec::stich(obj->constants().smoothness,
                                        obj->constants().strong_convexity, geom.rounds);
    else if (algo.schedule == "poly_decay")
      sched = hsgd::ScheduleSpec::poly_decay(
          obj->constants().strong_convexity,
          20.0 * obj->constants().smoothness / obj->constants().strong_convexity);
    else if (algo.schedule == "local_tuned_convex")
      sched = hsgd::ScheduleSpec::local_tuned_convex(
          obj->constants().smoothness, obj->constants().minimizer_norm_bound.value_or(1.0),
          obj->constants().noise_std, obj->constants().noise_std_at_opt,
          obj->constants().zeta_bar, geom.machines, geom.local_steps, geom.rounds);
    const auto run = hsgd::run_with_subset(hsgd::algorithm_from_name(algo.algo), *obj, geom,
                                           sched, algo.eta_inner, algo.eta_outer,
                                           cfg.master_seed, {});
    json out;
    out["instance"] = cfg.instance.label();
    out["algorithm"] = run.algorithm;
    out["schedule"] = run.schedule;
    out["geometry"] = {{"M", geom.machines},
                       {"K", geom.local_steps},
                       {"R", geom.rounds},
                       {"S", geom.effective_participants()}};
    out["eta_inner"] = run.eta_inner;
    out["eta_outer"] = run.eta_outer;
    out["master_seed"] = run.master_seed;
    out["output_suboptimality"] = run.output_suboptimality;
    out["final_round_suboptimality"] = run.final_round_suboptimality;
    out["suboptimality_series"] = run.suboptimality_series;
    text = out.dump(2) + "\n";
  }
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_file(out_path, text);
  return kExitOk;
}

int cmd_lb_check() {
  bool ok = true;
  for (const auto& r : hsgd::run_lb_checks()) {
    std::printf("[%s] %s — %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hsgd — heterogeneous intermittent-communication SGD simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  int threads = 1;
  std::uint64_t seed = 0;
  bool csv_mode = false, json_mode = false;
  std::optional<std::uint64_t> seed_override;

  auto* run = app.add_subcommand("run", "run a single experiment cell");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_path, "output file (stdout if omitted)");
  run->add_option("--seed", [&seed_override](const std::vector<std::string>& v) {
    seed_override = std::stoull(v.at(0));
    return true;
  }, "override the config master_seed");
  run->add_flag("--csv", csv_mode, "emit the one-row CSV instead of JSON");
  run->add_flag("--json", json_mode, "emit JSON (default)");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a stepsize/geometry grid");
  sweep_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  sweep_cmd->add_option("--out", out_path, "output directory (stdout if omitted)");
  sweep_cmd->add_option("--seed", [&seed_override](const std::vector<std::string>& v) {
    seed_override = std::stoull(v.at(0));
    return true;
  }, "override the config master_seed");
  sweep_cmd->add_option("--threads", threads, "worker threads (speed only, never results)");

  BoundsOptions bounds_opts;
  auto* bounds = app.add_subcommand("bounds", "evaluate the closed-form rate table");
  for (const char* key :
       {"H", "B", "Delta", "lambda", "sigma", "sigma_star", "zeta_star", "zeta_bar", "M", "K",
        "R", "S"}) {
    bounds->add_option(std::string("--") + key,
                       [&bounds_opts, key](const std::vector<std::string>& vals) {
                         bounds_opts.values[key] = std::stod(vals.at(0));
                         return true;
                       },
                       std::string("parameter ") + key);
  }
  bounds->add_flag("--table", bounds_opts.table, "emit a CSV replica of the rate tables");
  bounds->add_option("--out", out_path, "output file (stdout if omitted)");

  auto* lb = app.add_subcommand("lb-check", "hard-instance verification suite");
  (void)lb;

  auto* data = app.add_subcommand("data", "dataset preparation");
  data->require_subcommand(1);
  std::string idx_images, idx_labels, cache_out = "data.bin";
  int pca_k = 0, per_digit = 200, synth_dim = 50;
  auto* prep = data->add_subcommand("prep", "IDX images+labels -> feature cache");
  prep->add_option("--idx-images", idx_images)->required();
  prep->add_option("--idx-labels", idx_labels)->required();
  prep->add_option("--pca", pca_k, "project onto the top-k principal directions");
  prep->add_option("--out", cache_out);
  auto* synth = data->add_subcommand("synth", "generate the surrogate corpus");
  synth->add_option("--seed", seed);
  synth->add_option("--per-digit", per_digit);
  synth->add_option("--dim", synth_dim);
  synth->add_option("--pca", pca_k, "project onto the top-k principal directions");
  synth->add_option("--out", cache_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_path, seed_override, csv_mode);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, out_path, threads, seed_override);
    if (bounds->parsed()) return cmd_bounds(bounds_opts, out_path);
    if (lb->parsed()) return cmd_lb_check();
    if (data->parsed()) {
      hsgd::FeatureDataset ds;
      if (prep->parsed()) {
        ds = hsgd::dataset_from_idx(hsgd::parse_idx_images(read_bytes(idx_images)),
                                    hsgd::parse_idx_labels(read_bytes(idx_labels)));
      } else {
        ds = hsgd::synth_digit_corpus(seed, per_digit, synth_dim);
      }
      if (pca_k > 0) ds = hsgd::pca_reduce_dataset(ds, pca_k);
      hsgd::save_cache(cache_out, ds);
      std::printf("wrote %s: %lld rows, %lld features\n", cache_out.c_str(),
                  static_cast<long long>(ds.features.rows()),
                  static_cast<long long>(ds.features.cols()));
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntimeError;
  }
  return kExitOk;
}
