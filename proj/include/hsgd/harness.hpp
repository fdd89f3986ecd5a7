#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hsgd/objective.hpp"
#include "hsgd/optimizers.hpp"

namespace hsgd {

// Declarative instance reference: family name + parameters, JSON-serializable
// so experiment configs stay diff-able. Chain instances depend on the round
// budget, so materialization takes the cell's R.
struct InstanceSpec {
  std::string family;  // local_lb | chain | quadratic | exact_zeta | logreg_synth | logreg_cache
  std::string params_json;

  std::unique_ptr<DistributedObjective> materialize(int rounds) const;
  std::string label() const;
};

InstanceSpec instance_from_json(const std::string& json_text);
std::string instance_to_json(const InstanceSpec& spec);

struct AlgorithmConfig {
  std::string algo;                 // minibatch | local | inner_outer | acsa | multistage_acsa
  std::string schedule = "constant";// constant | stich | poly_decay | local_tuned_convex
  double eta = 0.0;                 // constant stepsize (grid overrides)
  double eta_inner = 0.0, eta_outer = 0.0;  // inner_outer only
  double poly_a = 0.0;
  bool sweep_eta = true;            // participate in the stepsize grid
  std::vector<double> eta_grid;     // per-algorithm grid; overrides the global one
};

struct ExperimentConfig {
  int schema_version = 1;
  InstanceSpec instance;
  std::vector<AlgorithmConfig> algorithms;
  std::vector<int> machines, local_steps, rounds, participants;
  std::vector<double> stepsizes;    // empty = algorithms' own eta
  int replicates = 1;
  std::uint64_t master_seed = 0;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string serialize_experiment_config(const ExperimentConfig& config);

struct SweepOutput {
  std::string cells_csv;    // fixed 15-column schema, one row per cell
  std::string summary_csv;  // best stepsize per group with mean/stderr
};

// Runs every (algorithm, M, K, R, S, eta, replicate) cell. Cells are
// independent; `threads` only changes wall time, never output bytes.
SweepOutput sweep(const ExperimentConfig& config, int threads = 1);

extern const char* const kCellsCsvHeader;
extern const char* const kSummaryCsvHeader;

struct SupportVerdict {
  bool pass = true;
  int round = -1, machine = -1, coordinate = -1;
};

// Zero-respecting progress check on a chain run: after round r (0-based),
// every machine's support must lie in E_{r+1} = {0..r}. Coordinates count as
// occupied above 1e-14 in magnitude.
SupportVerdict check_support_progress(const RunResult& run);

// Machine-readable comparison of empirical suboptimality against the named
// closed-form bounds; byte-identical across reruns on equal input.
struct ReportEntry {
  std::string label;
  double empirical = 0.0;
  std::vector<std::pair<std::string, double>> bounds;  // name -> unit-constant value
};
std::string emit_report(const std::vector<ReportEntry>& entries);

}  // namespace hsgd
