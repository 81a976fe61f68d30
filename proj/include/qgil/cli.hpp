#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qgil/experiment.hpp"

namespace qgil {

// Invalid command line. main() prints the message plus usage and exits 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CliMode { Run, Suite, Calibrate, Replot };

struct ParsedCli {
    CliMode mode = CliMode::Run;
    ExperimentConfig config{};
    std::string out_dir = "out";
    bool dump_dataset = false;
    int jobs = 1;
    bool tau_explicit = false;
    bool epsilon_explicit = false;
    LossVariant calibrate_variant = LossVariant::Regression;
    std::string replot_path;
    std::vector<std::string> suite_strategies;  // names, for Suite mode
    std::vector<std::string> warnings;          // e.g. flags irrelevant to the strategy
};

// Parses flags (no program name). Throws UsageError naming the offending
// flag. "--strategy all" selects Suite mode; "--calibrate" and "--replot"
// select their modes.
ParsedCli parse_args(const std::vector<std::string>& argv);

// Inverse of parse_args for single-run configs: parse_args(render_args(c))
// reproduces c exactly.
std::vector<std::string> render_args(const ExperimentConfig& config, const std::string& out_dir);

std::string usage_text();

struct CalibrationReport {
    double tau = 0.0;      // 70th percentile of l-hat over on-policy states
    double epsilon = 0.0;  // 70th percentile of the gradient norm
    double lhat_p50 = 0.0, lhat_p70 = 0.0, lhat_p90 = 0.0;
    double grad_p50 = 0.0, grad_p70 = 0.0, grad_p90 = 0.0;
    bool degenerate_lhat = false;  // distribution collapsed to a point
    bool degenerate_grad = false;
    int samples = 0;
};

// Short bootstrap + one training iteration, then the empirical distribution
// of l-hat and gradient norm over on-policy states. Suggests tau and epsilon
// at the 70th percentiles.
CalibrationReport calibrate_thresholds(const std::string& env_name, std::uint64_t seed,
                                       LossVariant variant = LossVariant::Regression,
                                       const nn::TrainConfig& policy_cfg = {},
                                       const nn::TrainConfig& lossnet_cfg = {},
                                       int bootstrap_episodes = 5, int probe_episodes = 5);

// Percentile summary underlying calibrate_thresholds, exposed so degenerate
// signal distributions can be exercised directly.
CalibrationReport summarize_calibration(const std::vector<double>& lhats,
                                        const std::vector<double>& grads);

struct RunArtifacts {
    std::string run_dir;
    std::string csv_hash;          // combined content hash of emitted CSVs
    RunResult result;
};

// Executes one run and writes metrics.csv, manifest.json and (optionally)
// dataset.csv under <out_dir>/<strategy name>/.
RunArtifacts execute_run(const ExperimentConfig& config, const std::string& out_dir,
                         bool dump_dataset);

struct SuiteRow {
    std::string algorithm;
    long long queries = 0;
    double loss = 0.0;
    double loss_std = 0.0;
    double efficiency = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string error;  // failure reason when !ok
};

struct SuiteSummary {
    std::vector<SuiteRow> rows;
    std::string summary_path;
};

// Runs each config (isolating failures), writes per-run artifacts plus one
// summary.csv. Efficiency is measured against the suite's supervised row.
SuiteSummary run_suite(const std::vector<ExperimentConfig>& configs, const std::string& out_dir,
                       bool dump_dataset = false, int jobs = 1);

// Reads a metrics.csv back, validates the header and the 1..M iteration
// column, and renders a terminal chart. Returns the parsed rows.
std::vector<IterationMetrics> replot(const std::string& csv_path, std::ostream& out);

// Loads the config echo of a previously written manifest.
ExperimentConfig config_from_manifest(const std::string& manifest_path);
std::string manifest_csv_hash(const std::string& manifest_path);

int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace qgil
