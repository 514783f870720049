#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpelab/config.hpp"
#include "gpelab/fitting.hpp"
#include "gpelab/measure.hpp"
#include "gpelab/stepper.hpp"
#include "gpelab/theory.hpp"

namespace gpelab::cli {

/// Creates <out>/<kind>-<timestamp or label>/ (the GPELAB_OUT_DIR
/// environment variable overrides the configured output root) and writes
/// the rendered config into it.
std::filesystem::path make_run_dir(const ExperimentConfig& config,
                                   const std::string& kind);

/// Fully derived run parameters (auto fields resolved). Recorded in the
/// run directory so every run is reproducible from its own config copy.
struct DerivedParams {
  double R = 0.0;
  int outer_elems = 0;
  int inner_elems = 0;
  double dt = 0.0;
  double t_final = 0.0;
  double t_interaction = 0.0;
  double stabilize_window = 0.0;
};

DerivedParams derive_scatter_params(const ExperimentConfig& config);

struct ScatterOutcome {
  std::filesystem::path run_dir;
  DerivedParams derived;
  measure::MassPartition final_partition;
  std::optional<double> transmitted_limit;   // stabilized windowed values
  std::optional<double> reflected_limit;
  std::optional<double> trapped_limit;
  double transmitted_mean = 0.0;             // plain trailing-window means
  double reflected_mean = 0.0;
  double trapped_mean = 0.0;
  double mass_drift = 0.0;
  double min_profile_distance = 0.0;
  double min_distance_time = 0.0;
  double max_edge_mass_fraction = 0.0;       // mass within 5 units of +-R
  std::vector<std::string> warnings;
  stepper::Trajectory trajectory;
  std::optional<fem::ComplexField> state_at_min;  // kept when requested
};

ScatterOutcome run_scatter(const ExperimentConfig& config,
                           bool keep_min_state = false);

struct SweepRow {
  double alpha = 0.0;
  double v = 0.0;
  double q = 0.0;
  double transmitted = 0.0;
  double reflected = 0.0;
  double trapped = 0.0;
  double mass_drift = 0.0;
  bool stabilized = false;
};

struct SweepOutcome {
  std::filesystem::path run_dir;
  std::filesystem::path csv_path;
  std::vector<SweepRow> rows;                     // sorted by (alpha, v)
  std::vector<std::string> failures;              // "alpha=..,v=..: what"
};

SweepOutcome run_sweep(const ExperimentConfig& config);

struct ResolveSide {
  measure::Side side = measure::Side::transmitted;
  bool skipped = false;
  std::string skip_reason;
  double theory_amplitude = 0.0;
  std::optional<measure::ResolutionResult> result;
};

struct ResolveOutcome {
  std::filesystem::path run_dir;
  ScatterOutcome scatter;
  double deviation_vs_free = 0.0;     // max L2 gap over the check span
  double deviation_rel = 0.0;         // relative to the state norm
  theory::SplitPrediction prediction;
  ResolveSide transmitted;
  ResolveSide reflected;
};

ResolveOutcome run_resolve(const ExperimentConfig& config);

struct FreeResolutionOutcome {
  std::filesystem::path run_dir;
  theory::ResolutionAsymptote asymptote;
  double averaged_amplitude = 0.0;        // trailing-window mean of |u(0,t)|
  double averaged_sup = 0.0;              // trailing-window mean of sup |u|
  std::optional<double> averaged_phase_deviation;  // alpha > 1/2 only
  std::optional<double> decay_exponent;   // alpha < 1/2: sup ~ t^-p fit
  double mass_drift = 0.0;
};

FreeResolutionOutcome run_free_resolution(const ExperimentConfig& config);

struct LinearCheckRow {
  double v = 0.0;
  double max_split_error = 0.0;   // max_t L2 gap to the split formula
  double error_bound = 0.0;       // ||psi'|| / v
  double transmitted_measured = 0.0;
  double transmitted_theory = 0.0;
  double transmitted_deviation = 0.0;
};

struct LinearCheckOutcome {
  std::filesystem::path run_dir;
  std::vector<LinearCheckRow> rows;
  std::vector<double> deviation_ratios;  // dev(v_k) / dev(v_{k+1})
};

LinearCheckOutcome run_linear_check(const ExperimentConfig& config);

struct FitRow {
  double alpha = 0.0;
  std::string model;              // "power" or "exponential"
  fitting::FitResult fit;
};

struct FitOutcome {
  std::filesystem::path run_dir;
  std::vector<FitRow> rows;
  std::vector<std::string> notes;  // groups skipped and why
};

/// Reads a sweep.csv, fits the transmitted-deficit power law per alpha and
/// the trapped-mass exponential per negative alpha, and writes
/// fit_report.csv plus plot scripts.
FitOutcome run_fit(const ExperimentConfig& config);

}  // namespace gpelab::cli
