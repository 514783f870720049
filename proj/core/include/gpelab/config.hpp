#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gpelab::cli {

/// Flat key=value run configuration, grouped into [section] blocks in the
/// file form. Zero means "derive automatically" for the fields documented
/// as auto. parse_config(render_config(c)) == c for every valid c.
struct ExperimentConfig {
  struct Experiment {
    std::string kind = "scatter";
    std::string out_dir = "runs";
    std::string label;            // replaces the timestamp when nonempty
    bool operator==(const Experiment&) const = default;
  } experiment;

  struct Physics {
    double q = 3.0;
    double v = 3.0;
    double x0 = -10.0;
    double amplitude = 1.0;
    double phase = 0.0;
    bool operator==(const Physics&) const = default;
  } physics;

  struct Mesh {
    double R = 0.0;            // auto: |x0| + 1.05 v t_final + 12
    double h_out = 0.02;
    double h_in = 0.0;         // auto: h_out / refine_ratio
    double refine_ratio = 4.0;
    bool operator==(const Mesh&) const = default;
  } mesh;

  struct Time {
    double dt = 0.0;           // auto: min(h_out/(2 v) * 0.8, 2e-3)
    double t_final = 0.0;      // auto: |x0|/v + t_post
    double t_post = 16.0;
    int iterations = 3;
    bool nonlinear = true;
    std::string cubic_rule = "nodal";  // or "exact"
    bool residual_stop = false;
    double mass_drift_tol = 1e-4;
    bool operator==(const Time&) const = default;
  } time;

  struct Output {
    int sample_stride = 10;
    double snapshot_interval = 0.0;
    double stabilize_window = 0.0;  // auto: max(2, (t_final - t0)/4)
    double stabilize_tol = 1e-3;
    bool emit_plot_script = true;
    bool keep_series = true;        // per-run series.csv in sweeps
    bool operator==(const Output&) const = default;
  } output;

  struct Sweep {
    std::vector<double> alphas = {1.0};
    std::vector<double> velocities = {3.0, 4.0, 5.0, 6.0};
    int workers = 0;               // 0 = hardware concurrency
    bool operator==(const Sweep&) const = default;
  } sweep;

  struct Resolve {
    double R_big = 0.0;            // auto: 4 R
    int n_big = 0;                 // auto: 2 R_big / h_big elements
    double h_big = 0.05;
    double dt = 5e-3;
    double t_resolve = 150.0;
    std::string side = "both";     // or "transmitted", "reflected"
    double search_forward = 1.5;   // profile-distance search span past t0
    double deviation_span = 1.0;   // perturbed-vs-free check length
    bool operator==(const Resolve&) const = default;
  } resolve;

  struct Free {
    double alpha = 0.8;
    bool operator==(const Free&) const = default;
  } free;

  struct Linear {
    std::vector<double> velocities = {10.0, 20.0, 40.0};
    double support_left = -12.0;
    double support_right = -8.0;
    bool operator==(const Linear&) const = default;
  } linear;

  struct Fit {
    std::string input;             // sweep.csv path for the fit subcommand
    bool operator==(const Fit&) const = default;
  } fit;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the key=value form. Unknown keys, malformed lines and bad values
/// are rejected with the line number in the message.
ExperimentConfig parse_config(const std::string& text);

/// Canonical rendering (sections and keys in fixed order, shortest
/// round-trip floats).
std::string render_config(const ExperimentConfig& config);

ExperimentConfig load_config(const std::filesystem::path& file);

}  // namespace gpelab::cli
