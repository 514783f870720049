#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpelab/csv.hpp"
#include "gpelab/experiments.hpp"
#include "gpelab/theory.hpp"

namespace {

using gpelab::cli::ExperimentConfig;
using gpelab::cli::format_double;

std::string fmt_cplx(gpelab::theory::cplx z) {
  return format_double(z.real()) + " + " + format_double(z.imag()) + "i";
}

// Deferred flag application: values land in the config only when the flag
// was actually given, after any --config file has been loaded.
struct SubSetup {
  CLI::App* sub = nullptr;
  std::shared_ptr<std::string> config_path = std::make_shared<std::string>();
  std::vector<std::function<void(ExperimentConfig&)>> appliers;

  explicit SubSetup(CLI::App* s) : sub(s) {
    sub->add_option("--config", *config_path,
                    "config file; explicit flags override its values");
  }

  template <class T, class Apply>
  void add(const std::string& name, const std::string& desc, Apply apply) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = sub->add_option(name, *holder, desc);
    if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
    appliers.push_back([opt, holder, apply](ExperimentConfig& cfg) {
      if (opt->count() > 0) apply(cfg, *holder);
    });
  }

  template <class Apply>
  void add_flag(const std::string& name, const std::string& desc, Apply apply) {
    auto holder = std::make_shared<bool>(false);
    CLI::Option* opt = sub->add_flag(name, *holder, desc);
    appliers.push_back([opt, holder, apply](ExperimentConfig& cfg) {
      if (opt->count() > 0) apply(cfg, *holder);
    });
  }

  ExperimentConfig make_config(const std::string& kind) const {
    ExperimentConfig cfg;
    if (!config_path->empty()) cfg = gpelab::cli::load_config(*config_path);
    for (const auto& apply : appliers) apply(cfg);
    cfg.experiment.kind = kind;
    return cfg;
  }
};

void add_experiment_options(SubSetup& s) {
  s.add<std::string>("--out-dir", "output root directory",
                     [](auto& c, const auto& v) { c.experiment.out_dir = v; });
  s.add<std::string>("--label", "run directory label instead of a timestamp",
                     [](auto& c, const auto& v) { c.experiment.label = v; });
}

void add_physics_options(SubSetup& s) {
  s.add<double>("--q", "impurity strength",
                [](auto& c, double v) { c.physics.q = v; });
  s.add<double>("--v", "incoming velocity",
                [](auto& c, double v) { c.physics.v = v; });
  s.add<double>("--x0", "initial center (negative)",
                [](auto& c, double v) { c.physics.x0 = v; });
  s.add<double>("--amplitude", "initial amplitude",
                [](auto& c, double v) { c.physics.amplitude = v; });
  s.add<double>("--phase", "initial carrier phase",
                [](auto& c, double v) { c.physics.phase = v; });
}

void add_mesh_options(SubSetup& s) {
  s.add<double>("--R", "half-width of the domain (0 = auto)",
                [](auto& c, double v) { c.mesh.R = v; });
  s.add<double>("--h-out", "spacing outside the refinement window",
                [](auto& c, double v) { c.mesh.h_out = v; });
  s.add<double>("--h-in", "spacing inside |x| < 1/2 (0 = h_out/refine_ratio)",
                [](auto& c, double v) { c.mesh.h_in = v; });
  s.add<double>("--refine-ratio", "h_out / h_in when h_in is automatic",
                [](auto& c, double v) { c.mesh.refine_ratio = v; });
}

void add_time_options(SubSetup& s) {
  s.add<double>("--dt", "time step (0 = auto)",
                [](auto& c, double v) { c.time.dt = v; });
  s.add<double>("--t-final", "final time (0 = auto)",
                [](auto& c, double v) { c.time.t_final = v; });
  s.add<double>("--t-post", "post-interaction time when t_final is automatic",
                [](auto& c, double v) { c.time.t_post = v; });
  s.add<int>("--iterations", "fixed-point sweeps per step",
             [](auto& c, int v) { c.time.iterations = v; });
  s.add_flag("--linear", "drop the cubic term",
             [](auto& c, bool v) { c.time.nonlinear = !v; });
  s.add<std::string>("--cubic-rule", "cubic quadrature: nodal or exact",
                     [](auto& c, const auto& v) { c.time.cubic_rule = v; });
  s.add_flag("--residual-stop", "stop sweeps early below 1e-12",
             [](auto& c, bool v) { c.time.residual_stop = v; });
  s.add<double>("--mass-drift-tol", "relative mass drift that aborts the run",
                [](auto& c, double v) { c.time.mass_drift_tol = v; });
}

void add_output_options(SubSetup& s) {
  s.add<int>("--sample-stride", "steps between samples",
             [](auto& c, int v) { c.output.sample_stride = v; });
  s.add<double>("--snapshot-interval", "time between snapshots (0 = none)",
                [](auto& c, double v) { c.output.snapshot_interval = v; });
  s.add<double>("--stabilize-window", "trailing averaging window (0 = auto)",
                [](auto& c, double v) { c.output.stabilize_window = v; });
  s.add<double>("--stabilize-tol", "stabilization fluctuation tolerance",
                [](auto& c, double v) { c.output.stabilize_tol = v; });
  s.add_flag("--no-plot", "skip plot scripts",
             [](auto& c, bool v) { c.output.emit_plot_script = !v; });
  s.add_flag("--no-series", "skip per-run series in sweeps",
             [](auto& c, bool v) { c.output.keep_series = !v; });
}

void print_scatter(const gpelab::cli::ScatterOutcome& out) {
  std::cout << "run dir: " << out.run_dir.string() << "\n";
  std::cout << "final: T = " << format_double(out.final_partition.transmitted)
            << ", R = " << format_double(out.final_partition.reflected)
            << ", B = " << format_double(out.final_partition.trapped) << "\n";
  auto limit = [](const std::optional<double>& x) {
    return x ? format_double(*x) : std::string("not stabilized");
  };
  std::cout << "stabilized: T = " << limit(out.transmitted_limit)
            << ", R = " << limit(out.reflected_limit)
            << ", B = " << limit(out.trapped_limit) << "\n";
  std::cout << "mass drift: " << format_double(out.mass_drift) << "\n";
  if (out.min_profile_distance == out.min_profile_distance)
    std::cout << "min profile distance: "
              << format_double(out.min_profile_distance) << " at t = "
              << format_double(out.min_distance_time) << "\n";
  for (const auto& w : out.warnings) std::cout << "warning: " << w << "\n";
}

int run_theory(const ExperimentConfig& cfg, double alpha, double lambda) {
  namespace th = gpelab::theory;
  th::PhysParams params{cfg.physics.q, cfg.physics.v, cfg.physics.x0,
                        cfg.physics.amplitude, cfg.physics.phase};
  if (params.amplitude != 1.0) {
    params = th::rescale_to_unit_amplitude(params);
    std::cout << "rescaled to unit amplitude: q = " << format_double(params.q)
              << ", v = " << format_double(params.v)
              << ", x0 = " << format_double(params.x0) << "\n";
  }
  const auto sc = th::delta_scattering(params.q, params.v);
  std::cout << "t = " << fmt_cplx(sc.t) << "\n";
  std::cout << "r = " << fmt_cplx(sc.r) << "\n";
  std::cout << "transmission rate = "
            << format_double(th::quantum_transmission_rate(params.q, params.v))
            << "\n";
  std::cout << "transmitted threshold v = "
            << format_double(th::transmitted_threshold_velocity(params.q))
            << ", reflected threshold v = "
            << format_double(th::reflected_threshold_velocity(params.q)) << "\n";
  const auto pred = th::split_prediction(params);
  std::cout << "transmitted soliton: amplitude = "
            << format_double(pred.transmitted_amplitude);
  if (pred.transmitted_phase)
    std::cout << ", phase = " << format_double(*pred.transmitted_phase);
  std::cout << "\n";
  std::cout << "reflected soliton: amplitude = "
            << format_double(pred.reflected_amplitude);
  if (pred.reflected_phase)
    std::cout << ", phase = " << format_double(*pred.reflected_phase);
  std::cout << "\n";
  if (alpha > 0.0) {
    const auto asym = th::free_resolution_asymptote(alpha);
    std::cout << "free resolution of " << format_double(alpha)
              << "*sech: amplitude = " << format_double(asym.amplitude);
    if (asym.phase) std::cout << ", phase = " << format_double(*asym.phase);
    std::cout << "\n";
  }
  if (lambda > 0.0) {
    if (params.q >= 0.0)
      throw std::invalid_argument("--lambda needs an attractive impurity q < 0");
    std::cout << "bound state mass at lambda = " << format_double(lambda)
              << ": " << format_double(2.0 * (lambda + params.q)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soliton scattering on a point impurity: finite element runs "
               "and closed-form predictions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gpelab 0.1.0");

  int exit_code = 0;

  auto scatter = SubSetup(app.add_subcommand(
      "scatter", "evolve one soliton-impurity collision"));
  add_experiment_options(scatter);
  add_physics_options(scatter);
  add_mesh_options(scatter);
  add_time_options(scatter);
  add_output_options(scatter);
  scatter.sub->callback([&] {
    const auto out = gpelab::cli::run_scatter(scatter.make_config("scatter"));
    print_scatter(out);
  });

  auto sweep = SubSetup(
      app.add_subcommand("sweep", "scatter runs over an (alpha, v) grid with q = alpha v"));
  add_experiment_options(sweep);
  add_physics_options(sweep);
  add_mesh_options(sweep);
  add_time_options(sweep);
  add_output_options(sweep);
  sweep.add<std::vector<double>>(
      "--alphas", "impurity-to-velocity ratios",
      [](auto& c, const auto& v) { c.sweep.alphas = v; });
  sweep.add<std::vector<double>>(
      "--velocities", "incoming velocities",
      [](auto& c, const auto& v) { c.sweep.velocities = v; });
  sweep.add<int>("--workers", "parallel runs (0 = hardware)",
                 [](auto& c, int v) { c.sweep.workers = v; });
  sweep.sub->callback([&] {
    const auto out = gpelab::cli::run_sweep(sweep.make_config("sweep"));
    std::cout << "run dir: " << out.run_dir.string() << "\n";
    std::cout << out.rows.size() << " rows -> " << out.csv_path.string() << "\n";
    for (const auto& f : out.failures) std::cout << "failed: " << f << "\n";
    if (out.rows.empty()) exit_code = 1;
  });

  auto resolve = SubSetup(app.add_subcommand(
      "resolve", "measure outgoing soliton amplitudes by free-flow resolution"));
  add_experiment_options(resolve);
  add_physics_options(resolve);
  add_mesh_options(resolve);
  add_time_options(resolve);
  add_output_options(resolve);
  resolve.add<double>("--R-big", "resolution domain half-width (0 = 4R)",
                      [](auto& c, double v) { c.resolve.R_big = v; });
  resolve.add<int>("--n-big", "resolution mesh elements (0 = auto)",
                   [](auto& c, int v) { c.resolve.n_big = v; });
  resolve.add<double>("--h-big", "resolution spacing when n_big is automatic",
                      [](auto& c, double v) { c.resolve.h_big = v; });
  resolve.add<double>("--resolve-dt", "resolution time step",
                      [](auto& c, double v) { c.resolve.dt = v; });
  resolve.add<double>("--t-resolve", "resolution evolution length",
                      [](auto& c, double v) { c.resolve.t_resolve = v; });
  resolve.add<std::string>("--side",
                           "resolve both, transmitted or reflected only",
                           [](auto& c, const std::string& v) {
                             c.resolve.side = v;
                           });
  resolve.add<double>("--search-forward",
                      "profile-distance search span past the interaction time",
                      [](auto& c, double v) { c.resolve.search_forward = v; });
  resolve.add<double>("--deviation-span",
                      "perturbed-vs-free comparison length",
                      [](auto& c, double v) { c.resolve.deviation_span = v; });
  resolve.sub->callback([&] {
    const auto out = gpelab::cli::run_resolve(resolve.make_config("resolve"));
    std::cout << "run dir: " << out.run_dir.string() << "\n";
    std::cout << "min profile distance: "
              << format_double(out.scatter.min_profile_distance) << " at t = "
              << format_double(out.scatter.min_distance_time) << "\n";
    std::cout << "deviation vs free flow: "
              << format_double(out.deviation_vs_free)
              << " (relative " << format_double(out.deviation_rel) << ")\n";
    for (const auto* side : {&out.transmitted, &out.reflected}) {
      const char* name = side->side == gpelab::measure::Side::transmitted
                             ? "transmitted"
                             : "reflected";
      if (side->result) {
        std::cout << name << ": theory = "
                  << format_double(side->theory_amplitude) << ", measured = "
                  << format_double(side->result->measured_amplitude)
                  << (side->result->stabilized ? "" : " (not stabilized)")
                  << "\n";
      } else {
        std::cout << name << ": skipped, " << side->skip_reason << "\n";
      }
    }
  });

  auto free_res = SubSetup(app.add_subcommand(
      "free-resolution", "long free evolution of alpha*sech initial data"));
  add_experiment_options(free_res);
  add_mesh_options(free_res);
  add_time_options(free_res);
  add_output_options(free_res);
  free_res.add<double>("--alpha", "initial amplitude of alpha*sech(x)",
                       [](auto& c, double v) { c.free.alpha = v; });
  free_res.sub->callback([&] {
    const auto out =
        gpelab::cli::run_free_resolution(free_res.make_config("free-resolution"));
    std::cout << "run dir: " << out.run_dir.string() << "\n";
    std::cout << "theory amplitude: " << format_double(out.asymptote.amplitude)
              << ", averaged |u(0,t)|: "
              << format_double(out.averaged_amplitude)
              << ", averaged sup: " << format_double(out.averaged_sup) << "\n";
    if (out.averaged_phase_deviation)
      std::cout << "averaged phase deviation: "
                << format_double(*out.averaged_phase_deviation) << "\n";
    if (out.decay_exponent)
      std::cout << "decay exponent: " << format_double(*out.decay_exponent)
                << "\n";
    std::cout << "mass drift: " << format_double(out.mass_drift) << "\n";
  });

  auto linear = SubSetup(app.add_subcommand(
      "linear-check", "wave-packet splitting of the linear impurity flow"));
  add_experiment_options(linear);
  add_physics_options(linear);
  add_mesh_options(linear);
  add_time_options(linear);
  add_output_options(linear);
  linear.add<std::vector<double>>(
      "--velocities", "carrier velocities",
      [](auto& c, const auto& v) { c.linear.velocities = v; });
  linear.add<double>("--support-left", "bump support left end",
                     [](auto& c, double v) { c.linear.support_left = v; });
  linear.add<double>("--support-right", "bump support right end",
                     [](auto& c, double v) { c.linear.support_right = v; });
  linear.sub->callback([&] {
    const auto out =
        gpelab::cli::run_linear_check(linear.make_config("linear-check"));
    std::cout << "run dir: " << out.run_dir.string() << "\n";
    for (const auto& r : out.rows)
      std::cout << "v = " << format_double(r.v) << ": split error = "
                << format_double(r.max_split_error) << " (bound "
                << format_double(r.error_bound) << "), transmitted deviation = "
                << format_double(r.transmitted_deviation) << "\n";
    for (std::size_t k = 0; k < out.deviation_ratios.size(); ++k)
      std::cout << "deviation ratio " << k << ": "
                << format_double(out.deviation_ratios[k]) << "\n";
  });

  auto theory_setup = SubSetup(app.add_subcommand(
      "theory", "print the closed-form predictions for given parameters"));
  add_physics_options(theory_setup);
  auto alpha_holder = std::make_shared<double>(0.0);
  theory_setup.sub->add_option("--alpha", *alpha_holder,
                               "also print the free resolution of alpha*sech");
  auto lambda_holder = std::make_shared<double>(0.0);
  theory_setup.sub->add_option(
      "--lambda", *lambda_holder,
      "also print the pinned bound-state mass at this lambda");
  theory_setup.sub->callback([&] {
    exit_code = run_theory(theory_setup.make_config("theory"), *alpha_holder,
                           *lambda_holder);
  });

  auto fit = SubSetup(app.add_subcommand(
      "fit", "fit transmission and trapping laws to a sweep.csv"));
  add_experiment_options(fit);
  fit.add<std::string>("--input", "sweep.csv to fit",
                       [](auto& c, const auto& v) { c.fit.input = v; });
  fit.sub->callback([&] {
    const auto out = gpelab::cli::run_fit(fit.make_config("fit"));
    std::cout << "run dir: " << out.run_dir.string() << "\n";
    for (const auto& row : out.rows)
      std::cout << "alpha = " << format_double(row.alpha) << " " << row.model
                << ": coefficient = " << format_double(row.fit.coefficient)
                << ", exponent = " << format_double(row.fit.exponent)
                << ", residual = " << format_double(row.fit.residual) << " ("
                << row.fit.points_used.size() << " points)\n";
    for (const auto& n : out.notes) std::cout << "note: " << n << "\n";
    if (out.rows.empty()) exit_code = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
