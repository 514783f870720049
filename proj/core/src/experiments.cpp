#include "gpelab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>

#include "gpelab/assembly.hpp"
#include "gpelab/csv.hpp"
#include "gpelab/errors.hpp"
#include "gpelab/quadrature.hpp"
#include "gpelab/snapshot.hpp"

namespace gpelab::cli {
namespace {

namespace fs = std::filesystem;
using fem::ComplexField;
using fem::cplx;

constexpr const char* kOutDirEnv = "GPELAB_OUT_DIR";
// Same floor as the exponential fit; sweep points at or below it carry no
// trapped-mass signal and are dropped before fitting.
constexpr double kTrappedFloor = 8.315287191035679e-7;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &utc);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

stepper::CubicRule parse_rule(const std::string& name) {
  if (name == "nodal") return stepper::CubicRule::nodal;
  if (name == "exact") return stepper::CubicRule::exact;
  throw std::invalid_argument("unknown cubic rule '" + name + "'");
}

stepper::StepConfig step_config_from(const ExperimentConfig& cfg, double dt) {
  stepper::StepConfig sc;
  sc.dt = dt;
  sc.q = cfg.physics.q;
  sc.iterations = cfg.time.iterations;
  sc.nonlinear = cfg.time.nonlinear;
  sc.cubic_rule = parse_rule(cfg.time.cubic_rule);
  sc.residual_stop = cfg.time.residual_stop;
  sc.mass_drift_tol = cfg.time.mass_drift_tol;
  return sc;
}

theory::PhysParams phys_params(const ExperimentConfig& cfg) {
  return {cfg.physics.q, cfg.physics.v, cfg.physics.x0, cfg.physics.amplitude,
          cfg.physics.phase};
}

// Time window scanned for the post-interaction profile-distance minimum.
std::pair<double, double> search_window(const ExperimentConfig& cfg,
                                        const DerivedParams& d) {
  const double lo = 0.8 * d.t_interaction;
  const double hi =
      std::min(d.t_interaction + cfg.resolve.search_forward, d.t_final);
  return {lo, hi};
}

double field_norm(const ComplexField& u) {
  const auto& nodes = u.mesh->nodes();
  return std::sqrt(measure::mass_in_region(u, nodes.front(), nodes.back()));
}

std::size_t series_index(const stepper::Trajectory& traj,
                         const std::string& name) {
  for (std::size_t i = 0; i < traj.series_names.size(); ++i)
    if (traj.series_names[i] == name) return i;
  throw std::logic_error("missing series " + name);
}

ScatterOutcome scatter_compute(const ExperimentConfig& cfg,
                               bool keep_min_state) {
  if (cfg.physics.amplitude <= 0.0)
    throw std::invalid_argument("scatter requires a positive amplitude");
  if (cfg.physics.x0 >= 0.0)
    throw std::invalid_argument("scatter requires x0 < 0");
  const DerivedParams d = derive_scatter_params(cfg);
  const theory::PhysParams params = phys_params(cfg);

  auto mesh = fem::Mesh1D::build(d.R, d.outer_elems, d.inner_elems);
  auto u0 = fem::project(
      mesh, [&](double x) { return theory::soliton_exact(params, x, 0.0); });

  stepper::Stepper stepper(mesh, step_config_from(cfg, d.dt));

  // Shared per-sample partition so the three mass observers compute it once.
  struct PartitionCache {
    double time = kNaN;
    measure::MassPartition part;
  };
  auto cache = std::make_shared<PartitionCache>();
  auto partition_at = [cache](double t,
                              const ComplexField& u) -> const measure::MassPartition& {
    if (!(cache->time == t)) {
      cache->part = measure::mass_partition(u, t);
      cache->time = t;
    }
    return cache->part;
  };

  const auto& nodes = mesh->nodes();
  const double edge_left = mesh->node(mesh->lower_index(nodes.front() + 5.0));
  const double edge_right = mesh->node(mesh->lower_index(nodes.back() - 5.0));

  const auto [win_lo, win_hi] = search_window(cfg, d);
  struct MinTracker {
    double best = std::numeric_limits<double>::infinity();
    double best_t = kNaN;
    std::vector<cplx> values;
  } tracker;
  const bool track_profile = cfg.physics.amplitude == 1.0;

  stepper::EvolveOptions opts;
  opts.sample_stride = std::max(1, cfg.output.sample_stride);
  opts.snapshot_interval = cfg.output.snapshot_interval;
  // Region masses are reported as fractions of the current discrete mass so
  // they always sum to one and the projection deficit of the oscillatory
  // carrier (relative size (vh)^2/6) cancels instead of biasing T^s.
  opts.observers.emplace_back("transmitted", [&](double t, const ComplexField& u) {
    const auto& p = partition_at(t, u);
    return p.transmitted / (p.transmitted + p.reflected + p.trapped);
  });
  opts.observers.emplace_back("reflected", [&](double t, const ComplexField& u) {
    const auto& p = partition_at(t, u);
    return p.reflected / (p.transmitted + p.reflected + p.trapped);
  });
  opts.observers.emplace_back("trapped", [&](double t, const ComplexField& u) {
    const auto& p = partition_at(t, u);
    return p.trapped / (p.transmitted + p.reflected + p.trapped);
  });
  opts.observers.emplace_back("edge_mass", [&](double, const ComplexField& u) {
    return measure::mass_in_region(u, nodes.front(), edge_left) +
           measure::mass_in_region(u, edge_right, nodes.back());
  });
  if (track_profile) {
    opts.observers.emplace_back(
        "profile_distance", [&, win_lo = win_lo, win_hi = win_hi](
                                double t, const ComplexField& u) {
          const double val = measure::profile_distance(u, params, t);
          if (t >= win_lo - 1e-12 && t <= win_hi + 1e-12 && val < tracker.best) {
            tracker.best = val;
            tracker.best_t = t;
            if (keep_min_state) tracker.values = u.values;
          }
          return val;
        });
  }

  ScatterOutcome out;
  out.derived = d;
  out.trajectory = stepper.evolve(u0, d.t_final, opts);
  const auto& traj = out.trajectory;
  const auto& times = traj.times;

  out.final_partition = measure::mass_partition(traj.final_state, times.back());
  const double final_half = out.final_partition.transmitted +
                            out.final_partition.reflected +
                            out.final_partition.trapped;
  out.final_partition.transmitted /= final_half;
  out.final_partition.reflected /= final_half;
  out.final_partition.trapped /= final_half;

  const double window = d.stabilize_window;
  const double tol = cfg.output.stabilize_tol;
  const auto& ts = traj.series[series_index(traj, "transmitted")];
  const auto& rs = traj.series[series_index(traj, "reflected")];
  const auto& bs = traj.series[series_index(traj, "trapped")];
  out.transmitted_limit = measure::stabilized_limit(times, ts, window, tol);
  out.reflected_limit = measure::stabilized_limit(times, rs, window, tol);
  out.trapped_limit = measure::stabilized_limit(times, bs, window, tol);
  out.transmitted_mean = measure::window_mean(times, ts, window);
  out.reflected_mean = measure::window_mean(times, rs, window);
  out.trapped_mean = measure::window_mean(times, bs, window);
  if (!out.transmitted_limit || !out.reflected_limit || !out.trapped_limit)
    out.warnings.push_back("region masses not stabilized within the trailing window");

  const double mass0 = traj.mass.front();
  double drift = 0.0;
  for (double m : traj.mass) drift = std::max(drift, std::abs(m - mass0));
  out.mass_drift = mass0 > 0.0 ? drift / mass0 : 0.0;

  const auto& edge = traj.series[series_index(traj, "edge_mass")];
  double edge_max = 0.0;
  for (double e : edge) edge_max = std::max(edge_max, e);
  out.max_edge_mass_fraction = mass0 > 0.0 ? edge_max / mass0 : 0.0;
  if (out.max_edge_mass_fraction > 1e-8)
    out.warnings.push_back(
        "mass near the artificial boundary exceeds 1e-8 of the total; "
        "enlarge R");

  if (track_profile) {
    out.min_profile_distance = tracker.best;
    out.min_distance_time = tracker.best_t;
    if (keep_min_state && !tracker.values.empty())
      out.state_at_min = ComplexField{mesh, std::move(tracker.values)};
  } else {
    out.min_profile_distance = kNaN;
    out.min_distance_time = kNaN;
  }
  return out;
}

std::string scatter_series_csv(const stepper::Trajectory& traj) {
  const auto& ts = traj.series[series_index(traj, "transmitted")];
  const auto& rs = traj.series[series_index(traj, "reflected")];
  const auto& bs = traj.series[series_index(traj, "trapped")];
  const std::vector<double>* prof = nullptr;
  for (std::size_t i = 0; i < traj.series_names.size(); ++i)
    if (traj.series_names[i] == "profile_distance") prof = &traj.series[i];

  std::string text =
      "time,transmitted,reflected,trapped,mass,abs_u0,arg_u0,profile_distance\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    text += format_double(traj.times[k]);
    text += ',';
    text += format_double(ts[k]);
    text += ',';
    text += format_double(rs[k]);
    text += ',';
    text += format_double(bs[k]);
    text += ',';
    text += format_double(traj.mass[k]);
    text += ',';
    text += format_double(std::abs(traj.center[k]));
    text += ',';
    text += format_double(std::arg(traj.center[k]));
    text += ',';
    text += format_double(prof ? (*prof)[k] : kNaN);
    text += '\n';
  }
  return text;
}

SnapshotHeader snapshot_header(const ExperimentConfig& cfg,
                               const DerivedParams& d, double t) {
  SnapshotHeader h;
  h.q = cfg.physics.q;
  h.v = cfg.physics.v;
  h.x0 = cfg.physics.x0;
  h.t = t;
  h.R = d.R;
  return h;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("not stabilized");
}

void write_scatter_artifacts(const fs::path& dir, const ExperimentConfig& cfg,
                             const ScatterOutcome& out) {
  write_text(dir / "series.csv", scatter_series_csv(out.trajectory));

  const auto& traj = out.trajectory;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
    write_snapshot(dir / snapshot_filename(traj.snapshot_times[i]),
                   traj.snapshots[i],
                   snapshot_header(cfg, out.derived, traj.snapshot_times[i]));
  const double t_end = traj.times.back();
  write_snapshot(dir / snapshot_filename(t_end), traj.final_state,
                 snapshot_header(cfg, out.derived, t_end));

  std::string s;
  s += "kind = scatter\n";
  s += "q = " + format_double(cfg.physics.q) + "\n";
  s += "v = " + format_double(cfg.physics.v) + "\n";
  s += "x0 = " + format_double(cfg.physics.x0) + "\n";
  s += "amplitude = " + format_double(cfg.physics.amplitude) + "\n";
  s += "R = " + format_double(out.derived.R) + "\n";
  s += "dt = " + format_double(out.derived.dt) + "\n";
  s += "t_final = " + format_double(out.derived.t_final) + "\n";
  s += "interaction_time = " + format_double(out.derived.t_interaction) + "\n";
  s += "transmitted_final = " + format_double(out.final_partition.transmitted) + "\n";
  s += "reflected_final = " + format_double(out.final_partition.reflected) + "\n";
  s += "trapped_final = " + format_double(out.final_partition.trapped) + "\n";
  s += "transmitted_limit = " + opt_str(out.transmitted_limit) + "\n";
  s += "reflected_limit = " + opt_str(out.reflected_limit) + "\n";
  s += "trapped_limit = " + opt_str(out.trapped_limit) + "\n";
  s += "transmitted_mean = " + format_double(out.transmitted_mean) + "\n";
  s += "reflected_mean = " + format_double(out.reflected_mean) + "\n";
  s += "trapped_mean = " + format_double(out.trapped_mean) + "\n";
  s += "mass_drift = " + format_double(out.mass_drift) + "\n";
  s += "min_profile_distance = " + format_double(out.min_profile_distance) +
       " at t = " + format_double(out.min_distance_time) + "\n";
  s += "max_edge_mass_fraction = " + format_double(out.max_edge_mass_fraction) + "\n";
  for (const auto& w : out.warnings) s += "warning: " + w + "\n";
  write_text(dir / "summary.txt", s);

  if (cfg.output.emit_plot_script) {
    write_text(dir / "plot.gp",
               "set datafile separator ','\n"
               "set key autotitle columnhead\n"
               "set xlabel 't'\n"
               "set ylabel 'half mass'\n"
               "plot 'series.csv' using 1:2 with lines, \\\n"
               "     'series.csv' using 1:3 with lines, \\\n"
               "     'series.csv' using 1:4 with lines\n");
  }
}

}  // namespace

fs::path make_run_dir(const ExperimentConfig& cfg, const std::string& kind) {
  const char* env = std::getenv(kOutDirEnv);
  const fs::path root = (env != nullptr && *env != '\0')
                            ? fs::path(env)
                            : fs::path(cfg.experiment.out_dir);
  const std::string base =
      kind + "-" + (cfg.experiment.label.empty() ? timestamp_utc()
                                                 : cfg.experiment.label);
  fs::path dir = root / base;
  for (int suffix = 2; fs::exists(dir); ++suffix)
    dir = root / (base + "-" + std::to_string(suffix));
  fs::create_directories(dir);
  write_text(dir / "config.ini", render_config(cfg));
  return dir;
}

DerivedParams derive_scatter_params(const ExperimentConfig& cfg) {
  if (cfg.physics.v <= 0.0)
    throw std::invalid_argument("scatter requires v > 0");
  if (cfg.mesh.h_out <= 0.0)
    throw std::invalid_argument("h_out must be positive");

  DerivedParams d;
  d.t_interaction = std::abs(cfg.physics.x0) / cfg.physics.v;
  d.t_final = cfg.time.t_final > 0.0 ? cfg.time.t_final
                                     : d.t_interaction + cfg.time.t_post;
  const double R_req =
      cfg.mesh.R > 0.0
          ? cfg.mesh.R
          : std::abs(cfg.physics.x0) + 1.05 * cfg.physics.v * d.t_final + 12.0;
  if (R_req <= 1.0) throw std::invalid_argument("R must exceed 1");
  d.outer_elems = std::max(
      2, static_cast<int>(std::ceil((R_req - 0.5) / cfg.mesh.h_out - 1e-9)));
  d.R = 0.5 + d.outer_elems * cfg.mesh.h_out;

  const double ratio = std::max(1.0, cfg.mesh.refine_ratio);
  const double h_in =
      cfg.mesh.h_in > 0.0 ? cfg.mesh.h_in : cfg.mesh.h_out / ratio;
  d.inner_elems =
      std::max(2, static_cast<int>(std::ceil(0.5 / h_in - 1e-9)));

  d.dt = cfg.time.dt > 0.0
             ? cfg.time.dt
             : std::min(0.8 * cfg.mesh.h_out / (2.0 * cfg.physics.v), 2e-3);
  d.stabilize_window =
      cfg.output.stabilize_window > 0.0
          ? cfg.output.stabilize_window
          : std::max(2.0, (d.t_final - d.t_interaction) / 4.0);
  return d;
}

ScatterOutcome run_scatter(const ExperimentConfig& cfg, bool keep_min_state) {
  ScatterOutcome out = scatter_compute(cfg, keep_min_state);
  out.run_dir = make_run_dir(cfg, "scatter");
  write_scatter_artifacts(out.run_dir, cfg, out);
  return out;
}

SweepOutcome run_sweep(const ExperimentConfig& cfg) {
  std::vector<double> alphas = cfg.sweep.alphas;
  std::vector<double> velocities = cfg.sweep.velocities;
  if (alphas.empty() || velocities.empty())
    throw std::invalid_argument("sweep requires alphas and velocities");
  std::sort(alphas.begin(), alphas.end());
  std::sort(velocities.begin(), velocities.end());

  SweepOutcome out;
  out.run_dir = make_run_dir(cfg, "sweep");
  const fs::path runs_dir = out.run_dir / "runs";
  if (cfg.output.keep_series) fs::create_directories(runs_dir);

  struct Job {
    double alpha = 0.0;
    double v = 0.0;
    ExperimentConfig cfg;
  };
  std::vector<Job> jobs;
  for (double a : alphas)
    for (double v : velocities) {
      Job job{a, v, cfg};
      job.cfg.physics.q = a * v;
      job.cfg.physics.v = v;
      jobs.push_back(std::move(job));
    }

  std::vector<std::optional<SweepRow>> rows(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size();
         i = next.fetch_add(1)) {
      const Job& job = jobs[i];
      const std::string tag = "alpha=" + format_double(job.alpha) +
                              ",v=" + format_double(job.v);
      try {
        const ScatterOutcome sc = scatter_compute(job.cfg, false);
        SweepRow row;
        row.alpha = job.alpha;
        row.v = job.v;
        row.q = job.cfg.physics.q;
        row.transmitted = sc.transmitted_limit.value_or(sc.transmitted_mean);
        row.reflected = sc.reflected_limit.value_or(sc.reflected_mean);
        row.trapped = sc.trapped_limit.value_or(sc.trapped_mean);
        row.mass_drift = sc.mass_drift;
        row.stabilized =
            sc.transmitted_limit && sc.reflected_limit && sc.trapped_limit;
        rows[i] = row;
        if (cfg.output.keep_series) {
          const fs::path job_dir =
              runs_dir / ("alpha" + format_double(job.alpha) + "_v" +
                          format_double(job.v));
          fs::create_directories(job_dir);
          write_text(job_dir / "config.ini", render_config(job.cfg));
          write_text(job_dir / "series.csv", scatter_series_csv(sc.trajectory));
        }
      } catch (const std::exception& e) {
        errors[i] = tag + ": " + e.what();
      }
    }
  };

  std::size_t workers =
      cfg.sweep.workers > 0
          ? static_cast<std::size_t>(cfg.sweep.workers)
          : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::string csv = "alpha,v,transmitted,reflected,trapped\n";
  std::string details = "alpha,v,q,mass_drift,stabilized\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!rows[i]) {
      out.failures.push_back(errors[i]);
      continue;
    }
    const SweepRow& r = *rows[i];
    out.rows.push_back(r);
    csv += format_double(r.alpha) + "," + format_double(r.v) + "," +
           format_double(r.transmitted) + "," + format_double(r.reflected) +
           "," + format_double(r.trapped) + "\n";
    details += format_double(r.alpha) + "," + format_double(r.v) + "," +
               format_double(r.q) + "," + format_double(r.mass_drift) + "," +
               (r.stabilized ? "1" : "0") + "\n";
  }
  out.csv_path = out.run_dir / "sweep.csv";
  write_text(out.csv_path, csv);
  write_text(out.run_dir / "details.csv", details);
  if (!out.failures.empty()) {
    std::string log;
    for (const auto& f : out.failures) log += f + "\n";
    write_text(out.run_dir / "failures.txt", log);
  }

  if (cfg.output.emit_plot_script) {
    std::string trans =
        "set datafile separator ','\n"
        "set logscale xy\n"
        "set xlabel 'v'\n"
        "set ylabel 'transmitted deficit'\n"
        "plot \\\n";
    std::string trapped =
        "set datafile separator ','\n"
        "set logscale y\n"
        "set xlabel 'v'\n"
        "set ylabel 'trapped mass'\n"
        "plot \\\n";
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const std::string a = format_double(alphas[k]);
      const std::string asym =
          format_double(1.0 / (1.0 + alphas[k] * alphas[k]));
      const std::string sep = k + 1 < alphas.size() ? ", \\\n" : "\n";
      trans += "  'sweep.csv' using (abs($1-(" + a + "))<1e-12?$2:1/0):(" +
               asym + "-$3) with points title 'alpha=" + a + "'" + sep;
      trapped += "  'sweep.csv' using (abs($1-(" + a +
                 "))<1e-12?$2:1/0):5 with points title 'alpha=" + a + "'" + sep;
    }
    write_text(out.run_dir / "plot_transmission.gp", trans);
    write_text(out.run_dir / "plot_trapped.gp", trapped);
  }
  return out;
}

ResolveOutcome run_resolve(const ExperimentConfig& cfg_in) {
  if (cfg_in.physics.amplitude != 1.0)
    throw std::invalid_argument("resolve requires unit amplitude");

  ExperimentConfig cfg = cfg_in;
  if (cfg.time.t_final <= 0.0) {
    // No need to evolve past the profile-distance search window.
    const double t0 = std::abs(cfg.physics.x0) / std::max(cfg.physics.v, 1e-300);
    cfg.time.t_final = t0 + cfg.resolve.search_forward + 0.2;
  }

  ResolveOutcome out;
  out.scatter = scatter_compute(cfg, true);
  const ScatterOutcome& sc = out.scatter;

  const auto [win_lo, win_hi] = search_window(cfg, sc.derived);
  const double sample_gap =
      sc.trajectory.times.size() > 1
          ? sc.trajectory.times[1] - sc.trajectory.times[0]
          : sc.derived.dt;
  if (!sc.state_at_min || !(sc.min_distance_time > win_lo + 0.5 * sample_gap) ||
      !(sc.min_distance_time < win_hi - 0.5 * sample_gap))
    throw NumericalError(
        "profile distance attained no interior minimum in the search window; "
        "widen search_forward");
  const ComplexField& state = *sc.state_at_min;

  out.deviation_vs_free = measure::nls_q_vs_nls_0_deviation(
      state, cfg.resolve.deviation_span, step_config_from(cfg, sc.derived.dt));
  out.deviation_rel = out.deviation_vs_free / field_norm(state);

  out.prediction = theory::split_prediction(phys_params(cfg));

  const double R_big =
      cfg.resolve.R_big > 0.0 ? cfg.resolve.R_big : 4.0 * sc.derived.R;
  const int n_big = cfg.resolve.n_big > 0
                        ? cfg.resolve.n_big
                        : static_cast<int>(
                              std::llround(2.0 * R_big / cfg.resolve.h_big));
  stepper::StepConfig rc = step_config_from(cfg, cfg.resolve.dt);
  rc.q = 0.0;
  rc.nonlinear = true;

  if (cfg.resolve.side != "both" && cfg.resolve.side != "transmitted" &&
      cfg.resolve.side != "reflected")
    throw std::invalid_argument("unknown resolve side '" + cfg.resolve.side +
                                "'");

  auto resolve_side = [&](measure::Side side, double a_theory) {
    ResolveSide rs;
    rs.side = side;
    rs.theory_amplitude = a_theory;
    const std::string name =
        side == measure::Side::transmitted ? "transmitted" : "reflected";
    if (cfg.resolve.side != "both" && cfg.resolve.side != name) {
      rs.skipped = true;
      rs.skip_reason = "disabled by resolve side = " + cfg.resolve.side;
      return rs;
    }
    if (a_theory <= 0.0) {
      rs.skipped = true;
      rs.skip_reason = "below the soliton threshold, no outgoing soliton predicted";
      return rs;
    }
    ComplexField piece;
    try {
      piece = measure::truncate_reembed(state, side, cfg.physics.v, R_big, n_big);
    } catch (const NumericalError& e) {
      rs.skipped = true;
      rs.skip_reason = e.what();
      return rs;
    }
    rs.result = measure::resolve_amplitude(piece, side, cfg.resolve.t_resolve, rc);
    return rs;
  };
  out.transmitted =
      resolve_side(measure::Side::transmitted, out.prediction.transmitted_amplitude);
  out.reflected =
      resolve_side(measure::Side::reflected, out.prediction.reflected_amplitude);

  out.run_dir = make_run_dir(cfg, "resolve");
  write_text(out.run_dir / "series.csv", scatter_series_csv(sc.trajectory));
  write_snapshot(out.run_dir / snapshot_filename(sc.min_distance_time), state,
                 snapshot_header(cfg, sc.derived, sc.min_distance_time));

  std::string csv =
      "side,theory_amplitude,measured_amplitude,window_begin,window_end,"
      "stabilized,note\n";
  std::string summary;
  summary += "deviation_vs_free = " + format_double(out.deviation_vs_free) + "\n";
  summary += "deviation_rel = " + format_double(out.deviation_rel) + "\n";
  summary += "min_profile_distance = " + format_double(sc.min_profile_distance) +
             " at t = " + format_double(sc.min_distance_time) + "\n";
  for (const ResolveSide* rs : {&out.transmitted, &out.reflected}) {
    const std::string name =
        rs->side == measure::Side::transmitted ? "transmitted" : "reflected";
    csv += name + "," + format_double(rs->theory_amplitude) + ",";
    if (rs->result) {
      const auto& r = *rs->result;
      csv += format_double(r.measured_amplitude) + "," +
             format_double(r.window_begin) + "," + format_double(r.window_end) +
             "," + (r.stabilized ? "1" : "0") + ",\n";
      summary += name + ": theory = " + format_double(rs->theory_amplitude) +
                 ", measured = " + format_double(r.measured_amplitude) +
                 ", window = [" + format_double(r.window_begin) + ", " +
                 format_double(r.window_end) + "], stabilized = " +
                 (r.stabilized ? "yes" : "no") + "\n";
      std::string series = "time,sup_abs\n";
      for (std::size_t k = 0; k < r.times.size(); ++k)
        series += format_double(r.times[k]) + "," +
                  format_double(r.sup_abs[k]) + "\n";
      write_text(out.run_dir / ("resolve_" + name + ".csv"), series);
    } else {
      csv += "nan,nan,nan,0," + rs->skip_reason + "\n";
      summary += name + ": skipped (" + rs->skip_reason + ")\n";
    }
  }
  write_text(out.run_dir / "resolve.csv", csv);
  write_text(out.run_dir / "summary.txt", summary);

  if (cfg.output.emit_plot_script) {
    std::string gp =
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 't'\n"
        "set ylabel 'sup |u|'\n"
        "plot \\\n";
    bool first = true;
    for (const ResolveSide* rs : {&out.transmitted, &out.reflected}) {
      if (!rs->result) continue;
      const std::string name =
          rs->side == measure::Side::transmitted ? "transmitted" : "reflected";
      if (!first) gp += ", \\\n";
      gp += "  'resolve_" + name + ".csv' using 1:2 with lines";
      first = false;
    }
    gp += "\n";
    if (!first) write_text(out.run_dir / "plot.gp", gp);
  }
  return out;
}

FreeResolutionOutcome run_free_resolution(const ExperimentConfig& cfg) {
  const double alpha = cfg.free.alpha;
  FreeResolutionOutcome out;
  out.asymptote = theory::free_resolution_asymptote(alpha);

  const double h = cfg.mesh.h_out;
  if (h <= 0.0) throw std::invalid_argument("h_out must be positive");
  const double R_req = cfg.mesh.R > 0.0 ? cfg.mesh.R : 300.0;
  const int outer =
      std::max(2, static_cast<int>(std::ceil((R_req - 0.5) / h - 1e-9)));
  const double R = 0.5 + outer * h;
  const int inner = std::max(2, static_cast<int>(std::ceil(0.5 / h - 1e-9)));
  const double dt = cfg.time.dt > 0.0 ? cfg.time.dt : 5e-3;
  const double t_final = cfg.time.t_final > 0.0 ? cfg.time.t_final : 100.0;

  auto mesh = fem::Mesh1D::build(R, outer, inner);
  auto u0 = fem::project(mesh, [alpha](double x) {
    return cplx(alpha / std::cosh(x), 0.0);
  });

  stepper::StepConfig scfg = step_config_from(cfg, dt);
  scfg.q = 0.0;
  scfg.nonlinear = true;
  stepper::Stepper stepper(mesh, scfg);

  const auto& nodes = mesh->nodes();
  const double edge_left = mesh->node(mesh->lower_index(nodes.front() + 1.0));
  const double edge_right = mesh->node(mesh->lower_index(nodes.back() - 1.0));

  stepper::EvolveOptions opts;
  opts.sample_stride = std::max(1, cfg.output.sample_stride);
  opts.snapshot_interval = cfg.output.snapshot_interval;
  opts.observers.emplace_back("sup", [](double, const ComplexField& u) {
    return measure::sup_abs(u);
  });
  opts.observers.emplace_back("edge_mass", [&](double, const ComplexField& u) {
    return measure::mass_in_region(u, nodes.front(), edge_left) +
           measure::mass_in_region(u, edge_right, nodes.back());
  });

  const stepper::Trajectory traj = stepper.evolve(u0, t_final, opts);
  const auto& times = traj.times;

  const auto& edge = traj.series[series_index(traj, "edge_mass")];
  for (double e : edge)
    if (e > 1e-6)
      throw NumericalError(
          "boundary contamination: mass within 1 unit of the ends exceeds "
          "1e-6; enlarge R");

  const double window = cfg.output.stabilize_window > 0.0
                            ? cfg.output.stabilize_window
                            : std::max(2.0, t_final / 4.0);
  std::vector<double> abs_center(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    abs_center[k] = std::abs(traj.center[k]);
  const auto& sup = traj.series[series_index(traj, "sup")];
  out.averaged_amplitude = measure::window_mean(times, abs_center, window);
  out.averaged_sup = measure::window_mean(times, sup, window);

  const double mass0 = traj.mass.front();
  double drift = 0.0;
  for (double m : traj.mass) drift = std::max(drift, std::abs(m - mass0));
  out.mass_drift = mass0 > 0.0 ? drift / mass0 : 0.0;

  std::vector<double> devs;
  if (alpha > 0.5) {
    devs = measure::center_phase_deviation(traj, alpha);
    out.averaged_phase_deviation = measure::window_mean(times, devs, window);
  } else {
    // sup |u| ~ C t^{-p}: fit the tail on log-log axes.
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < times.size(); ++k)
      if (times[k] >= 0.25 * t_final && sup[k] > 0.0) {
        lx.push_back(std::log(times[k]));
        ly.push_back(std::log(sup[k]));
      }
    if (lx.size() >= 3) {
      const fitting::Line line = fitting::least_squares_line(lx, ly);
      out.decay_exponent = -line.slope;
    }
  }

  out.run_dir = make_run_dir(cfg, "free-resolution");
  std::string csv = "time,mass,abs_u0,arg_u0,sup_abs,phase_deviation\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    csv += format_double(times[k]) + "," + format_double(traj.mass[k]) + "," +
           format_double(abs_center[k]) + "," +
           format_double(std::arg(traj.center[k])) + "," +
           format_double(sup[k]) + "," +
           format_double(k < devs.size() ? devs[k] : kNaN) + "\n";
  }
  write_text(out.run_dir / "series.csv", csv);

  std::string s;
  s += "alpha = " + format_double(alpha) + "\n";
  s += "theory_amplitude = " + format_double(out.asymptote.amplitude) + "\n";
  if (out.asymptote.phase)
    s += "theory_phase = " + format_double(*out.asymptote.phase) + "\n";
  s += "averaged_amplitude = " + format_double(out.averaged_amplitude) + "\n";
  s += "averaged_sup = " + format_double(out.averaged_sup) + "\n";
  if (out.averaged_phase_deviation)
    s += "averaged_phase_deviation = " +
         format_double(*out.averaged_phase_deviation) + "\n";
  if (out.decay_exponent)
    s += "decay_exponent = " + format_double(*out.decay_exponent) + "\n";
  s += "mass_drift = " + format_double(out.mass_drift) + "\n";
  write_text(out.run_dir / "summary.txt", s);

  if (cfg.output.emit_plot_script) {
    write_text(out.run_dir / "plot.gp",
               "set datafile separator ','\n"
               "set key autotitle columnhead\n"
               "set xlabel 't'\n"
               "plot 'series.csv' using 1:3 with lines, \\\n"
               "     'series.csv' using 1:5 with lines\n");
  }
  return out;
}

LinearCheckOutcome run_linear_check(const ExperimentConfig& cfg) {
  std::vector<double> velocities = cfg.linear.velocities;
  if (velocities.empty())
    throw std::invalid_argument("linear check requires velocities");
  std::sort(velocities.begin(), velocities.end());
  const double a = cfg.linear.support_left;
  const double b = cfg.linear.support_right;
  if (!(a < b) || b >= 0.0)
    throw std::invalid_argument("bump support must satisfy left < right < 0");
  const double q = cfg.physics.q;

  auto bump = [a, b](double x) {
    if (x <= a || x >= b) return 0.0;
    return std::exp(1.0 / ((x - a) * (x - b)));
  };
  const double norm2 =
      integrate([&](double x) { double f = bump(x); return f * f; }, a, b, 1e-12);
  const double scale = 1.0 / std::sqrt(norm2);

  LinearCheckOutcome out;
  out.run_dir = make_run_dir(cfg, "linear-check");

  for (double v : velocities) {
    if (v <= 0.0) throw std::invalid_argument("linear check requires v > 0");
    const double h = std::min(cfg.mesh.h_out, 0.2 / v);
    const double t_final =
        cfg.time.t_final > 0.0 ? cfg.time.t_final : (std::abs(a) + 6.0) / v;
    const double R_req = cfg.mesh.R > 0.0
                             ? cfg.mesh.R
                             : std::abs(a) + v * t_final + 12.0;
    const int outer =
        std::max(2, static_cast<int>(std::ceil((R_req - 0.5) / h - 1e-9)));
    const double R = 0.5 + outer * h;
    const int inner = std::max(2, static_cast<int>(std::ceil(0.5 / h - 1e-9)));
    const double dt = cfg.time.dt > 0.0
                          ? cfg.time.dt
                          : std::min(0.8 * h / (2.0 * v), 2e-3);

    auto mesh = fem::Mesh1D::build(R, outer, inner);
    auto psi = fem::project(mesh, [&](double x) {
      return cplx(scale * bump(x), 0.0);
    });
    auto modulated = fem::project(mesh, [&](double x) {
      return std::polar(scale * bump(x), v * x);
    });
    auto mirrored = fem::project(mesh, [&](double x) {
      return std::polar(scale * bump(-x), -v * x);
    });

    // ||psi'||^2 through the stiffness form of the projected bump.
    const fem::RealTridiagonal K = fem::assemble_stiffness(*mesh);
    std::vector<cplx> Kpsi(psi.values.size());
    fem::matvec(K, psi.values, Kpsi);
    double grad2 = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i)
      grad2 += (std::conj(psi.values[i]) * Kpsi[i]).real();
    const double bound = std::sqrt(std::max(grad2, 0.0)) / v;

    stepper::StepConfig base = step_config_from(cfg, dt);
    base.nonlinear = false;
    stepper::StepConfig perturbed_cfg = base;
    perturbed_cfg.q = q;
    stepper::StepConfig free_cfg = base;
    free_cfg.q = 0.0;

    stepper::Stepper perturbed(mesh, perturbed_cfg);
    stepper::Stepper free_flow(mesh, free_cfg);

    ComplexField w = modulated;
    ComplexField f1 = modulated;
    ComplexField f2 = mirrored;

    const auto& nodes = mesh->nodes();
    const std::size_t origin = mesh->origin_index();
    auto split_error = [&]() {
      double sum = 0.0;
      const theory::ScatteringCoefficients sc = theory::delta_scattering(q, v);
      std::vector<cplx> diff(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const cplx s = i < origin ? sc.r * f2.values[i] + f1.values[i]
                                  : sc.t * f1.values[i];
        diff[i] = w.values[i] - s;
      }
      for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
        const double he = nodes[e + 1] - nodes[e];
        const cplx da = diff[e], db = diff[e + 1];
        sum += he *
               (std::norm(da) + (std::conj(da) * db).real() + std::norm(db)) /
               3.0;
      }
      return std::sqrt(std::max(sum, 0.0));
    };

    const long n_steps = std::max<long>(1, std::lround(t_final / dt));
    const long stride = std::max<long>(1, n_steps / 60);
    double max_err = split_error();
    for (long k = 1; k <= n_steps; ++k) {
      w = perturbed.step(w);
      f1 = free_flow.step(f1);
      f2 = free_flow.step(f2);
      if (k % stride == 0 || k == n_steps)
        max_err = std::max(max_err, split_error());
    }

    LinearCheckRow row;
    row.v = v;
    row.max_split_error = max_err;
    row.error_bound = bound;
    const double total = measure::mass_in_region(w, nodes.front(), nodes.back());
    row.transmitted_measured =
        measure::mass_in_region(w, 0.0, nodes.back()) / total;
    row.transmitted_theory = theory::quantum_transmission_rate(q, v);
    row.transmitted_deviation =
        std::abs(row.transmitted_measured - row.transmitted_theory);
    out.rows.push_back(row);
  }

  for (std::size_t k = 0; k + 1 < out.rows.size(); ++k)
    out.deviation_ratios.push_back(out.rows[k].transmitted_deviation /
                                   out.rows[k + 1].transmitted_deviation);

  std::string csv =
      "v,max_split_error,error_bound,transmitted_measured,transmitted_theory,"
      "transmitted_deviation\n";
  for (const auto& r : out.rows)
    csv += format_double(r.v) + "," + format_double(r.max_split_error) + "," +
           format_double(r.error_bound) + "," +
           format_double(r.transmitted_measured) + "," +
           format_double(r.transmitted_theory) + "," +
           format_double(r.transmitted_deviation) + "\n";
  write_text(out.run_dir / "linear.csv", csv);

  std::string s;
  s += "q = " + format_double(q) + "\n";
  for (const auto& r : out.rows)
    s += "v = " + format_double(r.v) +
         ": max_split_error = " + format_double(r.max_split_error) +
         ", bound = " + format_double(r.error_bound) +
         ", transmitted_deviation = " + format_double(r.transmitted_deviation) +
         "\n";
  for (std::size_t k = 0; k < out.deviation_ratios.size(); ++k)
    s += "deviation_ratio[" + std::to_string(k) +
         "] = " + format_double(out.deviation_ratios[k]) + "\n";
  write_text(out.run_dir / "summary.txt", s);
  return out;
}

FitOutcome run_fit(const ExperimentConfig& cfg) {
  if (cfg.fit.input.empty())
    throw std::invalid_argument("fit requires fit.input, a sweep.csv path");

  std::ifstream in(cfg.fit.input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + cfg.fit.input);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(cfg.fit.input + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "alpha,v,transmitted,reflected,trapped")
    throw std::invalid_argument(cfg.fit.input + ": unexpected header '" + line +
                                "'");

  struct Point {
    double v, transmitted, trapped;
  };
  std::map<double, std::vector<Point>> groups;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw std::invalid_argument(cfg.fit.input + " line " +
                                  std::to_string(line_no) +
                                  ": expected 5 fields");
    const double alpha = parse_double(fields[0]);
    groups[alpha].push_back({parse_double(fields[1]), parse_double(fields[2]),
                             parse_double(fields[4])});
  }

  FitOutcome out;
  for (auto& [alpha, pts] : groups) {
    const std::string tag = "alpha=" + format_double(alpha);
    std::vector<std::pair<double, double>> tv;
    for (const auto& p : pts) tv.emplace_back(p.v, p.transmitted);
    if (tv.size() < 3) {
      out.notes.push_back(tag + ": only " + std::to_string(tv.size()) +
                          " points, power fit skipped");
    } else {
      try {
        out.rows.push_back({alpha, "power", fitting::fit_power_law(tv, alpha)});
      } catch (const std::exception& e) {
        out.notes.push_back(tag + ": power fit failed: " + e.what());
      }
    }
    if (alpha < 0.0) {
      std::vector<std::pair<double, double>> bv;
      for (const auto& p : pts)
        if (p.trapped > kTrappedFloor) bv.emplace_back(p.v, p.trapped);
      if (bv.size() < 3) {
        out.notes.push_back(tag + ": only " + std::to_string(bv.size()) +
                            " trapped points above the floor, exponential fit "
                            "skipped");
      } else {
        try {
          out.rows.push_back(
              {alpha, "exponential", fitting::fit_exponential(bv)});
        } catch (const std::exception& e) {
          out.notes.push_back(tag + ": exponential fit failed: " + e.what());
        }
      }
    }
  }

  out.run_dir = make_run_dir(cfg, "fit");
  std::string csv = "alpha,model,coefficient,exponent,residual,n_points\n";
  for (const auto& row : out.rows)
    csv += format_double(row.alpha) + "," + row.model + "," +
           format_double(row.fit.coefficient) + "," +
           format_double(row.fit.exponent) + "," +
           format_double(row.fit.residual) + "," +
           std::to_string(row.fit.points_used.size()) + "\n";
  write_text(out.run_dir / "fit_report.csv", csv);
  if (!out.notes.empty()) {
    std::string notes;
    for (const auto& n : out.notes) notes += n + "\n";
    write_text(out.run_dir / "notes.txt", notes);
  }
  return out;
}

}  // namespace gpelab::cli
