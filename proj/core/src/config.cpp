#include "gpelab/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include "gpelab/csv.hpp"

namespace gpelab::cli {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line_no) +
                              ": " + what);
}

std::string render_value(const std::string& v) { return v; }
std::string render_value(bool v) { return v ? "true" : "false"; }
std::string render_value(int v) { return std::to_string(v); }
std::string render_value(double v) { return format_double(v); }
std::string render_value(const std::vector<double>& v) {
  std::string out;
  for (double x : v) {
    if (!out.empty()) out += ",";
    out += format_double(x);
  }
  return out;
}

void parse_value(std::string& dst, const std::string& v, int) { dst = v; }
void parse_value(bool& dst, const std::string& v, int line_no) {
  if (v == "true") {
    dst = true;
  } else if (v == "false") {
    dst = false;
  } else {
    fail(line_no, "expected true or false, got '" + v + "'");
  }
}
void parse_value(int& dst, const std::string& v, int line_no) {
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    dst = parsed;
  } catch (const std::exception&) {
    fail(line_no, "expected an integer, got '" + v + "'");
  }
}
void parse_value(double& dst, const std::string& v, int line_no) {
  try {
    dst = parse_double(v);
  } catch (const std::exception&) {
    fail(line_no, "expected a number, got '" + v + "'");
  }
}
void parse_value(std::vector<double>& dst, const std::string& v, int line_no) {
  std::vector<double> parsed;
  for (const std::string& field : split_csv_line(v)) {
    const std::string item = trim(field);
    if (item.empty()) fail(line_no, "empty entry in list '" + v + "'");
    double x = 0.0;
    parse_value(x, item, line_no);
    parsed.push_back(x);
  }
  if (parsed.empty()) fail(line_no, "empty list");
  dst = std::move(parsed);
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> render;
  std::function<void(ExperimentConfig&, const std::string&, int)> parse;
};

template <class F>
Field make_field(const char* section, const char* key, F access) {
  Field field;
  field.section = section;
  field.key = key;
  field.render = [access](const ExperimentConfig& config) {
    return render_value(access(const_cast<ExperimentConfig&>(config)));
  };
  field.parse = [access](ExperimentConfig& config, const std::string& value,
                         int line_no) {
    parse_value(access(config), value, line_no);
  };
  return field;
}

const std::vector<Field>& field_table() {
  static const std::vector<Field> table = [] {
    using C = ExperimentConfig;
    std::vector<Field> t;
    t.push_back(make_field("experiment", "kind",
                           [](C& c) -> auto& { return c.experiment.kind; }));
    t.push_back(make_field("experiment", "out_dir",
                           [](C& c) -> auto& { return c.experiment.out_dir; }));
    t.push_back(make_field("experiment", "label",
                           [](C& c) -> auto& { return c.experiment.label; }));
    t.push_back(
        make_field("physics", "q", [](C& c) -> auto& { return c.physics.q; }));
    t.push_back(
        make_field("physics", "v", [](C& c) -> auto& { return c.physics.v; }));
    t.push_back(make_field("physics", "x0",
                           [](C& c) -> auto& { return c.physics.x0; }));
    t.push_back(make_field("physics", "amplitude",
                           [](C& c) -> auto& { return c.physics.amplitude; }));
    t.push_back(make_field("physics", "phase",
                           [](C& c) -> auto& { return c.physics.phase; }));
    t.push_back(
        make_field("mesh", "R", [](C& c) -> auto& { return c.mesh.R; }));
    t.push_back(make_field("mesh", "h_out",
                           [](C& c) -> auto& { return c.mesh.h_out; }));
    t.push_back(
        make_field("mesh", "h_in", [](C& c) -> auto& { return c.mesh.h_in; }));
    t.push_back(make_field("mesh", "refine_ratio", [](C& c) -> auto& {
      return c.mesh.refine_ratio;
    }));
    t.push_back(
        make_field("time", "dt", [](C& c) -> auto& { return c.time.dt; }));
    t.push_back(make_field("time", "t_final",
                           [](C& c) -> auto& { return c.time.t_final; }));
    t.push_back(make_field("time", "t_post",
                           [](C& c) -> auto& { return c.time.t_post; }));
    t.push_back(make_field("time", "iterations",
                           [](C& c) -> auto& { return c.time.iterations; }));
    t.push_back(make_field("time", "nonlinear",
                           [](C& c) -> auto& { return c.time.nonlinear; }));
    t.push_back(make_field("time", "cubic_rule",
                           [](C& c) -> auto& { return c.time.cubic_rule; }));
    t.push_back(make_field("time", "residual_stop", [](C& c) -> auto& {
      return c.time.residual_stop;
    }));
    t.push_back(make_field("time", "mass_drift_tol", [](C& c) -> auto& {
      return c.time.mass_drift_tol;
    }));
    t.push_back(make_field("output", "sample_stride", [](C& c) -> auto& {
      return c.output.sample_stride;
    }));
    t.push_back(make_field("output", "snapshot_interval", [](C& c) -> auto& {
      return c.output.snapshot_interval;
    }));
    t.push_back(make_field("output", "stabilize_window", [](C& c) -> auto& {
      return c.output.stabilize_window;
    }));
    t.push_back(make_field("output", "stabilize_tol", [](C& c) -> auto& {
      return c.output.stabilize_tol;
    }));
    t.push_back(make_field("output", "emit_plot_script", [](C& c) -> auto& {
      return c.output.emit_plot_script;
    }));
    t.push_back(make_field("output", "keep_series", [](C& c) -> auto& {
      return c.output.keep_series;
    }));
    t.push_back(make_field("sweep", "alphas",
                           [](C& c) -> auto& { return c.sweep.alphas; }));
    t.push_back(make_field("sweep", "velocities",
                           [](C& c) -> auto& { return c.sweep.velocities; }));
    t.push_back(make_field("sweep", "workers",
                           [](C& c) -> auto& { return c.sweep.workers; }));
    t.push_back(make_field("resolve", "R_big",
                           [](C& c) -> auto& { return c.resolve.R_big; }));
    t.push_back(make_field("resolve", "n_big",
                           [](C& c) -> auto& { return c.resolve.n_big; }));
    t.push_back(make_field("resolve", "h_big",
                           [](C& c) -> auto& { return c.resolve.h_big; }));
    t.push_back(make_field("resolve", "dt",
                           [](C& c) -> auto& { return c.resolve.dt; }));
    t.push_back(make_field("resolve", "t_resolve",
                           [](C& c) -> auto& { return c.resolve.t_resolve; }));
    t.push_back(make_field("resolve", "side",
                           [](C& c) -> auto& { return c.resolve.side; }));
    t.push_back(make_field("resolve", "search_forward", [](C& c) -> auto& {
      return c.resolve.search_forward;
    }));
    t.push_back(make_field("resolve", "deviation_span", [](C& c) -> auto& {
      return c.resolve.deviation_span;
    }));
    t.push_back(
        make_field("free", "alpha", [](C& c) -> auto& { return c.free.alpha; }));
    t.push_back(make_field("linear", "velocities",
                           [](C& c) -> auto& { return c.linear.velocities; }));
    t.push_back(make_field("linear", "support_left", [](C& c) -> auto& {
      return c.linear.support_left;
    }));
    t.push_back(make_field("linear", "support_right", [](C& c) -> auto& {
      return c.linear.support_right;
    }));
    t.push_back(
        make_field("fit", "input", [](C& c) -> auto& { return c.fit.input; }));
    return t;
  }();
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::pair<std::string, std::string>, const Field*> lookup;
  std::map<std::string, bool> sections;
  for (const Field& field : field_table()) {
    lookup[{field.section, field.key}] = &field;
    sections[field.section] = true;
  }

  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail(line_no, "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!sections.count(section)) {
        fail(line_no, "unknown section '" + section + "'");
      }
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      fail(line_no, "expected key = value, got '" + body + "'");
    }
    if (section.empty()) fail(line_no, "key before any [section]");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = lookup.find({section, key});
    if (it == lookup.end()) {
      fail(line_no, "unknown key '" + key + "' in section [" + section + "]");
    }
    it->second->parse(config, value, line_no);
  }
  return config;
}

std::string render_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const Field& field : field_table()) {
    if (field.section != section) {
      if (!out.empty()) out += "\n";
      out += "[" + field.section + "]\n";
      section = field.section;
    }
    out += field.key + " = " + field.render(config) + "\n";
  }
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::invalid_argument("cannot open config file " + file.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace gpelab::cli
