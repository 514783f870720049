#include "gpelab/snapshot.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "gpelab/csv.hpp"

namespace gpelab::cli {
namespace {

[[noreturn]] void fail(const std::filesystem::path& path, int line_no,
                       const std::string& what) {
  throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                              ": " + what);
}

}  // namespace

std::string snapshot_filename(double t) {
  return "snapshot_t" + format_double(t) + ".csv";
}

void write_snapshot(const std::filesystem::path& path,
                    const fem::ComplexField& field, SnapshotHeader header) {
  header.nodes = field.values.size();
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot write snapshot " + path.string());
  }
  out << "# version=" << header.version << "\n";
  out << "# q=" << format_double(header.q) << "\n";
  out << "# v=" << format_double(header.v) << "\n";
  out << "# x0=" << format_double(header.x0) << "\n";
  out << "# t=" << format_double(header.t) << "\n";
  out << "# R=" << format_double(header.R) << "\n";
  out << "# nodes=" << header.nodes << "\n";
  out << "x,re,im\n";
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    out << format_double_17(field.mesh->node(i)) << ","
        << format_double_17(field.values[i].real()) << ","
        << format_double_17(field.values[i].imag()) << "\n";
  }
  if (!out) {
    throw std::invalid_argument("short write to snapshot " + path.string());
  }
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open snapshot " + path.string());
  }

  SnapshotData data;
  std::string line;
  int line_no = 0;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != '#') {
      if (line != "x,re,im") {
        fail(path, line_no, "expected the x,re,im column header");
      }
      saw_columns = true;
      break;
    }
    std::string body = line.substr(1);
    const auto start = body.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    body = body.substr(start);
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail(path, line_no, "malformed header line '" + line + "'");
    }
    const std::string key = body.substr(0, eq);
    const std::string value = body.substr(eq + 1);
    try {
      if (key == "version") {
        data.header.version = static_cast<int>(parse_double(value));
      } else if (key == "q") {
        data.header.q = parse_double(value);
      } else if (key == "v") {
        data.header.v = parse_double(value);
      } else if (key == "x0") {
        data.header.x0 = parse_double(value);
      } else if (key == "t") {
        data.header.t = parse_double(value);
      } else if (key == "R") {
        data.header.R = parse_double(value);
      } else if (key == "nodes") {
        data.header.nodes = static_cast<std::size_t>(parse_double(value));
      } else {
        fail(path, line_no, "unknown header key '" + key + "'");
      }
    } catch (const std::invalid_argument& err) {
      fail(path, line_no, err.what());
    }
  }
  if (!saw_columns) fail(path, line_no, "missing the x,re,im column header");

  std::vector<double> xs;
  std::vector<fem::cplx> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      fail(path, line_no, "expected 3 comma-separated fields");
    }
    try {
      xs.push_back(parse_double(fields[0]));
      values.emplace_back(parse_double(fields[1]), parse_double(fields[2]));
    } catch (const std::invalid_argument& err) {
      fail(path, line_no, err.what());
    }
  }
  if (xs.size() != data.header.nodes) {
    fail(path, line_no,
         "node count " + std::to_string(xs.size()) +
             " does not match the header (" +
             std::to_string(data.header.nodes) + ")");
  }

  data.field.mesh = fem::Mesh1D::from_nodes(std::move(xs));
  data.field.values = std::move(values);

  if (data.field.mesh->extent() != data.header.R) {
    data.warnings.push_back("header R=" + format_double(data.header.R) +
                            " differs from the mesh extent " +
                            format_double(data.field.mesh->extent()));
  }
  const std::string stem = path.stem().string();
  const std::string prefix = "snapshot_t";
  if (stem.rfind(prefix, 0) == 0) {
    try {
      const double t_name = parse_double(stem.substr(prefix.size()));
      if (std::abs(t_name - data.header.t) >
          1e-9 * std::max(1.0, std::abs(data.header.t))) {
        data.warnings.push_back(
            "file name time " + format_double(t_name) +
            " differs from the header t=" + format_double(data.header.t));
      }
    } catch (const std::invalid_argument&) {
      // Not the canonical naming scheme; nothing to cross-check.
    }
  }
  return data;
}

}  // namespace gpelab::cli
