#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gpelab/field.hpp"

namespace gpelab::cli {

struct SnapshotHeader {
  int version = 1;
  double q = 0.0;
  double v = 0.0;
  double x0 = 0.0;
  double t = 0.0;
  double R = 0.0;
  std::size_t nodes = 0;
};

struct SnapshotData {
  SnapshotHeader header;
  fem::ComplexField field;
  std::vector<std::string> warnings;
};

/// Canonical snapshot file name for a sample time.
std::string snapshot_filename(double t);

/// Writes "# key=value" header lines followed by one "x,re,im" row per node
/// at 17 significant digits; read_snapshot(write_snapshot(u)) reproduces the
/// field bit for bit. The node count is taken from the field.
void write_snapshot(const std::filesystem::path& path,
                    const fem::ComplexField& field, SnapshotHeader header);

/// Parses a snapshot; malformed rows and header/node-count mismatches are
/// rejected with line numbers. A file-name time that disagrees with the
/// header produces a warning, not an error.
SnapshotData read_snapshot(const std::filesystem::path& path);

}  // namespace gpelab::cli
