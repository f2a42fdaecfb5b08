#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pnlab/errors.hpp"
#include "pnlab/grid.hpp"
#include "pnlab/profile.hpp"

namespace pnlab {

// Fixed-format float rendering so identical inputs always serialize to
// identical bytes. g12 is the human-facing table format, g17 round-trips
// doubles exactly.
std::string fmt_g12(double v);
std::string fmt_g17(double v);

// Creates parent directories as needed; throws IoFailure when the write
// cannot complete.
void write_text_file(const std::string& path, const std::string& body);
std::string read_text_file(const std::string& path);

// Name -> double-valued columns. Serializes to one header line plus one line
// per row; parsing skips blank lines and '#' comments.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int precision = 12;  // 12 or 17, g-style

  void add_row(std::initializer_list<double> r) { rows.emplace_back(r); }
};

std::string csv_payload(const CsvTable& t);
CsvTable read_csv_text(const std::string& text);
CsvTable read_csv_file(const std::string& path);

// A rectangular lattice of sampled values detached from any solver grid:
// what a field CSV carries. v is row-major over x2 (j outer, i inner).
struct RawField {
  int nx = 0, ny = 0;
  std::vector<double> x1, x2;  // axis coordinates, sizes nx and ny
  std::vector<double> v;       // nx*ny values
  double at(int i, int j) const { return v[static_cast<size_t>(j) * nx + i]; }
};

// Field CSV: "# nx=<n> ny=<n> time=<t>" comment, "x1,x2,value" header, then
// one row per node, j outer. Values are written with g17 so read-back is
// exact.
std::string field_csv(const Field& u);
RawField read_field_csv_text(const std::string& text);
RawField read_field_csv(const std::string& path);
RawField raw_from_field(const Field& u);

// Two-column (u, f(u)) samples over one period. Uniform grids starting at 0
// are taken verbatim; anything else is resampled linearly onto 512 points.
PeriodicProfile profile_from_csv(const std::string& path);

struct HeatmapOptions {
  std::string title;
  // Intervals of x2 to flag along the x1=0 edge (facet contact overlay).
  std::vector<std::pair<double, double>> face_intervals;
};

// Standalone SVG, linear two-ramp colormap, min/max annotated in the legend.
// Deterministic bytes for fixed input.
std::string heatmap_svg(const RawField& u, const HeatmapOptions& opts = {});
std::string heatmap_svg(const Field& u, const HeatmapOptions& opts = {});

}  // namespace pnlab
