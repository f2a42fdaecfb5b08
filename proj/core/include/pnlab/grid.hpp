#pragma once

#include <functional>
#include <vector>

#include "pnlab/errors.hpp"

namespace pnlab {

enum class NodeKind : unsigned char { Interior, NeumannFace, Dirichlet };

// Uniform node-centered grid on the half-square [0,1] x [-1,1].
// x1 = i*hx (i = 0..nx-1), x2 = -1 + j*hy (j = 0..ny-1). The x1 = 0 edge is
// the flux face; every other boundary node carries Dirichlet data, corners
// (x1=0, |x2|=1) included.
struct HalfGrid {
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;

  int size() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  double x1(int i) const { return i * hx; }
  double x2(int j) const { return -1.0 + j * hy; }

  NodeKind kind(int i, int j) const {
    if (i == nx - 1 || j == 0 || j == ny - 1) return NodeKind::Dirichlet;
    if (i == 0) return NodeKind::NeumannFace;
    return NodeKind::Interior;
  }
  bool is_face(int i, int j) const { return kind(i, j) == NodeKind::NeumannFace; }
  // Face rows run j = 1..ny-2 at i = 0.
  int face_count() const { return ny - 2; }
};

HalfGrid build_half_grid(int nx, int ny);

// Nodal scalar field over a HalfGrid. Carries its grid by value (grids are
// two ints and two doubles) plus an optional timestamp.
struct Field {
  HalfGrid grid;
  std::vector<double> v;
  double time = 0.0;

  Field() = default;
  explicit Field(const HalfGrid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

  double& at(int i, int j) { return v[grid.index(i, j)]; }
  double at(int i, int j) const { return v[grid.index(i, j)]; }
};

// Evaluate fn(x1, x2) at every node.
Field field_from(const HalfGrid& g, const std::function<double(double, double)>& fn);

// Tangential derivative on the face x1 = 0 at row j: centered difference,
// falling back to the first-order one-sided stencil at the two extreme face
// rows so corner Dirichlet values never enter.
double tangential_gradient(const Field& u, int j);

// Inner normal derivative at face row j by the second-order one-sided stencil
// (-3 u0 + 4 u1 - u2) / (2 hx); exact for quadratics in x1.
double normal_derivative(const Field& u, int j);

// 5-point Laplacian at an interior node; annihilates affine fields exactly.
double laplacian5(const Field& u, int i, int j);

// Convenience: values over all face rows j = 1..ny-2, indexed by j-1.
std::vector<double> face_tangential_gradient(const Field& u);
std::vector<double> face_normal_derivative(const Field& u);

// Per-step boundary record of a time integration at full step resolution:
// face values, the flux each face row carried, and (when the stepper
// classifies) the facet flag. Row-major over steps; row k holds ny entries
// aligned with grid rows (corner slots are padding).
struct FaceHistory {
  int ny = 0;
  double dt = 0.0;
  std::vector<double> values;
  std::vector<double> flux;
  std::vector<unsigned char> facet;
  int steps() const { return ny ? static_cast<int>(values.size()) / ny : 0; }
};

// Time integration output: snapshot fields at a fixed step stride plus the
// per-step max nodal update record, and optionally the face history.
struct Trajectory {
  HalfGrid grid;
  double dt = 0.0;
  int snapshot_stride = 1;
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::vector<double> max_update;  // one entry per time step
  FaceHistory face;                // empty unless recording was requested

  const Field& final_state() const { return snapshots.back(); }
};

}  // namespace pnlab
