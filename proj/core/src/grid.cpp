#include "pnlab/grid.hpp"

namespace pnlab {

HalfGrid build_half_grid(int nx, int ny) {
  if (nx < 3 || ny < 3)
    throw Error(ErrorCode::ConfigInvalid,
                "grid needs at least 3 nodes per direction, got " + std::to_string(nx) + "x" +
                    std::to_string(ny));
  HalfGrid g;
  g.nx = nx;
  g.ny = ny;
  g.hx = 1.0 / (nx - 1);
  g.hy = 2.0 / (ny - 1);
  return g;
}

Field field_from(const HalfGrid& g, const std::function<double(double, double)>& fn) {
  Field u(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u.at(i, j) = fn(g.x1(i), g.x2(j));
  return u;
}

static void check_face_row(const HalfGrid& g, int j) {
  if (j < 1 || j > g.ny - 2)
    throw Error(ErrorCode::ConfigInvalid, "row " + std::to_string(j) + " is not a face row");
}

double tangential_gradient(const Field& u, int j) {
  const HalfGrid& g = u.grid;
  check_face_row(g, j);
  // One-sided at the extreme face rows: the centered stencil would touch the
  // Dirichlet corners, which belong to a different data family.
  if (j == 1) return (u.at(0, 2) - u.at(0, 1)) / g.hy;
  if (j == g.ny - 2) return (u.at(0, g.ny - 2) - u.at(0, g.ny - 3)) / g.hy;
  return (u.at(0, j + 1) - u.at(0, j - 1)) / (2.0 * g.hy);
}

double normal_derivative(const Field& u, int j) {
  const HalfGrid& g = u.grid;
  check_face_row(g, j);
  return (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2.0 * g.hx);
}

double laplacian5(const Field& u, int i, int j) {
  const HalfGrid& g = u.grid;
  if (g.kind(i, j) != NodeKind::Interior)
    throw Error(ErrorCode::ConfigInvalid, "laplacian needs an interior node");
  return (u.at(i - 1, j) - 2.0 * u.at(i, j) + u.at(i + 1, j)) / (g.hx * g.hx) +
         (u.at(i, j - 1) - 2.0 * u.at(i, j) + u.at(i, j + 1)) / (g.hy * g.hy);
}

std::vector<double> face_tangential_gradient(const Field& u) {
  std::vector<double> out(u.grid.face_count());
  for (int j = 1; j <= u.grid.ny - 2; ++j) out[j - 1] = tangential_gradient(u, j);
  return out;
}

std::vector<double> face_normal_derivative(const Field& u) {
  std::vector<double> out(u.grid.face_count());
  for (int j = 1; j <= u.grid.ny - 2; ++j) out[j - 1] = normal_derivative(u, j);
  return out;
}

}  // namespace pnlab
