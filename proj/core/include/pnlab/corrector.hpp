#pragma once

#include <vector>

#include "pnlab/grid.hpp"
#include "pnlab/profile.hpp"

namespace pnlab {

// Truncated strip x1 in [0, T], tangential coordinate x2 periodic with the
// given period (1/|p| for slope p, 1 when p = 0). nx2 counts nodes including
// the duplicated seam, so only n2 = nx2 - 1 distinct rows are stored and
// tangential index arithmetic wraps modulo n2.
struct StripGrid {
  double T = 0.0;
  double period = 1.0;
  int nx1 = 0, nx2 = 0;
  int n2 = 0;
  double hx = 0.0, h2 = 0.0;

  int size() const { return nx1 * n2; }
  int wrap(int j) const { return ((j % n2) + n2) % n2; }
  int index(int i, int j) const { return wrap(j) * nx1 + i; }
  double x1(int i) const { return i * hx; }
  double x2(int j) const { return j * h2; }
};

StripGrid build_strip_grid(double T, double period, int nx1, int nx2);

// Solution of the strip problem: eta harmonic in the strip, eta = 0 at
// x1 = T, flux condition d1 eta = f(eta + p_mag * x2) at x1 = 0, periodic
// tangentially.
struct CellSolution {
  StripGrid grid;
  double p_mag = 0.0;
  std::vector<double> eta;

  double at(int i, int j) const { return eta[grid.index(i, j)]; }
  double& at(int i, int j) { return eta[grid.index(i, j)]; }
  std::vector<double> boundary_trace() const;
};

// Flux interval sustained by steady pinning at tangential slope p, computed
// on the height-T truncation.
struct PinningInterval {
  double q_lower = 0.0;
  double q_upper = 0.0;
  double p = 0.0;
  double T_used = 0.0;
  bool extrapolated = false;
};

struct HorizontalRoots {
  double w_plus = 0.0;   // largest root
  double w_minus = 0.0;  // smallest root
};

// Roots of w/T + f(w) = 0: the flat (tangentially invariant) steady profiles
// of height T have boundary value w and flux -w/T, so the extreme roots carry
// the edges of the pinning interval at p = 0. Scans at step 1e-3 and bisects
// each sign change to 1e-10. Every continuous periodic f has a root in
// [-(min f) T - 1, -(min f) T], which puts -w_plus/T within 3/T of min f.
HorizontalRoots horizontal_pinning_roots(const PeriodicProfile& f, double T);

// p = 0: endpoints -w_plus/T and -w_minus/T from the scalar reduction.
// p != 0: the interval collapses to [mean f, mean f] at every T.
PinningInterval pinning_interval(const PeriodicProfile& f, double p, double T);

// Nonlinear Gauss-Seidel for the strip problem, converged when the max nodal
// update is at most 1e-9. init, when given, is resampled bilinearly (periodic
// in x2), which lets coarse solves seed fine ones on the same branch.
CellSolution solve_cell(const PeriodicProfile& f, double p_mag, double T, int nx1, int nx2,
                        const CellSolution* init = nullptr);

// Mean of f(eta(0, x2) + p x2) over one tangential period, times |p|. Since
// |p| * period = 1 and the integrand is period-periodic, the wrapped
// trapezoid rule collapses to the plain average over distinct rows. Equals
// mean f in the continuum at every T; the discrete defect is discretization
// error only.
double cell_average_flux(const CellSolution& cell, const PeriodicProfile& f);

// Max positive violation of the two-sided shift bounds
//   v(x) + floor(k p) <= v(x + k e2) <= v(x) + ceil(k p)
// over nodes and tangential shifts k in {1, 2} (negative shifts give the
// same inequalities reflected). Returns 0 when the field has the property
// discretely. The strip overload wraps periodically; the half-square overload
// shifts within [-1, 1] and only tests pairs that stay inside. Shifts that do
// not land on the node lattice are skipped; if none can be tested at all the
// domain cannot carry the check.
double birkhoff_residual(const Field& u, double p);
double birkhoff_residual(const CellSolution& cell, double p);

}  // namespace pnlab
