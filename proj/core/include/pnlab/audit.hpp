#pragma once

#include <functional>
#include <vector>

#include "pnlab/grid.hpp"
#include "pnlab/homogenized.hpp"
#include "pnlab/profile.hpp"

namespace pnlab {

// Uniformly sampled space-time block over a HalfGrid: slab k holds the field
// at time k*dt. Audit-side view of a trajectory.
struct SpaceTimeField {
  HalfGrid grid;
  double dt = 0.0;
  int steps = 0;  // number of slabs, times 0..(steps-1)*dt
  std::vector<double> v;

  int slab_size() const { return grid.size(); }
  double at(int k, int i, int j) const { return v[k * grid.size() + grid.index(i, j)]; }
  double& at(int k, int i, int j) { return v[k * grid.size() + grid.index(i, j)]; }
  double time(int k) const { return k * dt; }
};

// Repackage evenly spaced snapshots; uneven spacing is refused.
SpaceTimeField space_time_from(const Trajectory& traj);
SpaceTimeField space_time_from(const HalfGrid& grid, int steps, double dt,
                               const std::function<double(double, double, double)>& fn);

// sup over (y2, s) of u(x1, y2, s) - |x2-y2|^2/(2 delta) - (t-s)^2/(2 delta),
// taken exactly over the nodes sharing x1. The additive split of the penalty
// makes two 1-D passes (first tangential, then temporal) equal the full
// 2-D sup. Output dominates the input nodewise and grows with delta.
SpaceTimeField tangential_sup_convolution(const SpaceTimeField& u, double delta);

// Explicit heat evolution that reads its Dirichlet data on the whole
// parabolic boundary (initial slab, outer boundary, and the face column)
// from the given block, substepping under the CFL bound with boundary values
// interpolated linearly between slabs. sub_dt picks the substep explicitly;
// 0 means the largest stable one.
SpaceTimeField caloric_lift(const SpaceTimeField& trace, double sub_dt = 0.0);

// Max over non-boundary space-time nodes of sub - super, after checking
// order on the discrete parabolic boundary: the initial slab and the
// Dirichlet nodes of every later slab (the flux face is part of the
// equation, not of the comparison boundary).
double comparison_gap(const SpaceTimeField& sub, const SpaceTimeField& super);

// Scan of a face history for the two dynamic slope laws.
//   Transversal: a node moving faster than tol_rate carries flux on the
//   matching side of mean f.
//   Laminar: a facet component strictly inside the face whose mean motion
//   exceeds tol_rate must have saturated flux somewhere (max f when moving
//   up, min f when moving down).
struct SlopeAuditReport {
  double tol_rate = 0.0;
  long events_transversal = 0;
  long violations_transversal = 0;
  double worst_transversal = 0.0;
  long events_laminar = 0;
  long violations_laminar = 0;
  double worst_laminar = 0.0;
  long violations() const { return violations_transversal + violations_laminar; }
};
SlopeAuditReport dynamic_slope_audit(const FaceHistory& face, const HomProblem& pb,
                                     double tol_rate = 0.0);

}  // namespace pnlab
