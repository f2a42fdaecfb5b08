#pragma once

#include <functional>

#include "pnlab/grid.hpp"
#include "pnlab/profile.hpp"

namespace pnlab {

// Dirichlet trace g(x1, x2, t) on the outer boundary (everything except the
// flux face x1 = 0, corners excluded from the face).
using BoundaryData = std::function<double(double x1, double x2, double t)>;

// The small-scale problem: heat flow (or its steady state) on the half
// square, flux condition d1 u = f(u / epsilon) on the face x1 = 0, Dirichlet
// data g elsewhere.
struct EpsProblem {
  PeriodicProfile profile;
  double epsilon = 0.1;
  HalfGrid grid;
  BoundaryData g;

  void validate() const;
};

// Solves (-3 v + 4 a - b) / (2 hx) = f((v + shift) / scale) for v. The walk
// starts at v0, moves in the direction the defect sign dictates in steps of
// scale/16 until the sign flips (the linear term dominates far out, so a
// bracket always appears), then bisects to near machine width. Returns the
// root nearest v0 in the walk direction, which is what keeps time stepping
// and relaxation continuous in their input data.
double face_scalar_solve(const PeriodicProfile& f, double hx, double a, double b, double shift,
                         double scale, double v0);

// Overwrite Dirichlet nodes from g at time t.
void apply_dirichlet(Field& u, const BoundaryData& g, double t);

// Update-metric residuals of the discrete steady equations: interior is the
// distance of each node from its 5-point average, face is the distance of the
// face value from the root of its scalar flux relation, dirichlet is the
// mismatch against g. All share the units of a nodal update, so they compare
// directly against a sweep tolerance.
struct EllipticResidual {
  double interior = 0.0;
  double face = 0.0;
  double dirichlet = 0.0;
  double max() const { return interior > face ? (interior > dirichlet ? interior : dirichlet)
                                              : (face > dirichlet ? face : dirichlet); }
};
EllipticResidual elliptic_residual(const Field& u, const EpsProblem& problem);

// Nonlinear Gauss-Seidel for the steady problem. Interior nodes relax to
// their 5-point average (over-relaxed when that is safe); face nodes solve
// the scalar flux relation exactly. Returns when the max nodal update is at
// most tol and the update-metric residuals are at most 10*tol. The fixed
// point reached depends on init: the face relation has several roots when
// epsilon is small, and the walk keeps each node on the branch nearest its
// start.
Field solve_elliptic_eps(const EpsProblem& problem, const Field& init, double tol,
                         int max_sweeps = 200000);

struct ParabolicOptions {
  int snapshot_every = 0;   // 0: pick a stride that keeps about 64 snapshots
  bool record_face = false; // store per-step face values and fluxes
};

// Forward Euler in the interior, Dirichlet refresh from g, then the scalar
// face solve against the fresh interior values. Requires
// dt <= 0.25*min(hx,hy)^2. Trajectories stay inside the barrier
// |u| <= sup|g| + sup|f|*(1 - x1); leaving it by more than 10% aborts.
Trajectory solve_parabolic_eps(const EpsProblem& problem, const Field& u0, double dt, double t_end,
                               const ParabolicOptions& opts = {});

// Discrete energy: trapezoid-weighted squared differences on grid edges plus
// the face integral of epsilon * F(u / epsilon), F the mean-linear
// antiderivative of f. The interior stationarity condition of this functional
// is exactly the 5-point scheme.
double energy_eps(const Field& u, const EpsProblem& problem);

// Partial derivative of energy_eps with respect to every nodal value
// (Dirichlet nodes included; callers decide which entries matter).
Field energy_gradient_eps(const Field& u, const EpsProblem& problem);

// Coordinate descent on the discrete energy: interior nodes take their
// closed-form quadratic minimum, face nodes minimize their one-node section
// (quadratic plus the oscillatory face term) by sampling one period of the
// oscillation around the current value and refining with golden section.
// Continuation drives epsilon down from 0.4 to the target, each stage warm
// starting from the previous minimizer; the first stage starts from the
// linear solution with constant face flux equal to the mean of f. Energy is
// nonincreasing sweep to sweep by construction and asserted so. Requires g
// independent of t.
Field minimize_energy_eps(const EpsProblem& problem, double tol, int max_sweeps = 40000);

// Linear steady solve with constant face flux lambda: d1 u = lambda on the
// face, Dirichlet g(.,0) elsewhere. The continuation seed above, and the
// reference field several audits compare against.
Field solve_linear_neumann(const HalfGrid& grid, const BoundaryData& g, double lambda, double tol,
                           int max_sweeps = 200000);

enum class ExtremalSide {
  MinSuper, // limit of the rising flow started below every steady state
  MaxSub,   // limit of the falling flow started above every steady state
};

// Extremal steady states by monotone relaxation. MinSuper starts from the
// strict subsolution -(sup|g|+1) - sup|f|*(1-x1) and relaxes upward; the
// first steady state met from below is the smallest one, the minimal
// supersolution. MaxSub mirrors this from above and yields the maximal
// subsolution. Monotonicity in t is asserted at every node and step (1e-12
// slack); the run ends when the max per-step update drops to tol*dt.
// Requires g independent of t.
Field extremal_steady_eps(const EpsProblem& problem, ExtremalSide side, double tol,
                          double max_time = 80.0);

}  // namespace pnlab
