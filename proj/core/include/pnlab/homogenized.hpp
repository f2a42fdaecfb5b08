#pragma once

#include <utility>
#include <vector>

#include "pnlab/epsilon.hpp"
#include "pnlab/grid.hpp"
#include "pnlab/profile.hpp"

namespace pnlab {

// Per-face-node flux bookkeeping for the limit problem. Entries for face row
// j live at index j-1. lambda is the discrete normal-derivative selection,
// always inside [min f, max f]; facet marks |tangential gradient| <=
// tol_facet at classification time; component numbers consecutive facet runs
// (-1 on free nodes).
struct BoundaryFluxState {
  std::vector<double> lambda;
  std::vector<unsigned char> facet;
  std::vector<int> component;
};

// The limit problem: heat flow whose face flux is mean f wherever the trace
// has tangential slope, and is free to roam [min f, max f] on flat stretches
// where the face can stick.
struct HomProblem {
  PeriodicProfile profile;
  HalfGrid grid;
  BoundaryData g;
  double tol_facet = 0.0;  // <= 0 picks 10*hy
  double dt = 0.0;         // <= 0 picks the CFL bound 0.25*min(hx,hy)^2

  double facet_tol() const { return tol_facet > 0.0 ? tol_facet : 10.0 * grid.hy; }
  double step_dt() const;
  void validate() const;
};

struct HomState {
  Field u;
  BoundaryFluxState flux;
};

// Classify u0 and derive the matching flux record: mean flux on free nodes,
// the clamped one-sided normal derivative on facet nodes.
HomState hom_state_from_field(const Field& u0, const HomProblem& pb);

// One explicit step of the stick/slip splitting:
//   (1) face nodes classified facet/free from the incoming trace;
//   (2) interior heat update, Dirichlet refresh at the new time;
//   (3) free nodes take the mean-flux stencil value;
//   (4) facet nodes try to hold their value; the flux the fresh interior
//       would impose there is kept if it lies in [min f, max f] (stick),
//       otherwise the flux is clamped to the violated end and the value moves
//       with the clamped stencil (slip).
// The returned facet flags are the classification this step used.
HomState step_homogenized(const HomState& s, const HomProblem& pb);

// Face nodes whose flux sits off the mean by more than 3*tol, decomposed
// into maximal runs of consecutive rows. Every such node must be flat to
// tol_facet; a slanted node carrying off-mean flux breaks the scheme's
// containment invariant.
struct ContactSet {
  std::vector<int> nodes;                         // face rows j
  std::vector<std::pair<int, int>> components;    // inclusive row ranges
  double measure = 0.0;                           // node count * hy
};
ContactSet contact_set(const Field& u, const BoundaryFluxState& flux, const HomProblem& pb,
                       double tol = 1e-6);

struct HomTrajectory {
  Trajectory traj;                  // snapshots, per-step updates, face history
  std::vector<ContactSet> contacts; // one per snapshot time
};

// Iterate step_homogenized to t_end, recording the full per-step face history
// (values, lambda, facet flags) and a contact set per snapshot.
HomTrajectory solve_homogenized_parabolic(const HomProblem& pb, const Field& u0, double t_end);

// Extremal steady states of the limit problem by the same monotone
// relaxation as extremal_steady_eps, stepping with step_homogenized.
Field extremal_homogenized(const HomProblem& pb, ExtremalSide side, double tol,
                           double max_time = 80.0);

// Face-wise checks of the steady characterization, report only:
//   (1) local stability: min{d1u - mean f, |d'u|} within [-tol, tol];
//   (2) flux ceiling: d1u <= max f + tol;
//   (3) saturation: every facet component must either reach flux max f - tol
//       somewhere or touch the ends of the face, where the separation
//       hypothesis behind the condition has no room to hold.
struct ExtremalAuditReport {
  bool stability_ok = false;
  bool flux_bound_ok = false;
  bool saturation_ok = false;
  double worst_stability = 0.0;   // max |min{d1u - mean, |d'u|}| over face rows
  double worst_flux = 0.0;        // max d1u - max f
  double worst_saturation = 0.0;  // max over audited components of max f - peak flux
  int stability_row = -1;
  int flux_row = -1;
  std::pair<int, int> saturation_component{-1, -1};
  int components_checked = 0;
  int components_exempt = 0;
  bool pass() const { return stability_ok && flux_bound_ok && saturation_ok; }
};
ExtremalAuditReport audit_extremal_conditions(const Field& u, const HomProblem& pb, double tol);

}  // namespace pnlab
