#pragma once

#include <functional>
#include <vector>

#include "pnlab/audit.hpp"
#include "pnlab/epsilon.hpp"
#include "pnlab/grid.hpp"

// Independent reference implementations the tests measure the library
// against. Everything here favors brute force and obviousness over speed and
// shares no code with the solvers under test.
namespace oracle {

// Every sign change of fn over [lo, hi] on a dense sample grid, refined by
// plain bisection. Tangential (non-crossing) zeros are out of scope.
std::vector<double> scan_roots(const std::function<double(double)>& fn, double lo, double hi,
                               int samples = 200000);

// Adaptive Simpson quadrature with interval halving.
double integrate(const std::function<double(double)>& fn, double a, double b,
                 double tol = 1e-12);

// One explicit Euler step of the plain zero-flux heat scheme: 5-point
// interior update from the incoming field, Dirichlet refresh at t_next, then
// the second-order one-sided zero-derivative closure v = (4a - b) / 3 on the
// face. Mirrors the solver's operator split so a degenerate profile must
// reproduce it to machine precision.
pnlab::Field heat_step_reference(const pnlab::Field& u, const pnlab::BoundaryData& g,
                                 double dt, double t_next);

// The sup-convolution definition evaluated by a literal double loop over
// tangential offset and time offset, with the two penalty subtractions in
// the same association order as the library's separable passes.
pnlab::SpaceTimeField sup_convolution_literal(const pnlab::SpaceTimeField& u, double delta);

}  // namespace oracle
