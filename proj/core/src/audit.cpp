#include "pnlab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pnlab {

SpaceTimeField space_time_from(const Trajectory& traj) {
  if (traj.snapshots.size() < 2)
    throw Error(ErrorCode::ConfigInvalid, "need at least two snapshots");
  double dt = traj.times[1] - traj.times[0];
  for (size_t k = 1; k < traj.times.size(); ++k)
    if (std::abs(traj.times[k] - traj.times[k - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw Error(ErrorCode::ConfigInvalid, "snapshots are not evenly spaced");
  SpaceTimeField f;
  f.grid = traj.grid;
  f.dt = dt;
  f.steps = static_cast<int>(traj.snapshots.size());
  f.v.reserve(static_cast<size_t>(f.steps) * f.slab_size());
  for (const Field& s : traj.snapshots) f.v.insert(f.v.end(), s.v.begin(), s.v.end());
  return f;
}

SpaceTimeField space_time_from(const HalfGrid& grid, int steps, double dt,
                               const std::function<double(double, double, double)>& fn) {
  if (steps < 1 || !(dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "bad space-time shape");
  SpaceTimeField f;
  f.grid = grid;
  f.dt = dt;
  f.steps = steps;
  f.v.resize(static_cast<size_t>(steps) * grid.size());
  for (int k = 0; k < steps; ++k)
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i)
        f.at(k, i, j) = fn(grid.x1(i), grid.x2(j), k * dt);
  return f;
}

SpaceTimeField tangential_sup_convolution(const SpaceTimeField& u, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::ConfigInvalid, "delta must be positive");
  const HalfGrid& g = u.grid;
  SpaceTimeField mid = u, out = u;
  // Tangential pass: for each slab and column, sup over rows with penalty.
  for (int k = 0; k < u.steps; ++k)
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        double best = -1e300;
        for (int y = 0; y < g.ny; ++y) {
          double d = g.x2(j) - g.x2(y);
          best = std::max(best, u.at(k, i, y) - d * d / (2.0 * delta));
        }
        mid.at(k, i, j) = best;
      }
  // Temporal pass over the tangential envelopes.
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < u.steps; ++k) {
        double best = -1e300;
        for (int s = 0; s < u.steps; ++s) {
          double d = u.time(k) - u.time(s);
          best = std::max(best, mid.at(s, i, j) - d * d / (2.0 * delta));
        }
        out.at(k, i, j) = best;
      }
  return out;
}

SpaceTimeField caloric_lift(const SpaceTimeField& trace, double sub_dt) {
  const HalfGrid& g = trace.grid;
  if (trace.steps < 2) throw Error(ErrorCode::ConfigInvalid, "trace needs at least two slabs");
  double hmin = std::min(g.hx, g.hy);
  double cfl = 0.25 * hmin * hmin;
  if (sub_dt > cfl * (1.0 + 1e-12))
    throw Error(ErrorCode::CflViolation, "substep " + std::to_string(sub_dt) +
                                             " exceeds 0.25*min(h)^2=" + std::to_string(cfl));
  int m = sub_dt > 0.0 ? static_cast<int>(std::ceil(trace.dt / sub_dt - 1e-12))
                       : static_cast<int>(std::ceil(trace.dt / cfl - 1e-12));
  m = std::max(m, 1);
  double dts = trace.dt / m;

  SpaceTimeField out = trace;
  Field cur(g), nxt(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) cur.at(i, j) = trace.at(0, i, j);

  auto boundary = [&](int k, double frac, Field& f) {
    // Parabolic boundary: every non-interior node, the face column included.
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.kind(i, j) != NodeKind::Interior) {
          double a = trace.at(k - 1, i, j), b = trace.at(k, i, j);
          f.at(i, j) = a + (b - a) * frac;
        }
  };

  for (int k = 1; k < trace.steps; ++k) {
    for (int s = 1; s <= m; ++s) {
      for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) nxt.at(i, j) = cur.at(i, j) + dts * laplacian5(cur, i, j);
      boundary(k, static_cast<double>(s) / m, nxt);
      std::swap(cur, nxt);
    }
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out.at(k, i, j) = cur.at(i, j);
  }
  return out;
}

double comparison_gap(const SpaceTimeField& sub, const SpaceTimeField& super) {
  const HalfGrid& g = sub.grid;
  if (g.nx != super.grid.nx || g.ny != super.grid.ny || sub.steps != super.steps ||
      std::abs(sub.dt - super.dt) > 1e-12 * std::max(1.0, sub.dt))
    throw Error(ErrorCode::ConfigInvalid, "mismatched space-time blocks");

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (sub.at(0, i, j) > super.at(0, i, j) + 1e-12)
        throw Error(ErrorCode::BoundaryOrderViolation,
                    "initial slab out of order at node (" + std::to_string(i) + "," +
                        std::to_string(j) + ")");
  for (int k = 1; k < sub.steps; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.kind(i, j) == NodeKind::Dirichlet && sub.at(k, i, j) > super.at(k, i, j) + 1e-12)
          throw Error(ErrorCode::BoundaryOrderViolation,
                      "dirichlet data out of order at slab " + std::to_string(k));

  double gap = -1e300;
  for (int k = 1; k < sub.steps; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.kind(i, j) != NodeKind::Dirichlet)
          gap = std::max(gap, sub.at(k, i, j) - super.at(k, i, j));
  return gap;
}

SlopeAuditReport dynamic_slope_audit(const FaceHistory& face, const HomProblem& pb,
                                     double tol_rate) {
  const int ny = face.ny;
  const int steps = face.steps();
  if (ny != pb.grid.ny) throw Error(ErrorCode::ConfigInvalid, "face history does not match grid");
  if (steps < 2 || !(face.dt > 0.0))
    throw Error(ErrorCode::ConfigInvalid, "face history too short");
  const double m = pb.profile.min(), M = pb.profile.max(), mean = pb.profile.mean();
  const double dt = face.dt;

  SlopeAuditReport r;
  r.tol_rate = tol_rate > 0.0
                   ? tol_rate
                   : 10.0 * (std::min(pb.grid.hx, pb.grid.hy) + dt);

  auto val = [&](int k, int j) { return face.values[static_cast<size_t>(k) * ny + j]; };
  auto flx = [&](int k, int j) { return face.flux[static_cast<size_t>(k) * ny + j]; };
  auto fct = [&](int k, int j) { return face.facet[static_cast<size_t>(k) * ny + j] != 0; };

  for (int k = 1; k < steps; ++k) {
    for (int j = 1; j <= ny - 2; ++j) {
      double rate = (val(k, j) - val(k - 1, j)) / dt;
      if (rate > r.tol_rate) {
        ++r.events_transversal;
        double short_by = (mean - 1e-9) - flx(k, j);
        if (short_by > 0.0) {
          ++r.violations_transversal;
          r.worst_transversal = std::max(r.worst_transversal, short_by);
        }
      } else if (rate < -r.tol_rate) {
        ++r.events_transversal;
        double excess = flx(k, j) - (mean + 1e-9);
        if (excess > 0.0) {
          ++r.violations_transversal;
          r.worst_transversal = std::max(r.worst_transversal, excess);
        }
      }
    }
    // Facet components strictly inside the face, using the flags this step
    // classified with.
    int j = 1;
    while (j <= ny - 2) {
      if (!fct(k, j)) {
        ++j;
        continue;
      }
      int j0 = j;
      while (j <= ny - 2 && fct(k, j)) ++j;
      int j1 = j - 1;
      if (j0 == 1 || j1 == ny - 2) continue;
      double mean_rate = 0.0, peak = -1e300, trough = 1e300;
      for (int q = j0; q <= j1; ++q) {
        mean_rate += (val(k, q) - val(k - 1, q)) / dt;
        peak = std::max(peak, flx(k, q));
        trough = std::min(trough, flx(k, q));
      }
      mean_rate /= (j1 - j0 + 1);
      if (mean_rate > r.tol_rate) {
        ++r.events_laminar;
        double short_by = (M - 1e-9) - peak;
        if (short_by > 0.0) {
          ++r.violations_laminar;
          r.worst_laminar = std::max(r.worst_laminar, short_by);
        }
      } else if (mean_rate < -r.tol_rate) {
        ++r.events_laminar;
        double excess = trough - (m + 1e-9);
        if (excess > 0.0) {
          ++r.violations_laminar;
          r.worst_laminar = std::max(r.worst_laminar, excess);
        }
      }
    }
  }
  return r;
}

}  // namespace pnlab
