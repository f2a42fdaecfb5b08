#include "pnlab/homogenized.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pnlab {

double HomProblem::step_dt() const {
  double h = std::min(grid.hx, grid.hy);
  return dt > 0.0 ? dt : 0.25 * h * h;
}

void HomProblem::validate() const {
  if (grid.nx < 3 || grid.ny < 3) throw Error(ErrorCode::ConfigInvalid, "grid not built");
  if (!g) throw Error(ErrorCode::ConfigInvalid, "missing dirichlet data");
  double h = std::min(grid.hx, grid.hy);
  if (step_dt() > 0.25 * h * h * (1.0 + 1e-12))
    throw Error(ErrorCode::CflViolation, "dt=" + std::to_string(step_dt()) +
                                             " exceeds 0.25*min(h)^2=" +
                                             std::to_string(0.25 * h * h));
}

namespace {

void classify(const Field& u, double tol_facet, std::vector<unsigned char>& facet) {
  const HalfGrid& g = u.grid;
  facet.assign(g.face_count(), 0);
  for (int j = 1; j <= g.ny - 2; ++j)
    facet[j - 1] = std::abs(tangential_gradient(u, j)) <= tol_facet ? 1 : 0;
}

void number_components(BoundaryFluxState& fs) {
  fs.component.assign(fs.facet.size(), -1);
  int id = -1;
  bool in_run = false;
  for (size_t k = 0; k < fs.facet.size(); ++k) {
    if (fs.facet[k]) {
      if (!in_run) {
        ++id;
        in_run = true;
      }
      fs.component[k] = id;
    } else {
      in_run = false;
    }
  }
}

}  // namespace

HomState hom_state_from_field(const Field& u0, const HomProblem& pb) {
  pb.validate();
  const double m = pb.profile.min(), M = pb.profile.max(), mean = pb.profile.mean();
  HomState s;
  s.u = u0;
  s.u.grid = pb.grid;
  classify(s.u, pb.facet_tol(), s.flux.facet);
  s.flux.lambda.assign(pb.grid.face_count(), mean);
  for (int j = 1; j <= pb.grid.ny - 2; ++j)
    if (s.flux.facet[j - 1]) s.flux.lambda[j - 1] = std::clamp(normal_derivative(s.u, j), m, M);
  number_components(s.flux);
  return s;
}

HomState step_homogenized(const HomState& s, const HomProblem& pb) {
  pb.validate();
  const HalfGrid& g = pb.grid;
  const double m = pb.profile.min(), M = pb.profile.max(), mean = pb.profile.mean();
  const double dt = pb.step_dt();
  const double t_next = s.u.time + dt;

  HomState out;
  out.u = Field(g);
  out.u.time = t_next;
  classify(s.u, pb.facet_tol(), out.flux.facet);
  out.flux.lambda.assign(g.face_count(), mean);

  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) out.u.at(i, j) = s.u.at(i, j) + dt * laplacian5(s.u, i, j);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.kind(i, j) == NodeKind::Dirichlet) out.u.at(i, j) = pb.g(g.x1(i), g.x2(j), t_next);

  const double c = 2.0 * g.hx / 3.0;  // value shift per unit of flux change
  for (int j = 1; j <= g.ny - 2; ++j) {
    double a = out.u.at(1, j), b = out.u.at(2, j);
    double lambda, v;
    if (!out.flux.facet[j - 1]) {
      lambda = mean;
      v = (4.0 * a - b - 2.0 * g.hx * mean) / 3.0;
    } else {
      double v_pin = s.u.at(0, j);
      double lam_el = (-3.0 * v_pin + 4.0 * a - b) / (2.0 * g.hx);
      if (lam_el >= m && lam_el <= M) {
        lambda = lam_el;
        v = v_pin;
      } else if (lam_el > M) {
        lambda = M;
        v = v_pin + c * (lam_el - M);  // slip up
      } else {
        lambda = m;
        v = v_pin + c * (lam_el - m);  // slip down
      }
    }
    if (lambda < m - 1e-9 || lambda > M + 1e-9)
      throw Error(ErrorCode::FluxOutOfRange,
                  "flux " + std::to_string(lambda) + " escaped [" + std::to_string(m) + ", " +
                      std::to_string(M) + "] at face row " + std::to_string(j));
    out.flux.lambda[j - 1] = lambda;
    out.u.at(0, j) = v;
  }
  number_components(out.flux);
  return out;
}

ContactSet contact_set(const Field& u, const BoundaryFluxState& flux, const HomProblem& pb,
                       double tol) {
  const HalfGrid& g = pb.grid;
  const double mean = pb.profile.mean();
  if (static_cast<int>(flux.lambda.size()) != g.face_count())
    throw Error(ErrorCode::ConfigInvalid, "flux record does not match grid");
  ContactSet cs;
  for (int j = 1; j <= g.ny - 2; ++j) {
    if (std::abs(flux.lambda[j - 1] - mean) <= 3.0 * tol) continue;
    double slope = std::abs(tangential_gradient(u, j));
    if (slope > pb.facet_tol())
      throw Error(ErrorCode::ContainmentViolation,
                  "off-mean flux on a slanted node: row " + std::to_string(j) + " has |d'u|=" +
                      std::to_string(slope));
    cs.nodes.push_back(j);
  }
  cs.measure = cs.nodes.size() * g.hy;
  for (size_t k = 0; k < cs.nodes.size();) {
    size_t e = k;
    while (e + 1 < cs.nodes.size() && cs.nodes[e + 1] == cs.nodes[e] + 1) ++e;
    cs.components.emplace_back(cs.nodes[k], cs.nodes[e]);
    k = e + 1;
  }
  return cs;
}

HomTrajectory solve_homogenized_parabolic(const HomProblem& pb, const Field& u0, double t_end) {
  pb.validate();
  if (!(t_end > 0.0)) throw Error(ErrorCode::ConfigInvalid, "t_end must be positive");
  const HalfGrid& g = pb.grid;

  int n = static_cast<int>(std::ceil(t_end / pb.step_dt() - 1e-12));
  HomProblem run = pb;
  run.dt = t_end / n;
  int stride = std::max(1, n / 64);

  HomState s = hom_state_from_field(u0, run);
  s.u.time = 0.0;

  HomTrajectory out;
  out.traj.grid = g;
  out.traj.dt = run.dt;
  out.traj.snapshot_stride = stride;
  out.traj.face.ny = g.ny;
  out.traj.face.dt = run.dt;

  auto record = [&](const HomState& st) {
    for (int j = 0; j < g.ny; ++j) {
      out.traj.face.values.push_back(st.u.at(0, j));
      bool face = j >= 1 && j <= g.ny - 2;
      out.traj.face.flux.push_back(face ? st.flux.lambda[j - 1] : 0.0);
      out.traj.face.facet.push_back(face ? st.flux.facet[j - 1] : 0);
    }
  };

  out.traj.times.push_back(0.0);
  out.traj.snapshots.push_back(s.u);
  out.contacts.push_back(contact_set(s.u, s.flux, run));
  record(s);
  out.traj.max_update.reserve(n);
  for (int k = 1; k <= n; ++k) {
    HomState nx = step_homogenized(s, run);
    double upd = 0.0;
    for (int idx = 0; idx < g.size(); ++idx)
      upd = std::max(upd, std::abs(nx.u.v[idx] - s.u.v[idx]));
    out.traj.max_update.push_back(upd);
    s = std::move(nx);
    record(s);
    if (k % stride == 0 || k == n) {
      out.traj.times.push_back(k * run.dt);
      out.traj.snapshots.push_back(s.u);
      // Contact sets describe the snapshot as it stands, so reclassify it
      // instead of pairing the post-step field with the entry-time record.
      HomState snap = hom_state_from_field(s.u, run);
      out.contacts.push_back(contact_set(snap.u, snap.flux, run));
    }
  }
  return out;
}

Field extremal_homogenized(const HomProblem& pb, ExtremalSide side, double tol, double max_time) {
  pb.validate();
  const HalfGrid& g = pb.grid;
  const double sgn = side == ExtremalSide::MinSuper ? -1.0 : 1.0;
  const double f_sup = pb.profile.sup_abs();

  double g_sup = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.kind(i, j) == NodeKind::Dirichlet)
        g_sup = std::max(g_sup, std::abs(pb.g(g.x1(i), g.x2(j), 0.0)));

  HomProblem frozen = pb;
  BoundaryData g0 = pb.g;
  frozen.g = [g0](double x1, double x2, double) { return g0(x1, x2, 0.0); };

  HomState s;
  s.u = Field(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      s.u.at(i, j) = sgn * (g_sup + 1.0 + f_sup * (1.0 - g.x1(i)));
  s = hom_state_from_field(s.u, frozen);
  s.u.time = 0.0;

  const double dt = frozen.step_dt();
  long steps = static_cast<long>(std::ceil(max_time / dt));
  double last = 0.0;
  for (long k = 1; k <= steps; ++k) {
    HomState nx = step_homogenized(s, frozen);
    double upd = 0.0;
    for (int idx = 0; idx < g.size(); ++idx) {
      double d = nx.u.v[idx] - s.u.v[idx];
      if (sgn * d > 1e-12)
        throw Error(ErrorCode::MonotonicityViolation,
                    "relaxation reversed at node " + std::to_string(idx) + " by " +
                        std::to_string(sgn * d));
      upd = std::max(upd, std::abs(d));
    }
    s = std::move(nx);
    last = upd;
    if (upd <= tol * dt) {
      s.u.time = 0.0;
      return s.u;
    }
  }
  throw NonConverged("relaxation still moving after t=" + std::to_string(max_time), s.u.v,
                     last / dt);
}

ExtremalAuditReport audit_extremal_conditions(const Field& u, const HomProblem& pb, double tol) {
  pb.validate();
  const HalfGrid& g = pb.grid;
  const double M = pb.profile.max(), mean = pb.profile.mean();

  ExtremalAuditReport r;
  r.worst_stability = 0.0;
  r.worst_flux = -1e300;
  for (int j = 1; j <= g.ny - 2; ++j) {
    double d1 = normal_derivative(u, j);
    double slope = std::abs(tangential_gradient(u, j));
    double s = std::min(d1 - mean, slope);
    if (std::abs(s) > std::abs(r.worst_stability)) {
      r.worst_stability = s;
      r.stability_row = j;
    }
    if (d1 - M > r.worst_flux) {
      r.worst_flux = d1 - M;
      r.flux_row = j;
    }
  }
  r.stability_ok = std::abs(r.worst_stability) <= tol;
  r.flux_bound_ok = r.worst_flux <= tol;

  // Facet components of the candidate itself; a component is audited only if
  // it stays clear of both ends of the face.
  std::vector<unsigned char> facet;
  classify(u, pb.facet_tol(), facet);
  r.worst_saturation = 0.0;
  r.saturation_ok = true;
  int j = 1;
  while (j <= g.ny - 2) {
    if (!facet[j - 1]) {
      ++j;
      continue;
    }
    int j0 = j;
    while (j <= g.ny - 2 && facet[j - 1]) ++j;
    int j1 = j - 1;
    if (j0 == 1 || j1 == g.ny - 2) {
      ++r.components_exempt;
      continue;
    }
    ++r.components_checked;
    double peak = -1e300;
    for (int q = j0; q <= j1; ++q) peak = std::max(peak, normal_derivative(u, q));
    double deficit = M - peak;
    if (deficit > r.worst_saturation) {
      r.worst_saturation = deficit;
      r.saturation_component = {j0, j1};
    }
    if (deficit > tol) r.saturation_ok = false;
  }
  if (r.worst_flux == -1e300) r.worst_flux = 0.0;
  return r;
}

}  // namespace pnlab
