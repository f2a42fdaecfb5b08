#include "pnlab/epsilon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pnlab {

void EpsProblem::validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::ConfigInvalid, "epsilon must be positive");
  if (grid.nx < 3 || grid.ny < 3) throw Error(ErrorCode::ConfigInvalid, "grid not built");
  if (!g) throw Error(ErrorCode::ConfigInvalid, "missing dirichlet data");
}

void apply_dirichlet(Field& u, const BoundaryData& g, double t) {
  const HalfGrid& gr = u.grid;
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      if (gr.kind(i, j) == NodeKind::Dirichlet) u.at(i, j) = g(gr.x1(i), gr.x2(j), t);
}

double face_scalar_solve(const PeriodicProfile& f, double hx, double a, double b, double shift,
                         double scale, double v0) {
  auto phi = [&](double v) { return (-3.0 * v + 4.0 * a - b) / (2.0 * hx) - f((v + shift) / scale); };

  double fv0 = phi(v0);
  if (fv0 == 0.0) return v0;

  // Walk in the direction that shrinks phi toward zero through the dominant
  // linear term: right if phi > 0, left if phi < 0. Steps of scale/16 cannot
  // jump a full oscillation, so the first sign change brackets the root
  // nearest v0 on that side.
  const double dir = fv0 > 0.0 ? 1.0 : -1.0;
  double step = scale / 16.0;
  double lo = v0, flo = fv0, hi = v0, fhi = fv0;
  bool bracketed = false;
  for (int k = 0; k < 200000; ++k) {
    double vn = hi + dir * step;
    double fn = phi(vn);
    if (fn == 0.0) return vn;
    if ((fn > 0.0) != (fv0 > 0.0)) {
      lo = hi;
      flo = fhi;
      hi = vn;
      fhi = fn;
      bracketed = true;
      break;
    }
    hi = vn;
    fhi = fn;
    if (k % 32 == 31) step *= 2.0;  // pure linear stretches: accelerate
  }
  if (!bracketed) throw Error(ErrorCode::NoRoot, "face flux relation has no reachable root");
  if (lo > hi) {
    std::swap(lo, hi);
    std::swap(flo, fhi);
  }

  // Illinois refinement on [lo, hi]: secant candidate, stagnating side damped.
  for (int it = 0; it < 120 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    double v = (hi * flo - lo * fhi) / (flo - fhi);
    if (!(v > lo) || !(v < hi)) v = 0.5 * (lo + hi);
    double fv = phi(v);
    if (fv == 0.0) return v;
    if ((fv > 0.0) == (flo > 0.0)) {
      lo = v;
      flo = fv;
      fhi *= 0.5;
    } else {
      hi = v;
      fhi = fv;
      flo *= 0.5;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

static double interior_average(const Field& u, int i, int j) {
  const HalfGrid& g = u.grid;
  const double wx = g.hy * g.hy, wy = g.hx * g.hx;
  return (wx * (u.at(i - 1, j) + u.at(i + 1, j)) + wy * (u.at(i, j - 1) + u.at(i, j + 1))) /
         (2.0 * (wx + wy));
}

EllipticResidual elliptic_residual(const Field& u, const EpsProblem& pb) {
  pb.validate();
  const HalfGrid& g = u.grid;
  EllipticResidual r;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      r.interior = std::max(r.interior, std::abs(interior_average(u, i, j) - u.at(i, j)));
  for (int j = 1; j <= g.ny - 2; ++j) {
    double root = face_scalar_solve(pb.profile, g.hx, u.at(1, j), u.at(2, j), 0.0, pb.epsilon,
                                    u.at(0, j));
    r.face = std::max(r.face, std::abs(root - u.at(0, j)));
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.kind(i, j) == NodeKind::Dirichlet)
        r.dirichlet = std::max(r.dirichlet, std::abs(u.at(i, j) - pb.g(g.x1(i), g.x2(j), 0.0)));
  return r;
}

static double auto_omega(const HalfGrid& g) {
  double h = std::min(g.hx, g.hy);
  double w = 2.0 / (1.0 + std::sin(3.14159265358979323846 * h));
  return std::clamp(w, 1.0, 1.95);
}

Field solve_elliptic_eps(const EpsProblem& pb, const Field& init, double tol, int max_sweeps) {
  pb.validate();
  if (!(tol > 0.0)) throw Error(ErrorCode::ConfigInvalid, "tol must be positive");
  const HalfGrid& g = pb.grid;
  Field u = init;
  u.grid = g;
  if (static_cast<int>(u.v.size()) != g.size())
    throw Error(ErrorCode::ConfigInvalid, "init does not match grid");
  apply_dirichlet(u, pb.g, 0.0);

  const double omega = auto_omega(g);
  double last_update = 0.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Plain sweeps first so each face node settles onto the root branch next
    // to its start before over-relaxation begins to swing the interior.
    double w = sweep < 20 ? 1.0 : omega;
    double upd = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        double d = w * (interior_average(u, i, j) - u.at(i, j));
        u.at(i, j) += d;
        upd = std::max(upd, std::abs(d));
      }
    for (int j = 1; j <= g.ny - 2; ++j) {
      double v = face_scalar_solve(pb.profile, g.hx, u.at(1, j), u.at(2, j), 0.0, pb.epsilon,
                                   u.at(0, j));
      upd = std::max(upd, std::abs(v - u.at(0, j)));
      u.at(0, j) = v;
    }
    last_update = upd;
    if (upd <= tol && elliptic_residual(u, pb).max() <= 10.0 * tol) return u;
  }
  throw NonConverged("steady solve used up " + std::to_string(max_sweeps) + " sweeps", u.v,
                     last_update);
}

namespace {

struct StepScratch {
  double g_sup = 0.0;  // running sup of |g| over Dirichlet nodes and time
  double f_sup = 0.0;
  double g_pad = 0.0;  // extremal runs start one unit beyond the resting bound
};

// One forward-Euler step: interior update and Dirichlet refresh into nxt,
// then the scalar face solve against the fresh interior columns. Returns the
// max nodal change. Barrier screen: |u| may not exceed the comparison bound
// sup|g| + sup|f|*(1-x1) by more than 10%.
double parabolic_step(const EpsProblem& pb, const Field& cur, Field& nxt, double dt, double t_next,
                      StepScratch& sc) {
  const HalfGrid& g = pb.grid;
  double upd = 0.0;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      double d = dt * laplacian5(cur, i, j);
      nxt.at(i, j) = cur.at(i, j) + d;
      upd = std::max(upd, std::abs(d));
    }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.kind(i, j) == NodeKind::Dirichlet) {
        double gv = pb.g(g.x1(i), g.x2(j), t_next);
        sc.g_sup = std::max(sc.g_sup, std::abs(gv));
        upd = std::max(upd, std::abs(gv - cur.at(i, j)));
        nxt.at(i, j) = gv;
      }
  for (int j = 1; j <= g.ny - 2; ++j) {
    double v = face_scalar_solve(pb.profile, g.hx, nxt.at(1, j), nxt.at(2, j), 0.0, pb.epsilon,
                                 cur.at(0, j));
    upd = std::max(upd, std::abs(v - cur.at(0, j)));
    nxt.at(0, j) = v;
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double bound = sc.g_sup + sc.g_pad + sc.f_sup * (1.0 - g.x1(i));
      double val = nxt.at(i, j);
      if (!std::isfinite(val) || std::abs(val) > 1.1 * bound + 1e-9)
        throw Error(ErrorCode::NonFinite, "trajectory left the comparison barrier at t=" +
                                              std::to_string(t_next));
    }
  nxt.time = t_next;
  return upd;
}

void record_face_row(FaceHistory& fh, const Field& u) {
  const HalfGrid& g = u.grid;
  for (int j = 0; j < g.ny; ++j) {
    fh.values.push_back(u.at(0, j));
    bool face = j >= 1 && j <= g.ny - 2;
    fh.flux.push_back(face ? normal_derivative(u, j) : 0.0);
    fh.facet.push_back(0);
  }
}

}  // namespace

Trajectory solve_parabolic_eps(const EpsProblem& pb, const Field& u0, double dt, double t_end,
                               const ParabolicOptions& opts) {
  pb.validate();
  const HalfGrid& g = pb.grid;
  double hmin = std::min(g.hx, g.hy);
  if (!(dt > 0.0) || dt > 0.25 * hmin * hmin * (1.0 + 1e-12))
    throw Error(ErrorCode::CflViolation,
                "dt=" + std::to_string(dt) + " exceeds 0.25*min(h)^2=" +
                    std::to_string(0.25 * hmin * hmin));
  if (!(t_end > 0.0)) throw Error(ErrorCode::ConfigInvalid, "t_end must be positive");

  // Land on t_end exactly; shrinking dt keeps the CFL bound.
  int n = static_cast<int>(std::ceil(t_end / dt - 1e-12));
  double dte = t_end / n;
  int stride = opts.snapshot_every > 0 ? opts.snapshot_every : std::max(1, n / 64);

  Trajectory tr;
  tr.grid = g;
  tr.dt = dte;
  tr.snapshot_stride = stride;
  Field cur = u0;
  cur.grid = g;
  cur.time = 0.0;
  if (static_cast<int>(cur.v.size()) != g.size())
    throw Error(ErrorCode::ConfigInvalid, "u0 does not match grid");
  Field nxt = cur;

  StepScratch sc;
  sc.f_sup = pb.profile.sup_abs();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.kind(i, j) == NodeKind::Dirichlet)
        sc.g_sup = std::max(sc.g_sup, std::abs(pb.g(g.x1(i), g.x2(j), 0.0)));

  tr.times.push_back(0.0);
  tr.snapshots.push_back(cur);
  if (opts.record_face) {
    tr.face.ny = g.ny;
    tr.face.dt = dte;
    record_face_row(tr.face, cur);
  }
  tr.max_update.reserve(n);
  for (int k = 1; k <= n; ++k) {
    double upd = parabolic_step(pb, cur, nxt, dte, k * dte, sc);
    tr.max_update.push_back(upd);
    std::swap(cur, nxt);
    if (opts.record_face) record_face_row(tr.face, cur);
    if (k % stride == 0 || k == n) {
      tr.times.push_back(k * dte);
      tr.snapshots.push_back(cur);
    }
  }
  return tr;
}

double energy_eps(const Field& u, const EpsProblem& pb) {
  pb.validate();
  const HalfGrid& g = u.grid;
  // Compensated sum: the per-sweep descent assertion in the minimizer works
  // at 1e-12, below what naive accumulation guarantees on larger grids.
  double e = 0.0, comp = 0.0;
  auto add = [&](double x) {
    double y = x - comp;
    double t = e + y;
    comp = (t - e) - y;
    e = t;
  };
  for (int j = 0; j < g.ny; ++j) {
    double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    for (int i = 0; i + 1 < g.nx; ++i) {
      double d = (u.at(i + 1, j) - u.at(i, j)) / g.hx;
      add(0.5 * d * d * g.hx * g.hy * wy);
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
    for (int j = 0; j + 1 < g.ny; ++j) {
      double d = (u.at(i, j + 1) - u.at(i, j)) / g.hy;
      add(0.5 * d * d * g.hx * g.hy * wx);
    }
  }
  for (int j = 0; j < g.ny; ++j) {
    double w = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    add(pb.epsilon * pb.profile.antiderivative(u.at(0, j) / pb.epsilon) * w * g.hy);
  }
  return e;
}

Field energy_gradient_eps(const Field& u, const EpsProblem& pb) {
  pb.validate();
  const HalfGrid& g = u.grid;
  Field out(g);
  for (int j = 0; j < g.ny; ++j) {
    double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    for (int i = 0; i < g.nx; ++i) {
      double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      double gr = 0.0;
      if (i > 0) gr += wy * (g.hy / g.hx) * (u.at(i, j) - u.at(i - 1, j));
      if (i + 1 < g.nx) gr += wy * (g.hy / g.hx) * (u.at(i, j) - u.at(i + 1, j));
      if (j > 0) gr += wx * (g.hx / g.hy) * (u.at(i, j) - u.at(i, j - 1));
      if (j + 1 < g.ny) gr += wx * (g.hx / g.hy) * (u.at(i, j) - u.at(i, j + 1));
      if (i == 0) gr += wy * g.hy * pb.profile(u.at(0, j) / pb.epsilon);
      out.at(i, j) = gr;
    }
  }
  return out;
}

Field solve_linear_neumann(const HalfGrid& g, const BoundaryData& bd, double lambda, double tol,
                           int max_sweeps) {
  if (g.nx < 3 || g.ny < 3) throw Error(ErrorCode::ConfigInvalid, "grid not built");
  if (!bd) throw Error(ErrorCode::ConfigInvalid, "missing dirichlet data");
  Field u(g);
  apply_dirichlet(u, bd, 0.0);
  const double omega = auto_omega(g);
  double last = 0.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double w = sweep < 5 ? 1.0 : omega;
    double upd = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        double d = w * (interior_average(u, i, j) - u.at(i, j));
        u.at(i, j) += d;
        upd = std::max(upd, std::abs(d));
      }
    for (int j = 1; j <= g.ny - 2; ++j) {
      double v = (4.0 * u.at(1, j) - u.at(2, j) - 2.0 * g.hx * lambda) / 3.0;
      upd = std::max(upd, std::abs(v - u.at(0, j)));
      u.at(0, j) = v;
    }
    last = upd;
    if (upd <= tol) return u;
  }
  throw NonConverged("constant-flux solve used up " + std::to_string(max_sweeps) + " sweeps", u.v,
                     last);
}

namespace {

// One-node section of the discrete energy at face row j, up to terms that do
// not involve v. Same stencil weights as energy_eps.
double face_local_energy(const Field& u, const EpsProblem& pb, int j, double v) {
  const HalfGrid& g = u.grid;
  double a = u.at(1, j), lo = u.at(0, j - 1), hi = u.at(0, j + 1);
  double e = 0.5 * (g.hy / g.hx) * (v - a) * (v - a);
  e += 0.25 * (g.hx / g.hy) * ((v - lo) * (v - lo) + (v - hi) * (v - hi));
  e += pb.epsilon * pb.profile.antiderivative(v / pb.epsilon) * g.hy;
  return e;
}

double face_descend(const Field& u, const EpsProblem& pb, int j) {
  const HalfGrid& g = u.grid;
  const double eps = pb.epsilon;
  // The section splits as kappa*(v - vertex)^2 + const + bounded oscillation
  // (the linear mean-flux part of F folds into the vertex). Outside
  // |v - vertex| <= sqrt(osc range / kappa) the quadratic alone exceeds the
  // vertex-basin ceiling, so the global section minimum lives inside that
  // window; sampling it beats any incumbent basin.
  const double A = 0.5 * g.hy / g.hx, B = 0.25 * g.hx / g.hy;
  const double kappa = A + 2.0 * B;
  double a = u.at(1, j), lo2 = u.at(0, j - 1), hi2 = u.at(0, j + 1);
  const double mean = pb.profile.mean();
  double vertex = (2.0 * A * a + 2.0 * B * (lo2 + hi2) - g.hy * mean) / (2.0 * kappa);
  double osc = 0.0;
  {
    double fmin = 1e300, fmax = -1e300;
    for (int k = 0; k <= 32; ++k) {
      double ft = pb.profile.antiderivative(k / 32.0) - mean * (k / 32.0);
      fmin = std::min(fmin, ft);
      fmax = std::max(fmax, ft);
    }
    osc = eps * g.hy * (fmax - fmin);
  }
  const double radius = std::sqrt(osc / kappa) + 1e-30;
  const double step = std::min(eps / 16.0, radius / 8.0);
  double vc = u.at(0, j);
  const double e_inc = face_local_energy(u, pb, j, vc);
  // Moves must buy a real energy decrement; ties keep the incumbent so
  // near-degenerate wells cannot trade the node back and forth forever.
  const double gate = 1e-15 * (1.0 + std::abs(e_inc));
  double best_v = vc, best_e = e_inc;
  const int half = static_cast<int>(radius / step) + 1;
  for (int k = -half; k <= half; ++k) {
    double v = vertex + k * step;
    double e = face_local_energy(u, pb, j, v);
    if (e < best_e) {
      best_e = e;
      best_v = v;
    }
  }
  double lo = best_v - step, hi = best_v + step;
  const double invgold = 0.6180339887498949;
  double x1 = hi - invgold * (hi - lo), x2 = lo + invgold * (hi - lo);
  double f1 = face_local_energy(u, pb, j, x1), f2 = face_local_energy(u, pb, j, x2);
  while (hi - lo > 1e-14) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invgold * (hi - lo);
      f1 = face_local_energy(u, pb, j, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invgold * (hi - lo);
      f2 = face_local_energy(u, pb, j, x2);
    }
  }
  double v = 0.5 * (lo + hi);
  double e_v = face_local_energy(u, pb, j, v);
  if (e_v <= best_e) {
    best_e = e_v;
    best_v = v;
  }
  return best_e < e_inc - gate ? best_v : vc;
}

}  // namespace

Field minimize_energy_eps(const EpsProblem& pb, double tol, int max_sweeps) {
  pb.validate();
  const HalfGrid& g = pb.grid;

  Field u = solve_linear_neumann(g, pb.g, pb.profile.mean(), std::min(tol, 1e-8));

  // Continuation: halve epsilon from 0.4 down to the target, warm starting
  // each stage, so the face nodes follow one branch of the oscillatory term
  // instead of being dropped into it cold.
  std::vector<double> ladder;
  for (double e = 0.4; e > pb.epsilon * (1.0 + 1e-9); e *= 0.5) ladder.push_back(e);
  ladder.push_back(pb.epsilon);

  double last = 0.0;
  for (double eps_stage : ladder) {
    EpsProblem stage = pb;
    stage.epsilon = eps_stage;
    double e_prev = energy_eps(u, stage);
    bool done = false;
    for (int sweep = 0; sweep < max_sweeps && !done; ++sweep) {
      double upd = 0.0;
      for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
          double v = interior_average(u, i, j);
          upd = std::max(upd, std::abs(v - u.at(i, j)));
          u.at(i, j) = v;
        }
      for (int j = 1; j <= g.ny - 2; ++j) {
        double v = face_descend(u, stage, j);
        upd = std::max(upd, std::abs(v - u.at(0, j)));
        u.at(0, j) = v;
      }
      double e_now = energy_eps(u, stage);
      if (e_now > e_prev + 1e-12)
        throw Error(ErrorCode::MonotonicityViolation,
                    "energy rose during descent sweep " + std::to_string(sweep));
      e_prev = e_now;
      last = upd;
      done = upd <= tol;
    }
    if (!done)
      throw NonConverged("energy descent used up " + std::to_string(max_sweeps) + " sweeps", u.v,
                         last);
  }
  return u;
}

Field extremal_steady_eps(const EpsProblem& pb, ExtremalSide side, double tol, double max_time) {
  pb.validate();
  const HalfGrid& g = pb.grid;
  const double sgn = side == ExtremalSide::MinSuper ? -1.0 : 1.0;

  StepScratch sc;
  sc.f_sup = pb.profile.sup_abs();
  sc.g_pad = 1.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.kind(i, j) == NodeKind::Dirichlet)
        sc.g_sup = std::max(sc.g_sup, std::abs(pb.g(g.x1(i), g.x2(j), 0.0)));

  // Start below (MinSuper) or above (MaxSub) every steady state: an affine
  // barrier whose face slope beats the flux range outright. The rising flow
  // stops at the first steady state it meets, which is the smallest one; the
  // falling flow mirrors that.
  Field cur(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      cur.at(i, j) = sgn * (sc.g_sup + 1.0 + sc.f_sup * (1.0 - g.x1(i)));
  Field nxt = cur;

  EpsProblem frozen = pb;
  BoundaryData g0 = pb.g;
  frozen.g = [g0](double x1, double x2, double) { return g0(x1, x2, 0.0); };

  double hmin = std::min(g.hx, g.hy);
  double dt = 0.25 * hmin * hmin;
  long steps = static_cast<long>(std::ceil(max_time / dt));
  double last = 0.0;
  for (long k = 1; k <= steps; ++k) {
    double upd = parabolic_step(frozen, cur, nxt, dt, k * dt, sc);
    for (int idx = 0; idx < g.size(); ++idx) {
      double d = nxt.v[idx] - cur.v[idx];
      if (sgn * d > 1e-12)
        throw Error(ErrorCode::MonotonicityViolation,
                    "relaxation reversed at node " + std::to_string(idx) + " by " +
                        std::to_string(sgn * d));
    }
    std::swap(cur, nxt);
    last = upd;
    if (upd <= tol * dt) {
      cur.time = 0.0;
      return cur;
    }
  }
  throw NonConverged("relaxation still moving after t=" + std::to_string(max_time), cur.v,
                     last / dt);
}

}  // namespace pnlab
