#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pnlab/epsilon.hpp"
#include "pnlab/homogenized.hpp"

using namespace pnlab;

namespace {

Field zero(const HalfGrid& g) {
  return field_from(g, [](double, double) { return 0.0; });
}

double sup_diff(const Field& a, const Field& b) {
  double d = 0.0;
  for (size_t k = 0; k < a.v.size(); ++k) d = std::max(d, std::abs(a.v[k] - b.v[k]));
  return d;
}

double ramp(double t, double t0) { return t <= 0.0 ? 0.0 : (t >= t0 ? 1.0 : t / t0); }

}  // namespace

TEST_CASE("problem validation catches bad setups and fills defaults") {
  HalfGrid g = build_half_grid(9, 9);
  BoundaryData bd = [](double, double, double) { return 0.0; };

  HomProblem pb{PeriodicProfile::sine(1.0), g, bd, 0.0, 0.0};
  CHECK(pb.facet_tol() == doctest::Approx(10.0 * g.hy).epsilon(1e-15));
  CHECK(pb.step_dt() == doctest::Approx(0.25 * g.hx * g.hx).epsilon(1e-15));
  pb.validate();

  HomProblem custom{PeriodicProfile::sine(1.0), g, bd, 0.03, 1e-4};
  CHECK(custom.facet_tol() == 0.03);
  CHECK(custom.step_dt() == 1e-4);

  HomProblem coarse_dt{PeriodicProfile::sine(1.0), g, bd, 0.0, 0.1};
  CHECK_THROWS_AS(coarse_dt.validate(), Error);
  HomProblem no_g{PeriodicProfile::sine(1.0), g, nullptr, 0.0, 0.0};
  CHECK_THROWS_AS(no_g.validate(), Error);
}

TEST_CASE("zero profile stepping is plain heat flow") {
  HalfGrid g = build_half_grid(9, 9);
  BoundaryData bd = [](double x1, double x2, double t) { return 0.2 * x1 * x2 + 0.1 * t; };
  HomProblem pb{PeriodicProfile::constant(0.0), g, bd, 0.0, 0.0};

  Field u0 = field_from(g, [](double x1, double x2) { return 0.05 * x2 * x2 + 0.1 * x1; });
  apply_dirichlet(u0, bd, 0.0);
  for (int j = 1; j <= g.ny - 2; ++j) u0.at(0, j) = (4.0 * u0.at(1, j) - u0.at(2, j)) / 3.0;

  double dt = pb.step_dt();
  int n = 25;
  HomTrajectory tr = solve_homogenized_parabolic(pb, u0, n * dt);
  REQUIRE(tr.traj.snapshots.size() == static_cast<size_t>(n + 1));
  REQUIRE(tr.contacts.size() == tr.traj.snapshots.size());

  Field ref = u0;
  for (int k = 1; k <= n; ++k) {
    ref = oracle::heat_step_reference(ref, bd, dt, k * dt);
    CHECK(sup_diff(tr.traj.snapshots[k], ref) < 1e-12);
  }

  // degenerate band means the contact set is empty throughout
  for (const auto& cs : tr.contacts) CHECK(cs.nodes.empty());
}

TEST_CASE("one step hits each branch of the stick slip selection") {
  HalfGrid g = build_half_grid(5, 7);
  PeriodicProfile f = PeriodicProfile::sine(1.0);  // band [-1, 1], mean 0
  const double c = 2.0 * g.hx / 3.0;

  SUBCASE("in-band slab sticks exactly") {
    double al = 0.1, be = 0.3;
    BoundaryData bd = [=](double x1, double, double) { return al + be * x1; };
    HomProblem pb{f, g, bd, 0.0, 0.0};
    HomState s = hom_state_from_field(field_from(g, [=](double x1, double) { return al + be * x1; }), pb);
    HomState nx = step_homogenized(s, pb);
    for (size_t k = 0; k < s.u.v.size(); ++k) CHECK(nx.u.v[k] == s.u.v[k]);
    for (int j = 1; j <= g.ny - 2; ++j) {
      CHECK(nx.flux.facet[j - 1] == 1);
      CHECK(nx.flux.lambda[j - 1] == doctest::Approx(be).epsilon(1e-13));
    }
  }

  SUBCASE("overdriven slab slips up at the cap") {
    double al = -0.2, be = 1.7;
    BoundaryData bd = [=](double x1, double, double) { return al + be * x1; };
    HomProblem pb{f, g, bd, 0.0, 0.0};
    HomState s = hom_state_from_field(field_from(g, [=](double x1, double) { return al + be * x1; }), pb);
    HomState nx = step_homogenized(s, pb);
    for (int j = 1; j <= g.ny - 2; ++j) {
      CHECK(nx.flux.lambda[j - 1] == 1.0);
      // value moves by the flux surplus times the stencil leverage
      CHECK(nx.u.at(0, j) == doctest::Approx(al + c * (be - 1.0)).epsilon(1e-12));
    }
  }

  SUBCASE("underdriven slab slips down at the floor") {
    double al = 0.4, be = -1.6;
    BoundaryData bd = [=](double x1, double, double) { return al + be * x1; };
    HomProblem pb{f, g, bd, 0.0, 0.0};
    HomState s = hom_state_from_field(field_from(g, [=](double x1, double) { return al + be * x1; }), pb);
    HomState nx = step_homogenized(s, pb);
    for (int j = 1; j <= g.ny - 2; ++j) {
      CHECK(nx.flux.lambda[j - 1] == -1.0);
      CHECK(nx.u.at(0, j) == doctest::Approx(al + c * (be + 1.0)).epsilon(1e-12));
    }
  }

  SUBCASE("slanted trace runs free at the mean flux") {
    BoundaryData bd = [](double, double x2, double) { return x2; };
    HomProblem pb{f, g, bd, 0.0, 0.0};
    HomState s = hom_state_from_field(field_from(g, [](double, double x2) { return x2; }), pb);
    HomState nx = step_homogenized(s, pb);
    for (int j = 1; j <= g.ny - 2; ++j) {
      CHECK(nx.flux.facet[j - 1] == 0);
      CHECK(nx.flux.lambda[j - 1] == 0.0);
      CHECK(nx.u.at(0, j) == doctest::Approx(g.x2(j)).epsilon(1e-13));
    }
  }
}

TEST_CASE("state classification clamps facet flux and numbers components") {
  HalfGrid g = build_half_grid(5, 9);
  PeriodicProfile f = PeriodicProfile::sine(0.5);  // band [-0.5, 0.5]
  BoundaryData bd = [](double, double, double) { return 0.0; };
  HomProblem pb{f, g, bd, 0.05, 0.0};

  // flat low rows carry a too-steep normal slope, upper rows are slanted
  Field u = field_from(g, [&](double x1, double x2) {
    return x2 < -0.2 ? 0.8 * x1 : 0.5 * x2;
  });
  HomState s = hom_state_from_field(u, pb);

  int facet_rows = 0;
  for (int j = 1; j <= g.ny - 2; ++j) {
    if (s.flux.facet[j - 1]) {
      ++facet_rows;
      // the raw one-sided derivative 0.8 clamps to the band edge
      CHECK(s.flux.lambda[j - 1] == 0.5);
      CHECK(s.flux.component[j - 1] >= 0);
    } else {
      CHECK(s.flux.lambda[j - 1] == f.mean());
      CHECK(s.flux.component[j - 1] == -1);
    }
  }
  CHECK(facet_rows >= 2);

  SUBCASE("component ids number consecutive runs once each") {
    BoundaryFluxState fs = s.flux;
    int max_id = -1;
    for (int id : fs.component) max_id = std::max(max_id, id);
    for (int id = 0; id <= max_id; ++id) {
      int first = -1, last = -1;
      for (size_t k = 0; k < fs.component.size(); ++k)
        if (fs.component[k] == id) {
          if (first < 0) first = static_cast<int>(k);
          last = static_cast<int>(k);
        }
      REQUIRE(first >= 0);
      for (int k = first; k <= last; ++k) CHECK(fs.component[k] == id);
    }
  }
}

TEST_CASE("contact set collects off-mean rows and guards containment") {
  HalfGrid g = build_half_grid(5, 9);
  PeriodicProfile f = PeriodicProfile::sine(1.0);
  BoundaryData bd = [](double x1, double, double) { return 0.5 * x1; };
  HomProblem pb{f, g, bd, 0.0, 0.0};

  Field slab = field_from(g, [](double x1, double) { return 0.5 * x1; });
  HomState s = hom_state_from_field(slab, pb);
  ContactSet cs = contact_set(s.u, s.flux, pb);
  CHECK(static_cast<int>(cs.nodes.size()) == g.face_count());
  CHECK(cs.components.size() == 1);
  CHECK(cs.components[0].first == 1);
  CHECK(cs.components[0].second == g.ny - 2);
  CHECK(cs.measure == doctest::Approx(g.face_count() * g.hy).epsilon(1e-14));

  SUBCASE("off-mean flux on a slanted row is a scheme invariant breach") {
    Field tilted = field_from(g, [](double, double x2) { return x2; });
    BoundaryFluxState fake;
    fake.lambda.assign(g.face_count(), 0.9);
    fake.facet.assign(g.face_count(), 1);
    fake.component.assign(g.face_count(), 0);
    try {
      contact_set(tilted, fake, pb);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ContainmentViolation);
    }
  }

  SUBCASE("mean flux everywhere gives the empty set") {
    Field tilted = field_from(g, [](double, double x2) { return x2; });
    HomState free_state = hom_state_from_field(tilted, pb);
    ContactSet empty = contact_set(free_state.u, free_state.flux, pb);
    CHECK(empty.nodes.empty());
    CHECK(empty.measure == 0.0);
  }
}

TEST_CASE("relaxed flow with in-band data decays and respects the flux band") {
  HalfGrid g = build_half_grid(17, 17);
  PeriodicProfile f = PeriodicProfile::sine(1.0);
  BoundaryData bd = [](double, double, double) { return 0.0; };
  HomProblem pb{f, g, bd, 0.0, 0.0};

  Field u0 = field_from(g, [](double x1, double) { return 0.5 * x1; });
  apply_dirichlet(u0, bd, 0.0);
  HomTrajectory tr = solve_homogenized_parabolic(pb, u0, 1.0);

  double late = 0.0;
  for (double v : tr.traj.final_state().v) late = std::max(late, std::abs(v));
  CHECK(late < 0.2);  // pulled toward the zero steady state

  const FaceHistory& fh = tr.traj.face;
  for (size_t k = 0; k < fh.flux.size(); ++k) {
    CHECK(fh.flux[k] >= -1.0 - 1e-9);
    CHECK(fh.flux[k] <= 1.0 + 1e-9);
  }

  SUBCASE("halving the step moves the trajectory by order dt") {
    HomProblem fine = pb;
    fine.dt = pb.step_dt() / 2.0;
    HomTrajectory tr2 = solve_homogenized_parabolic(fine, u0, 1.0);
    double d = sup_diff(tr.traj.final_state(), tr2.traj.final_state());
    CHECK(d <= 10.0 * pb.step_dt());
  }
}

TEST_CASE("up-driven slab tracks the fine-scale run while slipping at the cap") {
  // drive past the depinning threshold and compare against the oscillatory
  // solver at a fixed small epsilon over the same data and step
  HalfGrid g = build_half_grid(33, 17);
  PeriodicProfile f = PeriodicProfile::sine(0.0625);
  BoundaryData bd = [](double x1, double, double t) { return ramp(t, 0.2) * 0.4 * (1.0 + x1); };
  Field u0 = zero(g);

  HomProblem hpb{f, g, bd, 0.0, 0.0};
  HomTrajectory ht = solve_homogenized_parabolic(hpb, u0, 0.5);

  EpsProblem epb{f, 0.02, g, bd};
  Trajectory et = solve_parabolic_eps(epb, u0, ht.traj.dt, 0.5, {});

  CHECK(sup_diff(ht.traj.final_state(), et.final_state()) <= 5e-2);

  // the driven facet must actually slip at the saturated flux, not merely drift
  const FaceHistory& fh = ht.traj.face;
  const double M = f.max();
  long slipping = 0;
  for (int k = 1; k < fh.steps(); ++k) {
    bool any = false;
    for (int j = 1; j <= fh.ny - 2 && !any; ++j) {
      size_t idx = static_cast<size_t>(k) * fh.ny + j;
      if (fh.facet[idx] && std::abs(fh.flux[idx] - M) < 1e-12 &&
          fh.values[idx] > fh.values[idx - fh.ny])
        any = true;
    }
    if (any) ++slipping;
  }
  CHECK(slipping >= 1000);
}

TEST_CASE("extremal states of the limit problem") {
  HalfGrid g = build_half_grid(17, 17);

  SUBCASE("zero profile collapses both extremals onto the tilt") {
    HomProblem pb{PeriodicProfile::constant(0.0), g,
                  [](double, double x2, double) { return x2; }, 0.0, 0.0};
    Field lo = extremal_homogenized(pb, ExtremalSide::MinSuper, 1e-8);
    Field hi = extremal_homogenized(pb, ExtremalSide::MaxSub, 1e-8);
    Field tilt = field_from(g, [](double, double x2) { return x2; });
    CHECK(sup_diff(lo, tilt) < 1e-6);
    CHECK(sup_diff(hi, tilt) < 1e-6);
  }

  SUBCASE("a live band orders the extremals and passes the steady audit") {
    HomProblem pb{PeriodicProfile::sine(1.0), g,
                  [](double, double, double) { return 0.3; }, 0.0, 0.0};
    Field lo = extremal_homogenized(pb, ExtremalSide::MinSuper, 1e-8);
    Field hi = extremal_homogenized(pb, ExtremalSide::MaxSub, 1e-8);
    for (size_t k = 0; k < lo.v.size(); ++k) CHECK(hi.v[k] >= lo.v[k] - 1e-9);

    ExtremalAuditReport rep = audit_extremal_conditions(lo, pb, 1e-6);
    CHECK(rep.pass());
  }
}

TEST_CASE("steady audit flags the broken states it is built to catch") {
  HalfGrid g = build_half_grid(9, 9);
  PeriodicProfile f = PeriodicProfile::sine(1.0);
  BoundaryData bd = [](double, double, double) { return 0.0; };
  HomProblem pb{f, g, bd, 0.0, 0.0};

  SUBCASE("saturated slab passes with its end-touching component exempt") {
    Field u = field_from(g, [](double x1, double) { return 0.2 + 1.0 * x1; });
    ExtremalAuditReport rep = audit_extremal_conditions(u, pb, 1e-6);
    CHECK(rep.pass());
    CHECK(rep.components_exempt == 1);
    CHECK(rep.components_checked == 0);
  }

  SUBCASE("flux above the band ceiling is reported") {
    Field u = field_from(g, [](double x1, double) { return 1.3 * x1; });
    ExtremalAuditReport rep = audit_extremal_conditions(u, pb, 1e-6);
    CHECK_FALSE(rep.flux_bound_ok);
    CHECK(rep.worst_flux == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(rep.flux_row >= 1);
  }

  SUBCASE("flat rows below the mean break local stability") {
    Field u = field_from(g, [](double x1, double) { return -0.5 * x1; });
    ExtremalAuditReport rep = audit_extremal_conditions(u, pb, 1e-6);
    CHECK_FALSE(rep.stability_ok);
    CHECK(rep.worst_stability == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("slanted states are stable with nothing to saturate") {
    Field u = field_from(g, [](double, double x2) { return x2; });
    ExtremalAuditReport rep = audit_extremal_conditions(u, pb, 1e-6);
    CHECK(rep.pass());
  }
}
