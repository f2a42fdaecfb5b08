#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pnlab/corrector.hpp"
#include "pnlab/profile.hpp"

using namespace pnlab;

TEST_CASE("strip grid wraps its seam and carries the tangential period") {
  StripGrid g = build_strip_grid(2.0, 2.0, 9, 17);
  CHECK(g.n2 == 16);
  CHECK(g.hx == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.h2 == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g.x1(8) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.wrap(16) == 0);
  CHECK(g.wrap(-1) == 15);
  CHECK(g.index(3, 16) == g.index(3, 0));
  CHECK(g.size() == 9 * 16);
}

TEST_CASE("horizontal pinning roots agree with a dense scan") {
  PeriodicProfile f = PeriodicProfile::sine(1.0);
  for (double T : {10.0, 50.0}) {
    HorizontalRoots hr = horizontal_pinning_roots(f, T);
    auto relation = [&](double w) { return w / T + f(w); };
    std::vector<double> roots = oracle::scan_roots(relation, -T - 1.0, T + 1.0, 800000);
    REQUIRE(!roots.empty());
    CHECK(hr.w_plus == doctest::Approx(roots.back()).epsilon(1e-7));
    CHECK(hr.w_minus == doctest::Approx(roots.front()).epsilon(1e-7));
    CHECK(std::abs(relation(hr.w_plus)) < 1e-9);
    CHECK(std::abs(relation(hr.w_minus)) < 1e-9);
  }
}

TEST_CASE("pinning interval endpoints and collapse") {
  PeriodicProfile f = PeriodicProfile::sine(1.0);

  SUBCASE("flat slope carries the scalar-reduction endpoints") {
    for (double T : {10.0, 50.0, 200.0}) {
      PinningInterval pi = pinning_interval(f, 0.0, T);
      HorizontalRoots hr = horizontal_pinning_roots(f, T);
      CHECK(pi.q_lower == doctest::Approx(-hr.w_plus / T).epsilon(1e-12));
      CHECK(pi.q_upper == doctest::Approx(-hr.w_minus / T).epsilon(1e-12));
      // endpoint drift from the full range shrinks like 3/T
      CHECK(std::abs(pi.q_lower + 1.0) <= 3.0 / T + 1e-6);
      CHECK(std::abs(pi.q_upper - 1.0) <= 3.0 / T + 1e-6);
    }
  }

  SUBCASE("any tilt collapses the interval to the mean") {
    for (double p : {0.25, -1.5}) {
      PinningInterval pi = pinning_interval(f, p, 30.0);
      CHECK(pi.q_lower == f.mean());
      CHECK(pi.q_upper == f.mean());
      CHECK(pi.p == p);
    }
  }

  SUBCASE("the interval always sits between range and mean") {
    std::vector<PeriodicProfile> profiles = {
        PeriodicProfile::sine(1.0),
        PeriodicProfile::sine(0.6, 0.2),
        PeriodicProfile::sawtooth_smooth(0.7, -0.1),
        PeriodicProfile::tabulated({0.3, 0.8, -0.5, -0.1, 0.4, 0.0}),
    };
    for (const auto& pf : profiles)
      for (double T : {10.0, 50.0}) {
        PinningInterval pi = pinning_interval(pf, 0.0, T);
        CHECK(pi.q_lower >= pf.min() - 1e-6);
        CHECK(pi.q_lower <= pf.mean() + 1e-6);
        CHECK(pi.q_upper >= pf.mean() - 1e-6);
        CHECK(pi.q_upper <= pf.max() + 1e-6);
        CHECK(pi.q_lower <= pi.q_upper + 1e-6);
      }
  }
}

TEST_CASE("cell solver reproduces closed-form strips") {
  SUBCASE("zero profile gives the zero strip") {
    CellSolution c = solve_cell(PeriodicProfile::constant(0.0), 0.5, 2.0, 33, 9);
    for (double v : c.eta) CHECK(std::abs(v) < 1e-12);
  }

  SUBCASE("constant flux gives the exact ramp") {
    CellSolution c = solve_cell(PeriodicProfile::constant(0.4), 1.0, 1.0, 33, 9);
    for (int j = 0; j < c.grid.n2; ++j)
      for (int i = 0; i < c.grid.nx1; ++i)
        CHECK(std::abs(c.at(i, j) - 0.4 * (c.grid.x1(i) - 1.0)) < 1e-6);
    CHECK(c.boundary_trace().size() == static_cast<size_t>(c.grid.n2));
    CHECK(std::abs(c.boundary_trace()[3] + 0.4) < 1e-6);
  }
}

TEST_CASE("tilted cells recover the mean flux") {
  SUBCASE("centered oscillation") {
    PeriodicProfile f = PeriodicProfile::sine(0.5);
    CellSolution coarse = solve_cell(f, 0.5, 2.0, 65, 17);
    CellSolution fine = solve_cell(f, 0.5, 2.0, 129, 33, &coarse);
    CHECK(std::abs(cell_average_flux(coarse, f) - f.mean()) < 1e-6);
    CHECK(std::abs(cell_average_flux(fine, f) - f.mean()) < 1e-6);
  }

  SUBCASE("offset oscillation keeps its offset") {
    PeriodicProfile f = PeriodicProfile::sine(1.0, 0.3);
    CellSolution c = solve_cell(f, 1.0, 2.0, 65, 33);
    CHECK(std::abs(cell_average_flux(c, f) - 0.3) < 5e-3);
  }
}

TEST_CASE("birkhoff residual separates plane-like from bent fields") {
  SUBCASE("tilted affine half-square fields are plane-like") {
    HalfGrid g = build_half_grid(9, 9);
    for (double p : {0.0, 0.5, 1.0, -0.75}) {
      Field u = field_from(g, [p](double x1, double x2) { return p * x2 + 0.3 * x1; });
      CHECK(birkhoff_residual(u, p) < 1e-12);
    }
  }

  SUBCASE("aligned periodic perturbations stay plane-like") {
    HalfGrid g = build_half_grid(9, 9);
    Field u = field_from(g, [](double x1, double x2) {
      return x2 + 0.2 * std::sin(2.0 * 3.14159265358979323846 * x2) * (1.0 - x1);
    });
    CHECK(birkhoff_residual(u, 1.0) < 1e-12);
  }

  SUBCASE("curvature in the shift direction is flagged") {
    HalfGrid g = build_half_grid(9, 9);
    Field u = field_from(g, [](double, double x2) { return x2 * x2; });
    CHECK(birkhoff_residual(u, 0.0) > 0.5);
  }

  SUBCASE("solved cells carry the property") {
    PeriodicProfile f = PeriodicProfile::sine(0.5);
    CellSolution c = solve_cell(f, 0.5, 2.0, 65, 17);
    CHECK(birkhoff_residual(c, 0.5) < 1e-6);
  }

  SUBCASE("a strip whose lattice fits no shift refuses the check") {
    CellSolution c;
    c.grid = build_strip_grid(2.0, 3.0, 9, 65);
    c.p_mag = 1.0 / 3.0;
    c.eta.assign(c.grid.size(), 0.0);
    CHECK_THROWS_AS(birkhoff_residual(c, 1.0 / 3.0), Error);
    try {
      birkhoff_residual(c, 1.0 / 3.0);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainTooNarrow);
    }
  }
}
