#include <cmath>

#include "doctest.h"
#include "pnlab/grid.hpp"

using namespace pnlab;

TEST_CASE("half grid geometry and node classification") {
  HalfGrid g = build_half_grid(5, 9);
  CHECK(g.hx == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.hy == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.x1(0) == 0.0);
  CHECK(g.x1(4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.x2(0) == -1.0);
  CHECK(g.x2(8) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.face_count() == 7);

  // the face is x1 = 0 minus its corners; everything else on the rim is data
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      NodeKind k = g.kind(i, j);
      if (j == 0 || j == g.ny - 1 || i == g.nx - 1)
        CHECK(k == NodeKind::Dirichlet);
      else if (i == 0)
        CHECK(k == NodeKind::NeumannFace);
      else
        CHECK(k == NodeKind::Interior);
    }
  CHECK(g.kind(0, 0) == NodeKind::Dirichlet);
  CHECK(g.kind(0, g.ny - 1) == NodeKind::Dirichlet);
  CHECK(g.is_face(0, 1));
  CHECK_FALSE(g.is_face(1, 1));

  SUBCASE("degenerate sizes are refused") {
    CHECK_THROWS_AS(build_half_grid(2, 5), Error);
    CHECK_THROWS_AS(build_half_grid(5, 2), Error);
  }
}

TEST_CASE("field_from samples node coordinates") {
  HalfGrid g = build_half_grid(5, 5);
  Field u = field_from(g, [](double x1, double x2) { return 3.0 * x1 - 2.0 * x2 + 0.5; });
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      CHECK(u.at(i, j) == doctest::Approx(3.0 * g.x1(i) - 2.0 * g.x2(j) + 0.5).epsilon(1e-15));
}

TEST_CASE("tangential gradient is exact where its stencil order allows") {
  HalfGrid g = build_half_grid(9, 17);

  SUBCASE("affine fields differentiate exactly on every face row") {
    Field u = field_from(g, [](double x1, double x2) { return 1.0 + 0.3 * x1 - 0.7 * x2; });
    for (int j = 1; j <= g.ny - 2; ++j)
      CHECK(tangential_gradient(u, j) == doctest::Approx(-0.7).epsilon(1e-13));
  }

  SUBCASE("quadratics are exact on centered rows") {
    Field u = field_from(g, [](double, double x2) { return x2 * x2; });
    for (int j = 2; j <= g.ny - 3; ++j)
      CHECK(tangential_gradient(u, j) == doctest::Approx(2.0 * g.x2(j)).epsilon(1e-12));
  }

  SUBCASE("extreme rows never read the corner values") {
    Field u = field_from(g, [](double, double x2) { return x2; });
    u.at(0, 0) = 1e9;
    u.at(0, g.ny - 1) = -1e9;
    CHECK(tangential_gradient(u, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tangential_gradient(u, g.ny - 2) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normal derivative stencil is exact for quadratics in x1") {
  HalfGrid g = build_half_grid(9, 9);
  Field u = field_from(g, [](double x1, double x2) { return (1.0 - x1) * (1.0 - x1) + x2; });
  // d1 of (1-x1)^2 at x1 = 0 is -2
  for (int j = 1; j <= g.ny - 2; ++j)
    CHECK(normal_derivative(u, j) == doctest::Approx(-2.0).epsilon(1e-12));

  std::vector<double> all = face_normal_derivative(u);
  REQUIRE(static_cast<int>(all.size()) == g.face_count());
  for (int j = 1; j <= g.ny - 2; ++j) CHECK(all[j - 1] == normal_derivative(u, j));

  std::vector<double> tg = face_tangential_gradient(u);
  REQUIRE(static_cast<int>(tg.size()) == g.face_count());
  for (int j = 1; j <= g.ny - 2; ++j) CHECK(tg[j - 1] == tangential_gradient(u, j));
}

TEST_CASE("five point laplacian annihilates affine and hits quadratics exactly") {
  HalfGrid g = build_half_grid(9, 9);

  Field aff = field_from(g, [](double x1, double x2) { return 2.0 - x1 + 3.0 * x2; });
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) CHECK(laplacian5(aff, i, j) == 0.0);

  Field quad = field_from(g, [](double x1, double x2) { return x1 * x1 + x2 * x2; });
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      CHECK(laplacian5(quad, i, j) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("face history bookkeeping counts steps by rows") {
  FaceHistory fh;
  CHECK(fh.steps() == 0);
  fh.ny = 4;
  fh.dt = 0.5;
  fh.values.assign(12, 0.0);
  fh.flux.assign(12, 0.0);
  fh.facet.assign(12, 0);
  CHECK(fh.steps() == 3);
}
