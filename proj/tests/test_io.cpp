#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "pnlab/io.hpp"

using namespace pnlab;

namespace {

std::filesystem::path temp_dir() {
  auto d = std::filesystem::temp_directory_path() / "pnlab_io_test";
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("g17 formatting round-trips doubles exactly") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 2.5e-300, -1.7976931348623157e308, 0.1,
                   123456.789012345678, -4.9e-324}) {
    std::string s = fmt_g17(v);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
    CHECK(fmt_g17(v) == s);  // stable bytes
  }
  CHECK(fmt_g12(0.1).size() <= fmt_g17(0.1).size());
}

TEST_CASE("text files write through fresh directories and read back") {
  auto path = temp_dir() / "nested" / "deeper" / "note.txt";
  std::filesystem::remove_all(temp_dir() / "nested");
  write_text_file(path.string(), "line one\nline two\n");
  CHECK(read_text_file(path.string()) == "line one\nline two\n");
  CHECK_THROWS_AS(read_text_file((temp_dir() / "absent.txt").string()), Error);
}

TEST_CASE("csv tables round-trip") {
  CsvTable t;
  t.columns = {"alpha", "beta", "gamma"};
  t.precision = 17;
  t.add_row({1.0 / 3.0, -2.0, 3.5e-12});
  t.add_row({0.0, 7.125, -1.0 / 7.0});

  std::string payload = csv_payload(t);
  CsvTable back = read_csv_text(payload);
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r)
    for (size_t c = 0; c < t.columns.size(); ++c) CHECK(back.rows[r][c] == t.rows[r][c]);

  SUBCASE("comments and blank lines are skipped") {
    std::string text = "# leading note\n\na,b\n1,2\n# trailing\n3,4\n\n";
    CsvTable p = read_csv_text(text);
    CHECK(p.columns == std::vector<std::string>{"a", "b"});
    REQUIRE(p.rows.size() == 2);
    CHECK(p.rows[1][1] == 4.0);
  }

  SUBCASE("ragged rows are refused") {
    CHECK_THROWS_AS(read_csv_text("a,b\n1,2,3\n"), Error);
  }

  SUBCASE("file round-trip") {
    auto path = temp_dir() / "table.csv";
    write_text_file(path.string(), payload);
    CsvTable f = read_csv_file(path.string());
    CHECK(f.rows[0][0] == t.rows[0][0]);
  }
}

TEST_CASE("field csv preserves the lattice bit for bit") {
  HalfGrid g = build_half_grid(5, 7);
  Field u = field_from(g, [](double x1, double x2) { return std::sin(3.0 * x1) + x2 / 3.0; });
  u.time = 0.625;

  std::string payload = field_csv(u);
  RawField r = read_field_csv_text(payload);
  REQUIRE(r.nx == g.nx);
  REQUIRE(r.ny == g.ny);
  for (int i = 0; i < g.nx; ++i) CHECK(r.x1[i] == g.x1(i));
  for (int j = 0; j < g.ny; ++j) CHECK(r.x2[j] == g.x2(j));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(r.at(i, j) == u.at(i, j));

  RawField direct = raw_from_field(u);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(direct.at(i, j) == u.at(i, j));

  SUBCASE("malformed field payloads are refused") {
    CHECK_THROWS_AS(read_field_csv_text("x1,x2\n0,0\n"), Error);
    CHECK_THROWS_AS(read_field_csv_text("x1,x2,value\n"), Error);
    // row count not matching a full x1 sweep
    CHECK_THROWS_AS(read_field_csv_text("x1,x2,value\n0,0,1\n1,0,2\n0,1,3\n1,1,4\n0,2,5\n"),
                    Error);
  }
}

TEST_CASE("profile csv loading") {
  auto dir = temp_dir();

  SUBCASE("uniform grids starting at zero are taken verbatim") {
    std::string text = "u,f\n0,0.5\n0.25,1.5\n0.5,-0.5\n0.75,0.25\n";
    auto path = dir / "uniform.csv";
    write_text_file(path.string(), text);
    PeriodicProfile f = profile_from_csv(path.string());
    CHECK(f.samples_per_period() == 4);
    CHECK(f(0.0) == 0.5);
    CHECK(f(0.25) == 1.5);
    CHECK(f(0.5) == -0.5);
    CHECK(f(0.125) == doctest::Approx(1.0).epsilon(1e-13));  // midpoint interpolation
  }

  SUBCASE("non-uniform grids are resampled") {
    std::string text = "u,f\n0,0\n0.3,1\n0.7,-1\n";
    auto path = dir / "uneven.csv";
    write_text_file(path.string(), text);
    PeriodicProfile f = profile_from_csv(path.string());
    CHECK(f.samples_per_period() == 512);
    // linear between (0,0) and (0.3,1)
    CHECK(f(0.15) == doctest::Approx(0.5).epsilon(5e-3));
  }

  SUBCASE("broken profile files are refused") {
    auto path = dir / "broken.csv";
    write_text_file(path.string(), "u,f\n0,1\n");
    CHECK_THROWS_AS(profile_from_csv(path.string()), Error);
    write_text_file(path.string(), "u,f\n0,1\n0,2\n");
    CHECK_THROWS_AS(profile_from_csv(path.string()), Error);
    write_text_file(path.string(), "u,f\n0,1\nnan,2\n");
    CHECK_THROWS_AS(profile_from_csv(path.string()), Error);
  }
}

TEST_CASE("heatmaps render deterministically with optional face overlay") {
  HalfGrid g = build_half_grid(9, 9);
  Field u = field_from(g, [](double x1, double x2) { return x1 * x1 - x2; });

  std::string svg1 = heatmap_svg(u);
  std::string svg2 = heatmap_svg(u);
  CHECK(svg1 == svg2);
  CHECK(svg1.find("<svg") != std::string::npos);

  HeatmapOptions opts;
  opts.title = "render check";
  opts.face_intervals.push_back({-0.5, 0.25});
  std::string overlay = heatmap_svg(u, opts);
  CHECK(overlay != svg1);
  CHECK(overlay.find("render check") != std::string::npos);

  SUBCASE("non-finite values are refused") {
    Field bad = u;
    bad.at(4, 4) = std::nan("");
    try {
      heatmap_svg(bad);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonFinite);
    }
  }
}

TEST_CASE("error codes render stable names") {
  CHECK(std::string(error_code_name(ErrorCode::ConfigInvalid)) == "CONFIG_INVALID");
  CHECK(std::string(error_code_name(ErrorCode::NonFinite)) == "NON_FINITE");
  CHECK(std::string(error_code_name(ErrorCode::IoFailure)) == "IO_FAILURE");
  CHECK(std::string(error_code_name(ErrorCode::BoundaryOrderViolation)) ==
        "BOUNDARY_ORDER_VIOLATION");
}
