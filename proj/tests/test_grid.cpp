#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hlap/error.hpp"
#include "hlap/grid.hpp"

using namespace hlap;

TEST_CASE("square grid geometry") {
  const Grid g = Grid::square(11, -1.0, 1.0);
  CHECK(g.nx == 11);
  CHECK(g.h == doctest::Approx(2.0 / 11));
  CHECK(g.center(0, 0).x == doctest::Approx(-1.0 + 1.0 / 11));
  CHECK(g.center(g.index(10, 3)).y == doctest::Approx(-1.0 + 7.0 / 11));
  CHECK_THROWS_AS(Grid::square(2, 0.0, 1.0), Error);
}

TEST_CASE("box mesh") {
  const auto mesh = Mesh::box(Grid::square(12, 0.0, 1.0));
  CHECK(mesh->interior_cells().size() == 100);
  CHECK(mesh->type(0) == CellType::OuterBoundary);
  const int c = mesh->grid().index(5, 5);
  CHECK(mesh->is_interior(c));
  CHECK(mesh->theta(c, East) == 1.0);
  CHECK(mesh->neighbor(c, North) == mesh->grid().index(5, 6));
}

TEST_CASE("bilinear interpolation is exact on affine fields") {
  const auto mesh = Mesh::box(Grid::square(20, -1.0, 1.0));
  const auto f = ScalarField::sample(mesh, [](Point p) { return 2.0 * p.x - 0.5 * p.y + 1.0; });
  double v = 0.0;
  REQUIRE(f.interpolate({0.123, -0.456}, v));
  CHECK(v == doctest::Approx(2.0 * 0.123 + 0.5 * 0.456 + 1.0).epsilon(1e-12));
  CHECK_FALSE(f.interpolate({5.0, 0.0}, v));
}

TEST_CASE("boundary data and quadrature") {
  const auto mesh = Mesh::box(Grid::square(12, 0.0, 1.2));
  const auto f = ScalarField::with_boundary_data(mesh, 1.0, 3.0, 0.5);
  CHECK(f[0] == 3.0);
  CHECK(f.max_interior() == 0.5);
  // 10 x 10 interior cells of side 0.1
  CHECK(f.integrate([](double v) { return v; }) == doctest::Approx(0.5));
}

TEST_CASE("grid file round trip") {
  const Grid g = Grid::square(7, -0.3, 0.4);
  std::vector<double> values(g.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = std::sin(0.1 * k) / 3.0;
  const auto path = std::filesystem::temp_directory_path() / "hlap_grid_roundtrip.grid";
  write_grid_file(path, g, values);
  const GridFile back = read_grid_file(path);
  CHECK(back.grid.nx == g.nx);
  CHECK(back.grid.ny == g.ny);
  CHECK(back.grid.h == g.h);
  CHECK(back.grid.x0 == g.x0);
  CHECK(back.values == values);
  std::filesystem::remove(path);

  try {
    read_grid_file(path);
    FAIL("expected MissingArtifact");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingArtifact);
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23})
    CHECK(std::stod(format_double(v)) == v);
}
