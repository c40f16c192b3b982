#include <doctest.h>

#include <cmath>

#include "hlap/diagnostics.hpp"
#include "hlap/error.hpp"
#include "hlap/geometry.hpp"
#include "hlap/solver.hpp"

using namespace hlap;

namespace {
const ScalarField& annulus_potential() {
  static const ScalarField w = solve_harmonic(make_annulus(1.0, 2.0, Grid::square(129, -2.1, 2.1))).field;
  return w;
}
} // namespace

TEST_CASE("linear field on a box") {
  const auto mesh = Mesh::box(Grid::square(20, -1.0, 1.0));
  const auto w = ScalarField::sample(mesh, [](Point p) { return 0.5 + 0.3 * p.x + 0.4 * p.y; });
  const auto d = level_diagnostics(w);
  for (int idx : mesh->interior_cells()) {
    CHECK(d.grad[idx].x == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(d.grad[idx].y == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(d.grad_norm[idx] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(d.inf_lap[idx]) <= 1e-9);
  }
  const auto b = gradient_bounds(w, d);
  CHECK(b.c == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(b.C == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("annulus level sets") {
  const auto& w = annulus_potential();
  const auto d = level_diagnostics(w);
  const auto& mesh = w.mesh();
  int checked = 0;
  for (int idx : mesh.interior_cells()) {
    if (!mesh.is_core(idx, 3)) continue;
    const double r = norm(mesh.grid().center(idx));
    CHECK(d.curvature[idx] == doctest::Approx(1.0 / r).epsilon(0.05));
    CHECK(d.grad_norm[idx] == doctest::Approx(1.0 / (r * std::log(2.0))).epsilon(0.02));
    const double g3 = std::pow(d.grad_norm[idx], 3);
    CHECK(d.inf_lap[idx] == doctest::Approx(d.curvature[idx] * g3).epsilon(0.05));
    ++checked;
  }
  CHECK(checked > 1000);
  const auto b = gradient_bounds(w, d);
  CHECK(b.c == doctest::Approx(1.0 / (2.0 * std::log(2.0))).epsilon(0.05));
  CHECK(b.C == doctest::Approx(1.0 / std::log(2.0)).epsilon(0.05));
}

TEST_CASE("flow line on the annulus is radial") {
  const auto& w = annulus_potential();
  const auto d = level_diagnostics(w);
  const auto line = trace_flow_line(w, d, {1.5 / std::sqrt(2.0), 1.5 / std::sqrt(2.0)});
  REQUIRE(line.size() > 10);
  for (std::size_t k = 1; k < line.size(); ++k) CHECK(line[k].w >= line[k - 1].w);
  CHECK(line.front().w <= 0.05);
  CHECK(line.back().w >= 0.95);
  for (const auto& s : line) {
    CHECK(std::abs(s.x.x - s.x.y) <= 1e-2);
    const double r = norm(s.x);
    if (r > 1.05 && r < 1.95) CHECK(s.w == doctest::Approx(std::log(2.0 / r) / std::log(2.0)).epsilon(1e-2));
  }
}

TEST_CASE("constant field has no usable gradient") {
  const auto ring = make_annulus(1.0, 2.0, Grid::square(65, -2.1, 2.1));
  const auto u = ScalarField::with_boundary_data(ring.mesh(), 1.0, 1.0, 1.0);
  try {
    gradient_bounds(u);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::DegenerateGradient || e.code() == ErrorCode::VanishingGradient));
  }
}
