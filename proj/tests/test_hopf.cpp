#include <doctest.h>

#include <cmath>
#include <random>

#include "hlap/barrier.hpp"
#include "hlap/diagnostics.hpp"
#include "hlap/error.hpp"
#include "hlap/geometry.hpp"
#include "hlap/hopf.hpp"
#include "hlap/solver.hpp"

using namespace hlap;

namespace {

ConvexRing annulus(int n) { return make_annulus(1.0, 2.0, Grid::square(n, -2.1, 2.1)); }

RingPair cap_rings(int n) {
  const Grid g = Grid::square(n, -1.0, 1.0);
  return make_rings(build_dini_cap(0.25, DiniModulus::power(0.5), g.h), 0.25, g);
}

} // namespace

TEST_CASE("hopf ratios") {
  const auto w = solve_harmonic(annulus(129)).field;
  const auto rep = hopf_constant(w, {2.0, 0.0}, {0.4, 0.2, 0.1});
  REQUIRE(rep.ratios.size() == 3);
  CHECK(rep.pass);
  CHECK(rep.base_value == doctest::Approx(0.0).epsilon(1e-9));
  // slope of log(2/r)/log 2 at r = 2
  CHECK(rep.c_estimate == doctest::Approx(1.0 / (2.0 * std::log(2.0))).epsilon(0.1));

  const auto fine = hopf_constant(w, {2.0, 0.0}, {0.4, 0.01});
  CHECK(fine.unresolved.size() == 1);

  CHECK_THROWS_AS(hopf_constant(w, {2.0, 0.0}, {0.1, 0.2}), Error);
}

TEST_CASE("constant field has zero growth") {
  const auto ring = annulus(65);
  const auto u = ScalarField::with_boundary_data(ring.mesh(), 1.0, 1.0, 1.0);
  const auto rep = hopf_constant(u, {2.0, 0.0}, {0.8, 0.4, 0.2});
  for (double r : rep.ratios) CHECK(r == doctest::Approx(0.0));
  CHECK_FALSE(rep.pass);
}

TEST_CASE("comparison principle") {
  const auto ring = annulus(129);
  const auto of = OrliczFunction::power(3);
  const auto u = solve_h_potential(ring, of).field;
  const ComparisonOptions opts{comparison_tolerance(129)};
  CHECK(opts.tol_cmp > 0.0);

  SUBCASE("reflexive") {
    const auto rep = comparison_check(u, u, of, opts);
    CHECK(rep.pass);
    CHECK(rep.max_violation == doctest::Approx(0.0));
    CHECK(rep.violations == 0);
  }
  SUBCASE("a bump is not a sub-solution") {
    auto v = u;
    for (int idx : v.mesh().interior_cells()) {
      const double d = norm(v.grid().center(idx) - Point{1.5, 0.0});
      if (d < 0.3) v[idx] += 0.05 * std::cos(d / 0.3 * M_PI / 2);
    }
    bool rejected = false;
    try {
      rejected = !comparison_check(u, v, of, opts).pass;
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::PreconditionFail;
    }
    CHECK(rejected);
  }
  SUBCASE("ghost ordering") {
    const auto v = u.map([](double x) { return x + 0.1; });
    try {
      comparison_check(u, v, of, opts);
      FAIL("expected PreconditionFail");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PreconditionFail);
    }
  }
  SUBCASE("different meshes") {
    const auto other = solve_harmonic(annulus(65)).field;
    CHECK_THROWS_AS(comparison_check(u, other, of, opts), Error);
  }
}

TEST_CASE("barrier below the potential on the cap ring") {
  const auto rings = cap_rings(129);
  const auto& ring = rings.inner_ring;
  const auto of = OrliczFunction::power(3);
  const auto u = solve_h_potential(ring, of).field;
  const auto w = solve_harmonic(ring).field;
  const auto diag = level_diagnostics(w);
  const auto bounds = gradient_bounds(w, diag);
  double target = 1.0;
  for (std::size_t idx = 0; idx < u.values().size(); ++idx)
    if (ring.mesh()->type(static_cast<int>(idx)) == CellType::InnerBoundary) target = std::min(target, u[idx]);
  const auto z = zeta_from_field(w, diag);
  const auto prof = tune_m(of, z, 1.0, bounds.C, target);
  const auto v = prof.compose(w);
  CHECK(verify_subsolution(w, diag, prof, z, of).pass);
  const auto rep = comparison_check(u, v, of, {comparison_tolerance(129)});
  CHECK(rep.pass);
}

TEST_CASE("outer lipschitz bound") {
  const auto of = OrliczFunction::power(3);
  SUBCASE("zero field") {
    const auto rings = cap_rings(129);
    const auto u = ScalarField::with_boundary_data(rings.outer_ring.mesh(), 0.0, 0.0, 0.0);
    const auto rep = outer_lipschitz_check(u, rings.outer_ring, 0.0, of, comparison_tolerance(129));
    CHECK(rep.C == 0.0);
    CHECK(rep.pass);
  }
  SUBCASE("stable under refinement") {
    double C[2];
    int k = 0;
    for (int n : {129, 257}) {
      const auto rings = cap_rings(n);
      const auto u = solve_h_potential(rings.outer_ring, of, {}, {0.0, 1.0}).field;
      const auto rep = outer_lipschitz_check(u, rings.outer_ring, 1.0, of, comparison_tolerance(n));
      CHECK(rep.pass);
      CHECK(std::isfinite(rep.C));
      C[k++] = rep.C;
    }
    CHECK(C[0] == doctest::Approx(C[1]).epsilon(0.15));
  }
}

TEST_CASE("orlicz hoelder inequality") {
  const auto mesh = Mesh::box(Grid::square(34, 0.0, 34.0 / 32.0));
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto of = OrliczFunction::power(p);
    for (int k = 0; k < 5; ++k) {
      const double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
      const auto u = ScalarField::sample(mesh, [&](Point x) { return a * std::sin(3 * x.x) + b * x.y * x.y; });
      const auto v = ScalarField::sample(mesh, [&](Point x) { return c * std::exp(x.x) - d * x.y; });
      const auto rep = orlicz_holder_check(u, v, of);
      CHECK(rep.pass);
      CHECK(rep.lhs <= rep.rhs * (1 + 1e-9));
    }
  }
  // equality for the quadratic law with v = u
  const auto u = ScalarField::sample(mesh, [](Point x) { return 1.0 + x.x; });
  const auto eq = orlicz_holder_check(u, u, OrliczFunction::power(2));
  CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-6));

  try {
    orlicz_holder_check(u, u, OrliczFunction::exponential());
    FAIL("expected NotNormalized");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNormalized);
  }
}
