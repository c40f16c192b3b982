#include "hlap/hopf.hpp"
#include "hlap/barrier.hpp"
#include "hlap/diagnostics.hpp"
#include "hlap/error.hpp"
#include "hlap/numerics.hpp"
#include "hlap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace hlap {

namespace {

nlohmann::json point_json(Point p) { return nlohmann::json::array({p.x, p.y}); }

bool same_mesh(const ScalarField& a, const ScalarField& b) {
  const Grid &ga = a.grid(), &gb = b.grid();
  return ga.nx == gb.nx && ga.ny == gb.ny && ga.x0 == gb.x0 && ga.y0 == gb.y0 && ga.h == gb.h &&
         a.mesh().types() == b.mesh().types();
}

} // namespace

nlohmann::json HopfReport::to_json() const {
  return {{"boundary_point", point_json(boundary_point)},
          {"base_value", base_value},
          {"radii", radii},
          {"ratios", ratios},
          {"unresolved", unresolved},
          {"c_estimate", c_estimate},
          {"pass", pass}};
}

HopfReport hopf_constant(const ScalarField& u, Point x0, const std::vector<double>& radii) {
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (!(radii[k] > 0.0) || (k && !(radii[k] < radii[k - 1])))
      throw Error(ErrorCode::BadInput, "radii must be positive and strictly decreasing");
  const Mesh& mesh = u.mesh();
  const Grid& grid = mesh.grid();
  if (mesh.ghost_cells().empty()) throw Error(ErrorCode::BadInput, "field has no boundary cells");

  HopfReport rep;
  rep.boundary_point = x0;
  double best = std::numeric_limits<double>::infinity();
  for (int idx : mesh.ghost_cells()) {
    const double d = norm(grid.center(idx) - x0);
    if (d < best) {
      best = d;
      rep.base_value = u[idx];
    }
  }
  const std::vector<Point> grad = gradient_field(u);

  for (double r : radii) {
    if (r < 3.0 * grid.h) {
      rep.unresolved.push_back(r);
      continue;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (int idx : mesh.interior_cells())
      if (norm(grid.center(idx) - x0) <= r) top = std::max(top, u[idx]);
    const int samples = std::max(64, static_cast<int>(std::ceil(8.0 * std::numbers::pi * r / grid.h)));
    for (int k = 0; k < samples; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / samples;
      const Point y{x0.x + r * std::cos(phi), x0.y + r * std::sin(phi)};
      const int i = static_cast<int>(std::floor((y.x - grid.x0) / grid.h));
      const int j = static_cast<int>(std::floor((y.y - grid.y0) / grid.h));
      if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) continue;
      const int idx = grid.index(i, j);
      if (!mesh.is_interior(idx)) continue;
      const Point c = grid.center(idx);
      top = std::max(top, u[idx] + grad[idx].x * (y.x - c.x) + grad[idx].y * (y.y - c.y));
    }
    if (!std::isfinite(top))
      throw Error(ErrorCode::BadInput, "ball of radius " + format_double(r) + " misses the domain");
    rep.radii.push_back(r);
    rep.ratios.push_back((top - rep.base_value) / r);
  }
  if (!rep.ratios.empty()) {
    rep.c_estimate = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    rep.pass = rep.c_estimate > 0.0 && rep.ratios.back() >= 0.5 * rep.ratios.front();
  }
  return rep;
}

void write_hopf_csv(const std::filesystem::path& path, const HopfReport& report) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadInput, "cannot open " + path.string());
  out << "radius,ratio\n";
  for (std::size_t k = 0; k < report.radii.size(); ++k)
    out << format_double(report.radii[k]) << ',' << format_double(report.ratios[k]) << '\n';
}

double comparison_tolerance(int n) {
  static std::mutex mutex;
  static std::map<int, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  const ConvexRing ring = make_annulus(1.0, 2.0, Grid::square(n, -2.1, 2.1));
  const SolveResult res = solve_harmonic(ring);
  double err = 0.0;
  for (int idx : ring.mesh()->interior_cells()) {
    const double r = norm(ring.grid().center(idx));
    err = std::max(err, std::abs(res.field[idx] - std::log(2.0 / r) / std::numbers::ln2));
  }
  return cache[n] = 2.0 * err;
}

// ---------------------------------------------------------------------------

nlohmann::json ComparisonReport::to_json() const {
  return {{"pass", pass},
          {"tol_cmp", tol_cmp},
          {"max_violation", max_violation},
          {"worst_cell", worst_cell},
          {"worst_location", point_json(worst_location)},
          {"violations", violations},
          {"min_sub_residual", min_sub_residual},
          {"min_sub_residual_excluded", min_sub_residual_excluded},
          {"max_solution_residual", max_solution_residual}};
}

ComparisonReport comparison_check(const ScalarField& u, const ScalarField& v, const OrliczFunction& of,
                                  const ComparisonOptions& opts) {
  if (!same_mesh(u, v)) throw Error(ErrorCode::BadInput, "comparison needs both fields on one mesh");
  const Mesh& mesh = u.mesh();
  for (int idx : mesh.ghost_cells())
    if (v[idx] > u[idx] + 1e-12 * std::max(1.0, std::abs(u[idx])))
      throw Error(ErrorCode::PreconditionFail, "v > u on boundary cell " + std::to_string(idx));

  ComparisonReport rep;
  rep.tol_cmp = opts.tol_cmp;
  const ScalarField rv = operator_residual(v, of), ru = operator_residual(u, of);
  const double tol_v = opts.residual_rel * numerics::median(flux_magnitudes(v, of));
  const double tol_u = opts.residual_rel * numerics::median(flux_magnitudes(u, of));
  rep.min_sub_residual = std::numeric_limits<double>::infinity();
  rep.min_sub_residual_excluded = rep.min_sub_residual;
  for (int idx : mesh.interior_cells()) {
    if (!mesh.is_core(idx, 2)) {
      rep.min_sub_residual_excluded = std::min(rep.min_sub_residual_excluded, rv[idx]);
      continue;
    }
    rep.min_sub_residual = std::min(rep.min_sub_residual, rv[idx]);
    rep.max_solution_residual = std::max(rep.max_solution_residual, std::abs(ru[idx]));
  }
  if (rep.min_sub_residual < -tol_v)
    throw Error(ErrorCode::PreconditionFail,
                "v is not a sub-solution: residual " + format_double(rep.min_sub_residual));
  if (rep.max_solution_residual > tol_u)
    throw Error(ErrorCode::PreconditionFail,
                "u is not a solution: residual " + format_double(rep.max_solution_residual));

  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int idx : mesh.interior_cells()) {
    const double d = v[idx] - u[idx];
    if (d > rep.max_violation) {
      rep.max_violation = d;
      rep.worst_cell = idx;
    }
    if (d > opts.tol_cmp) ++rep.violations;
  }
  if (rep.worst_cell >= 0) rep.worst_location = mesh.grid().center(rep.worst_cell);
  rep.pass = rep.violations == 0;
  return rep;
}

// ---------------------------------------------------------------------------

nlohmann::json LipschitzReport::to_json() const {
  return {{"C", C}, {"M", M}, {"sampled_cells", sampled_cells}, {"pass", pass}, {"comparison", comparison.to_json()}};
}

LipschitzReport outer_lipschitz_check(const ScalarField& u, const ConvexRing& outer_ring, double M,
                                      const OrliczFunction& of, double tol_cmp) {
  const Mesh& mesh = *outer_ring.mesh();
  if (u.values().size() != mesh.types().size() || u.mesh().types() != mesh.types())
    throw Error(ErrorCode::BadInput, "field does not live on the outer ring mesh");
  if (!(M >= 0.0)) throw Error(ErrorCode::PreconditionFail, "M must be non-negative");
  for (int idx : mesh.interior_cells())
    if (u[idx] < -1e-12) throw Error(ErrorCode::PreconditionFail, "u is negative at cell " + std::to_string(idx));

  LipschitzReport rep;
  rep.M = M;
  const double h = mesh.grid().h;
  if (M == 0.0) {
    for (int idx : mesh.interior_cells())
      if (u[idx] > 1e-12) throw Error(ErrorCode::PreconditionFail, "M = 0 but u does not vanish");
    rep.pass = true;
    return rep;
  }

  const SolveResult w = solve_harmonic(outer_ring);
  if (!w.converged) throw Error(ErrorCode::NonConvergence, "harmonic potential of the outer ring: " + w.diagnostic);
  const LevelDiagnostics diag = level_diagnostics(w.field);
  const GradientBounds bounds = gradient_bounds(w.field, diag);
  const ZetaProfile zeta = zeta_from_field(w.field, diag);
  const BarrierProfile f = tune_m(of, zeta, 1.0, bounds.C, M, TargetSide::Above);

  // u <= f(1) - f(w) is -(f(1) - f(w)) <= -u, with -(f(1) - f(w)) a sub-solution
  const ScalarField fw = f.compose(w.field);
  const ScalarField lower = fw.map([&f](double x) { return x - f.f1; });
  const ScalarField upper = u.map([](double x) { return -x; });
  rep.comparison = comparison_check(upper, lower, of, {tol_cmp});

  for (int idx : mesh.interior_cells()) {
    const double d = outer_ring.inner().signed_distance(mesh.grid().center(idx));
    if (d < h) continue;
    ++rep.sampled_cells;
    rep.C = std::max(rep.C, u[idx] / (M * d));
  }
  rep.pass = rep.comparison.pass && std::isfinite(rep.C);
  return rep;
}

// ---------------------------------------------------------------------------

nlohmann::json HolderReport::to_json() const {
  return {{"lhs", lhs}, {"norm_u", norm_u}, {"norm_v", norm_v}, {"rhs", rhs}, {"pass", pass}};
}

HolderReport orlicz_holder_check(const ScalarField& u, const ScalarField& v, const OrliczFunction& of) {
  if (std::abs(of.h(1.0) - 1.0) > 1e-9)
    throw Error(ErrorCode::NotNormalized, "h(1) = " + format_double(of.h(1.0)) + ", expected 1");
  if (!same_mesh(u, v)) throw Error(ErrorCode::BadInput, "Holder check needs both fields on one mesh");
  HolderReport rep;
  for (int idx : u.mesh().interior_cells()) rep.lhs += u[idx] * v[idx];
  rep.lhs *= u.mesh().cell_area();
  rep.norm_u = orlicz_norm(u, of);
  rep.norm_v = orlicz_norm(v, of.dual());
  rep.rhs = rep.norm_u * rep.norm_v;
  rep.pass = rep.lhs <= rep.rhs + 1e-6 * rep.rhs;
  return rep;
}

} // namespace hlap
