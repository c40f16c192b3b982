#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlap/geometry.hpp"
#include "hlap/grid.hpp"
#include "hlap/orlicz.hpp"

namespace hlap {

struct HopfReport {
  Point boundary_point;
  double base_value = 0.0;  ///< u(x0), from the nearest ghost cell
  std::vector<double> radii;
  std::vector<double> ratios;
  /// Radii below three cells, skipped.
  std::vector<double> unresolved;
  double c_estimate = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Growth ratios (max_{B_r(x0) cap D} u - u(x0)) / r. The maximum runs over
/// interior cell centres and over points of the circle |x - x0| = r, the
/// latter by a first-order expansion from the cell that contains them.
/// Throws BadInput unless the radii are positive and strictly decreasing.
HopfReport hopf_constant(const ScalarField& u, Point x0, const std::vector<double>& radii);

/// (radius, ratio) table.
void write_hopf_csv(const std::filesystem::path& path, const HopfReport& report);

/// Twice the max-norm error of the harmonic potential of annulus(1, 2) on
/// the n x n grid over [-2.1, 2.1]^2. Cached per n.
double comparison_tolerance(int n);

struct ComparisonOptions {
  double tol_cmp = 0.0;
  /// Residual tolerances are this fraction of the median flux scale.
  double residual_rel = 1e-3;
};

struct ComparisonReport {
  bool pass = true;
  double tol_cmp = 0.0;
  double max_violation = 0.0;  ///< max(v - u) over interior cells
  int worst_cell = -1;
  Point worst_location;
  int violations = 0;
  double min_sub_residual = 0.0;  ///< min operator_residual(v) over checked cells
  /// Same over boundary-adjacent cells, reported only.
  double min_sub_residual_excluded = 0.0;
  double max_solution_residual = 0.0;  ///< max |operator_residual(u)|

  nlohmann::json to_json() const;
};

/// v <= u + tol_cmp on interior cells, given v <= u on ghosts, v a discrete
/// sub-solution and u a discrete solution. The residual preconditions are
/// checked on cells at least two cells from the boundary. Throws
/// PreconditionFail when a precondition is violated.
ComparisonReport comparison_check(const ScalarField& u, const ScalarField& v, const OrliczFunction& of,
                                  const ComparisonOptions& opts);

struct LipschitzReport {
  double C = 0.0;
  double M = 0.0;
  ComparisonReport comparison;
  int sampled_cells = 0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Compares u with the super-solution f(1) - f(w), f(1) = M, w the harmonic
/// potential of the ring (1 on the inner set), and measures
/// C = max u / (M dist(x, inner set)) over interior cells at least one cell
/// from the inner set. u = 0 on the inner set and u <= M on the outer one.
LipschitzReport outer_lipschitz_check(const ScalarField& u, const ConvexRing& outer_ring, double M,
                                      const OrliczFunction& of, double tol_cmp);

struct HolderReport {
  double lhs = 0.0;  ///< \int u v
  double norm_u = 0.0;
  double norm_v = 0.0;  ///< in the conjugate function
  double rhs = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// \int u v <= ||u||_F ||v||_{F*} by grid quadrature over interior cells.
/// Throws NotNormalized unless h(1) = 1.
HolderReport orlicz_holder_check(const ScalarField& u, const ScalarField& v, const OrliczFunction& of);

} // namespace hlap
