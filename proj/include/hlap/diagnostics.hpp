#pragma once

#include <vector>

#include "hlap/geometry.hpp"
#include "hlap/grid.hpp"

namespace hlap {

/// Differential quantities of a solved potential at interior cells.
/// Derivatives use three-point stencils; next to a ghost the boundary point
/// sits at the link fraction theta, and very short links are replaced by a
/// one-sided interior stencil.
struct LevelDiagnostics {
  std::vector<Point> grad;
  ScalarField grad_norm;
  ScalarField laplacian;
  /// grad w . D^2 w . grad w
  ScalarField inf_lap;
  /// -div(grad w / |grad w|): positive on the level sets of a potential that
  /// decreases away from a convex inner set (1/r on the annulus).
  ScalarField curvature;
  /// inf_lap - curvature |grad w|^3 - |grad w|^2 laplacian
  ScalarField identity;
  /// 1 where |grad w| exceeds the vanishing threshold.
  std::vector<std::uint8_t> valid;
  int vanishing = 0;
  double threshold = 0.0;
};

/// Gradient at interior cells (zero elsewhere).
std::vector<Point> gradient_field(const ScalarField& w);

/// Throws VanishingGradient only if no interior cell has a usable gradient;
/// otherwise cells below 10 delta are marked invalid and counted.
LevelDiagnostics level_diagnostics(const ScalarField& w, double delta = 1e-6);

struct FlowSample {
  double w;
  double grad_norm;
  Point x;
};

/// RK4 integration of dx/dw = grad w / |grad w|^2 from x0 in both
/// directions until w reaches 0 and 1 or the interpolation stencil leaves
/// the mesh. Samples are ordered by increasing w.
std::vector<FlowSample> trace_flow_line(const ScalarField& w, const LevelDiagnostics& diag, Point x0,
                                        double threshold = 1e-5);

struct GradientBounds {
  double c;
  double C;
};

/// Extremes of |grad w| over interior cells (boundary-adjacent cells use the
/// link-fraction stencils). Throws DegenerateGradient when c < threshold.
GradientBounds gradient_bounds(const ScalarField& w, const LevelDiagnostics& diag, double threshold = 1e-6);
GradientBounds gradient_bounds(const ScalarField& w, double threshold = 1e-6);

} // namespace hlap
