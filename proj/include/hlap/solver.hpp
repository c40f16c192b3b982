#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlap/error.hpp"
#include "hlap/geometry.hpp"
#include "hlap/grid.hpp"
#include "hlap/orlicz.hpp"

namespace hlap {

enum class LinearSolver { ConjugateGradientLike, DirectBanded };

struct SolveOptions {
  std::vector<double> delta_schedule{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double tol = 1e-8;
  int max_iter = 200;
  LinearSolver linear_solver = LinearSolver::DirectBanded;

  /// Throws BadInput unless the schedule is strictly decreasing with last
  /// entry >= 1e-8, tol > 0 and max_iter >= 1.
  void validate() const;
};

struct BoundaryData {
  double inner = 1.0;
  double outer = 0.0;
};

struct IterationLog {
  int iteration;
  double delta;
  double energy;
  double residual;
};

struct SolveResult {
  ScalarField field;
  bool converged = false;
  std::optional<ErrorCode> error;
  std::string diagnostic;
  std::vector<IterationLog> log;
  /// Max-norm of the regularised residual at the last delta.
  double residual = 0.0;
  /// Largest per-cell sum of absolute face-flux terms. Convergence means
  /// residual < tol * max(1, residual_scale).
  double residual_scale = 0.0;
};

/// Solves Delta_H u = 0 in the conservative face-flux form of
/// operator_residual, with |grad u| regularised to sqrt(|grad u|^2 + delta^2)
/// and delta continued over the schedule. Damped Newton with a residual
/// line search; Barzilai-Borwein descent on the squared residual when the
/// Newton step fails. Ghost values of `data` are the Dirichlet data,
/// interior values are ignored.
SolveResult solve_h_potential(const ScalarField& data, const OrliczFunction& of,
                              const SolveOptions& opts = {});
SolveResult solve_h_potential(const ConvexRing& ring, const OrliczFunction& of,
                              const SolveOptions& opts = {}, BoundaryData bd = {});

/// The quadratic case F(t) = t^2/2: a single linear solve with the
/// Shortley-Weller stencil at cut links.
SolveResult solve_harmonic(const ScalarField& data, const SolveOptions& opts = {});
SolveResult solve_harmonic(const ConvexRing& ring, const SolveOptions& opts = {}, BoundaryData bd = {});

/// Face quadrature of \int F(sqrt(|grad v|^2 + delta^2)): every interior face
/// carries area h^2, a face to a ghost theta h^2.
double discrete_energy(const ScalarField& field, const OrliczFunction& of, double delta = 0.0);

/// Delta_H at interior cells: sum over the four faces of H(|grad u|_f) times
/// the normal difference quotient, divided by the mean link length on that
/// axis. Face gradients pair the normal quotient with the average of the
/// tangential central differences of the two cells. For F(t) = t^2/2 this
/// is the 5-point Laplacian (Shortley-Weller at cut links). Zero elsewhere.
ScalarField operator_residual(const ScalarField& field, const OrliczFunction& of, double delta = 0.0);

/// F'(|grad v|) per interior cell (mean over its faces), the natural flux scale.
std::vector<double> flux_magnitudes(const ScalarField& field, const OrliczFunction& of);

/// Comma-separated convergence log with header.
void write_convergence_log(const std::filesystem::path& path, const std::vector<IterationLog>& log);

} // namespace hlap
