#include "hlap/solver.hpp"
#include "hlap/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <Eigen/SparseCore>

namespace hlap {

void SolveOptions::validate() const {
  if (delta_schedule.empty()) throw Error(ErrorCode::BadInput, "empty delta schedule");
  for (std::size_t i = 0; i < delta_schedule.size(); ++i) {
    if (!(delta_schedule[i] > 0.0)) throw Error(ErrorCode::BadInput, "delta values must be positive");
    if (i && !(delta_schedule[i] < delta_schedule[i - 1]))
      throw Error(ErrorCode::BadInput, "delta schedule must decrease strictly");
  }
  if (delta_schedule.back() < 1e-8) throw Error(ErrorCode::BadInput, "last delta below 1e-8");
  if (!(tol > 0.0)) throw Error(ErrorCode::BadInput, "tol must be positive");
  if (max_iter < 1) throw Error(ErrorCode::BadInput, "max_iter must be >= 1");
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// The integrand and its derivatives; the quadratic law skips the Orlicz
// function entirely.
struct Law {
  const OrliczFunction* of = nullptr;
  double F(double s) const { return of ? of->F(s) : 0.5 * s * s; }
  double dF(double s) const { return of ? of->h(s) : s; }
  double d2F(double s) const { return of ? of->dh(s) : 1.0; }
  bool quadratic() const { return of == nullptr; }
};

struct Tap {
  int cell;
  double weight;
};

// Central difference across an interior cell along one axis, with ghost
// neighbours at their link fractions.
struct Across {
  Tap minus, plus;
};

struct Face {
  int nb;
  double dist;      // theta h
  double scale;     // 1 / (half the sum of the two link lengths on this axis)
  double area;      // energy weight in units of h^2
  bool interior;
};

struct CellStencil {
  int cell;
  Face face[4];
  Across tx, ty;   // d/dx and d/dy at the cell
};

std::vector<CellStencil> build_stencils(const Mesh& mesh) {
  const double h = mesh.grid().h;
  std::vector<CellStencil> out;
  out.reserve(mesh.interior_cells().size());
  for (int idx : mesh.interior_cells()) {
    CellStencil cs;
    cs.cell = idx;
    for (int d = 0; d < 4; ++d) {
      const Dir dir = static_cast<Dir>(d);
      const int nb = mesh.neighbor(idx, dir);
      const bool in = mesh.is_interior(nb);
      const double t = in ? 1.0 : mesh.theta(idx, dir);
      cs.face[d] = {nb, t * h, 0.0, in ? 0.5 : t, in};
    }
    const double sx = cs.face[East].dist + cs.face[West].dist;
    const double sy = cs.face[North].dist + cs.face[South].dist;
    cs.face[East].scale = cs.face[West].scale = 2.0 / sx;
    cs.face[North].scale = cs.face[South].scale = 2.0 / sy;
    cs.tx = {{cs.face[West].nb, -1.0 / sx}, {cs.face[East].nb, 1.0 / sx}};
    cs.ty = {{cs.face[South].nb, -1.0 / sy}, {cs.face[North].nb, 1.0 / sy}};
    out.push_back(cs);
  }
  return out;
}

// Normal and tangential derivative at one face, with their linear stencils.
struct FaceGrad {
  double G, T;
  Tap g[2];
  Tap t[6];
  int nt;
};

class FluxScheme {
public:
  FluxScheme(const Mesh& mesh) : mesh_(mesh), stencils_(build_stencils(mesh)), slot_(mesh.grid().size(), -1) {
    for (std::size_t k = 0; k < stencils_.size(); ++k) slot_[stencils_[k].cell] = static_cast<int>(k);
  }

  const std::vector<CellStencil>& stencils() const { return stencils_; }

  FaceGrad face_gradient(const std::vector<double>& u, const CellStencil& cs, int d) const {
    const Face& f = cs.face[d];
    FaceGrad fg{};
    fg.G = (u[f.nb] - u[cs.cell]) / f.dist;
    fg.g[0] = {cs.cell, -1.0 / f.dist};
    fg.g[1] = {f.nb, 1.0 / f.dist};
    const bool x_face = d == East || d == West;
    auto add = [&](const Across& a, double w) {
      fg.t[fg.nt++] = {a.minus.cell, w * a.minus.weight};
      fg.t[fg.nt++] = {a.plus.cell, w * a.plus.weight};
    };
    const Across& own = x_face ? cs.ty : cs.tx;
    if (f.interior) {
      const CellStencil& other = stencils_[slot_[f.nb]];
      add(own, 0.5);
      add(x_face ? other.ty : other.tx, 0.5);
    } else {
      add(own, 1.0);
    }
    fg.T = 0.0;
    for (int k = 0; k < fg.nt; ++k) fg.T += fg.t[k].weight * u[fg.t[k].cell];
    return fg;
  }

  /// Residual per grid cell; `scale` receives the largest sum of absolute
  /// face contributions, the size of the terms that cancel.
  std::vector<double> residual(const std::vector<double>& u, const Law& law, double delta,
                               double* scale = nullptr) const {
    std::vector<double> r(u.size(), 0.0);
    double big = 0.0;
    for (const CellStencil& cs : stencils_) {
      double sum = 0.0, mag = 0.0;
      for (int d = 0; d < 4; ++d) {
        const FaceGrad fg = face_gradient(u, cs, d);
        const double s = std::sqrt(fg.G * fg.G + fg.T * fg.T + delta * delta);
        if (s == 0.0 && !law.quadratic()) continue;
        const double H = law.quadratic() ? 1.0 : law.dF(s) / s;
        const double term = cs.face[d].scale * H * fg.G;
        sum += term;
        mag += std::abs(term);
      }
      r[cs.cell] = sum;
      big = std::max(big, mag);
    }
    if (scale) *scale = big;
    return r;
  }

  SpMat jacobian(const std::vector<double>& u, const Law& law, double delta) const {
    const int n = static_cast<int>(stencils_.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 32);
    for (const CellStencil& cs : stencils_) {
      const int row = mesh_.unknown(cs.cell);
      for (int d = 0; d < 4; ++d) {
        const FaceGrad fg = face_gradient(u, cs, d);
        const double s = std::sqrt(fg.G * fg.G + fg.T * fg.T + delta * delta);
        if (s == 0.0 && !law.quadratic()) continue;
        double dG = 1.0, dT = 0.0;
        if (!law.quadratic()) {
          const double H = law.dF(s) / s;
          const double K = (law.d2F(s) - H) / (s * s);
          dG = H + K * fg.G * fg.G;
          dT = K * fg.G * fg.T;
        }
        const double sc = cs.face[d].scale;
        for (const Tap& t : fg.g)
          if (const int col = mesh_.unknown(t.cell); col >= 0) trip.emplace_back(row, col, sc * dG * t.weight);
        if (dT != 0.0)
          for (int k = 0; k < fg.nt; ++k)
            if (const int col = mesh_.unknown(fg.t[k].cell); col >= 0)
              trip.emplace_back(row, col, sc * dT * fg.t[k].weight);
      }
    }
    SpMat J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  double energy(const std::vector<double>& u, const Law& law, double delta) const {
    double sum = 0.0;
    for (const CellStencil& cs : stencils_)
      for (int d = 0; d < 4; ++d) {
        const FaceGrad fg = face_gradient(u, cs, d);
        sum += cs.face[d].area * law.F(std::sqrt(fg.G * fg.G + fg.T * fg.T + delta * delta));
      }
    return sum * mesh_.cell_area();
  }

  /// Mean of F'(|grad u|) over the four faces of each interior cell.
  std::vector<double> flux(const std::vector<double>& u, const Law& law) const {
    std::vector<double> out;
    out.reserve(stencils_.size());
    for (const CellStencil& cs : stencils_) {
      double sum = 0.0;
      for (int d = 0; d < 4; ++d) {
        const FaceGrad fg = face_gradient(u, cs, d);
        sum += law.dF(std::hypot(fg.G, fg.T));
      }
      out.push_back(0.25 * sum);
    }
    return out;
  }

private:
  const Mesh& mesh_;
  std::vector<CellStencil> stencils_;
  std::vector<int> slot_;
};

bool linear_solve(const SpMat& A, const Vec& b, LinearSolver kind, Vec& x) {
  if (kind == LinearSolver::DirectBanded) {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> solver;
    solver.analyzePattern(A);
    solver.factorize(A);
    if (solver.info() != Eigen::Success) return false;
    x = solver.solve(b);
    return solver.info() == Eigen::Success && x.allFinite();
  }
  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> solver;
  solver.setTolerance(1e-14);
  solver.setMaxIterations(std::max<int>(1000, static_cast<int>(A.rows())));
  solver.compute(A);
  if (solver.info() != Eigen::Success) return false;
  x = solver.solve(b);
  return x.allFinite() && solver.error() < 1e-8;
}

Vec gather(const Mesh& mesh, const std::vector<double>& g) {
  Vec v(mesh.interior_cells().size());
  for (std::size_t k = 0; k < mesh.interior_cells().size(); ++k) v[k] = g[mesh.interior_cells()[k]];
  return v;
}

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::vector<double> step_to(const Mesh& mesh, const std::vector<double>& u, const Vec& d, double alpha) {
  std::vector<double> out = u;
  for (std::size_t k = 0; k < mesh.interior_cells().size(); ++k) out[mesh.interior_cells()[k]] += alpha * d[k];
  return out;
}

SolveResult harmonic_impl(const ScalarField& data, const SolveOptions& opts) {
  const Mesh& mesh = data.mesh();
  const FluxScheme scheme(mesh);
  const Law law;
  std::vector<double> u = data.values();
  for (int idx : mesh.interior_cells()) u[idx] = 0.0;
  SolveResult res;
  Vec d;
  if (!linear_solve(scheme.jacobian(u, law, 0.0), -gather(mesh, scheme.residual(u, law, 0.0)),
                    opts.linear_solver, d)) {
    res.field = ScalarField(data.mesh_ptr(), u);
    res.error = ErrorCode::NonConvergence;
    res.diagnostic = "linear solve failed";
    return res;
  }
  u = step_to(mesh, u, d, 1.0);
  res.residual = max_abs(gather(mesh, scheme.residual(u, law, 0.0, &res.residual_scale)));
  res.log.push_back({1, 0.0, scheme.energy(u, law, 0.0), res.residual});
  res.field = ScalarField(data.mesh_ptr(), std::move(u));
  res.converged = res.residual < opts.tol * std::max(1.0, res.residual_scale);
  if (!res.converged) {
    res.error = ErrorCode::NonConvergence;
    res.diagnostic = "linear residual " + format_double(res.residual) + " above tol";
  }
  return res;
}

} // namespace

SolveResult solve_harmonic(const ScalarField& data, const SolveOptions& opts) {
  opts.validate();
  return harmonic_impl(data, opts);
}

SolveResult solve_harmonic(const ConvexRing& ring, const SolveOptions& opts, BoundaryData bd) {
  return solve_harmonic(ScalarField::with_boundary_data(ring.mesh(), bd.inner, bd.outer), opts);
}

SolveResult solve_h_potential(const ScalarField& data, const OrliczFunction& of, const SolveOptions& opts) {
  opts.validate();
  const Mesh& mesh = data.mesh();
  const FluxScheme scheme(mesh);
  const Law law{&of};

  std::vector<double> u = harmonic_impl(data, opts).field.values();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int idx : mesh.ghost_cells()) {
    lo = std::min(lo, u[idx]);
    hi = std::max(hi, u[idx]);
  }
  for (int idx : mesh.interior_cells()) u[idx] = std::clamp(u[idx], lo, hi);

  SolveResult res;
  int iter = 0;
  bool stalled = false;
  for (std::size_t k = 0; k < opts.delta_schedule.size() && !stalled; ++k) {
    const double delta = opts.delta_schedule[k];
    const bool last = k + 1 == opts.delta_schedule.size();
    const double rel_target = last ? opts.tol : std::max(opts.tol, 1e-6);
    double scale = 0.0;
    Vec r = gather(mesh, scheme.residual(u, law, delta, &scale));
    double bb_step = 0.0;
    for (;;) {
      const double rmax = max_abs(r);
      const double target = rel_target * std::max(1.0, scale);
      res.log.push_back({iter, delta, scheme.energy(u, law, delta), rmax});
      res.residual = rmax;
      res.residual_scale = scale;
      if (rmax < target || iter >= opts.max_iter) break;
      if (!last && iter >= opts.max_iter / 2) break;
      ++iter;

      const double merit = r.squaredNorm();
      double scale_new = scale;
      auto line_search = [&](const Vec& dir, std::vector<double>& u_new, Vec& r_new) {
        double alpha = 1.0;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
          u_new = step_to(mesh, u, dir, alpha);
          r_new = gather(mesh, scheme.residual(u_new, law, delta, &scale_new));
          const double m = r_new.squaredNorm();
          if (std::isfinite(m) && (m <= (1.0 - 1e-4 * alpha) * merit || max_abs(r_new) < target)) return true;
        }
        return false;
      };
      const SpMat J = scheme.jacobian(u, law, delta);
      Vec d;
      std::vector<double> u_new;
      Vec r_new;
      bool ok = linear_solve(J, -r, opts.linear_solver, d) && line_search(d, u_new, r_new);
      if (!ok) {
        // Barzilai-Borwein steepest descent on the squared residual
        const Vec grad = J.transpose() * r;
        if (!(bb_step > 0.0)) bb_step = 1.0 / std::max(1e-300, max_abs(grad));
        ok = line_search(-bb_step * grad, u_new, r_new);
        if (ok) {
          const Vec s = gather(mesh, u_new) - gather(mesh, u);
          const Vec y = scheme.jacobian(u_new, law, delta).transpose() * r_new - grad;
          const double sy = s.dot(y);
          if (sy > 0.0) bb_step = s.dot(s) / sy;
        }
      }
      if (!ok) {
        stalled = true;
        res.error = ErrorCode::LineSearchStall;
        res.diagnostic = "line search stalled at delta = " + format_double(delta) + ", residual " +
                         format_double(rmax);
        break;
      }
      u = std::move(u_new);
      r = std::move(r_new);
      scale = scale_new;
    }
    if (last && !stalled) res.converged = res.residual < opts.tol * std::max(1.0, res.residual_scale);
  }
  res.field = ScalarField(data.mesh_ptr(), std::move(u));
  if (!res.converged && !res.error) {
    res.error = ErrorCode::NonConvergence;
    res.diagnostic = "max_iter = " + std::to_string(opts.max_iter) + " reached with residual " +
                     format_double(res.residual);
  }
  return res;
}

SolveResult solve_h_potential(const ConvexRing& ring, const OrliczFunction& of, const SolveOptions& opts,
                              BoundaryData bd) {
  return solve_h_potential(ScalarField::with_boundary_data(ring.mesh(), bd.inner, bd.outer), of, opts);
}

double discrete_energy(const ScalarField& field, const OrliczFunction& of, double delta) {
  return FluxScheme(field.mesh()).energy(field.values(), Law{&of}, delta);
}

ScalarField operator_residual(const ScalarField& field, const OrliczFunction& of, double delta) {
  return ScalarField(field.mesh_ptr(), FluxScheme(field.mesh()).residual(field.values(), Law{&of}, delta));
}

std::vector<double> flux_magnitudes(const ScalarField& field, const OrliczFunction& of) {
  return FluxScheme(field.mesh()).flux(field.values(), Law{&of});
}

void write_convergence_log(const std::filesystem::path& path, const std::vector<IterationLog>& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadInput, "cannot open " + path.string());
  out << "iteration,delta,energy,residual\n";
  for (const auto& e : log)
    out << e.iteration << ',' << format_double(e.delta) << ',' << format_double(e.energy) << ','
        << format_double(e.residual) << '\n';
}

} // namespace hlap
