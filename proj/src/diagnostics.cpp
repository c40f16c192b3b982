#include "hlap/diagnostics.hpp"
#include "hlap/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace hlap {

namespace {

struct Deriv {
  double d1;
  double d2;
};

// First and second derivative of a ghost-aware field along one axis.
Deriv axis_derivative(const Mesh& mesh, const std::vector<double>& v, int idx, Dir plus, Dir minus) {
  const double h = mesh.grid().h;
  const int np = mesh.neighbor(idx, plus), nm = mesh.neighbor(idx, minus);
  const double tp = mesh.is_interior(np) ? 1.0 : mesh.theta(idx, plus);
  const double tm = mesh.is_interior(nm) ? 1.0 : mesh.theta(idx, minus);
  const double u0 = v[idx];
  auto one_sided = [&](int n1, Dir away, double sign) -> std::optional<Deriv> {
    if (!mesh.is_interior(n1)) return std::nullopt;
    const int n2 = mesh.neighbor(n1, away);
    if (n2 < 0 || !mesh.is_interior(n2)) return std::nullopt;
    return Deriv{sign * (3 * u0 - 4 * v[n1] + v[n2]) / (2 * h), (u0 - 2 * v[n1] + v[n2]) / (h * h)};
  };
  if (tp < 0.5 && tm == 1.0)
    if (auto d = one_sided(nm, minus, 1.0)) return *d;
  if (tm < 0.5 && tp == 1.0)
    if (auto d = one_sided(np, plus, -1.0)) return *d;
  const double hp = tp * h, hm = tm * h;
  const double dp = (v[np] - u0) / hp, dm = (u0 - v[nm]) / hm;
  return {(hm * dp + hp * dm) / (hp + hm), 2.0 * (dp - dm) / (hp + hm)};
}

// Derivative of a field known on interior cells only.
bool interior_derivative(const Mesh& mesh, const std::vector<double>& f, const std::vector<std::uint8_t>& ok,
                         int idx, Dir plus, Dir minus, double& out) {
  const double h = mesh.grid().h;
  auto usable = [&](int c) { return c >= 0 && mesh.is_interior(c) && ok[c]; };
  const int np = mesh.neighbor(idx, plus), nm = mesh.neighbor(idx, minus);
  if (usable(np) && usable(nm)) {
    out = (f[np] - f[nm]) / (2 * h);
    return true;
  }
  if (usable(np)) {
    const int n2 = mesh.neighbor(np, plus);
    out = usable(n2) ? (-3 * f[idx] + 4 * f[np] - f[n2]) / (2 * h) : (f[np] - f[idx]) / h;
    return true;
  }
  if (usable(nm)) {
    const int n2 = mesh.neighbor(nm, minus);
    out = usable(n2) ? (3 * f[idx] - 4 * f[nm] + f[n2]) / (2 * h) : (f[idx] - f[nm]) / h;
    return true;
  }
  return false;
}

} // namespace

std::vector<Point> gradient_field(const ScalarField& w) {
  const Mesh& mesh = w.mesh();
  std::vector<Point> grad(w.values().size());
  for (int idx : mesh.interior_cells())
    grad[idx] = {axis_derivative(mesh, w.values(), idx, East, West).d1,
                 axis_derivative(mesh, w.values(), idx, North, South).d1};
  return grad;
}

namespace {

ScalarField zero_field(const ScalarField& w) {
  return ScalarField(w.mesh_ptr(), std::vector<double>(w.values().size(), 0.0));
}

} // namespace

LevelDiagnostics level_diagnostics(const ScalarField& w, double delta) {
  const Mesh& mesh = w.mesh();
  const auto& v = w.values();
  const std::size_t n = v.size();
  LevelDiagnostics d;
  d.threshold = 10.0 * delta;
  d.grad = gradient_field(w);
  d.grad_norm = zero_field(w);
  d.laplacian = zero_field(w);
  d.inf_lap = zero_field(w);
  d.curvature = zero_field(w);
  d.identity = zero_field(w);
  d.valid.assign(n, 0);

  std::vector<double> gx(n, 0.0), gy(n, 0.0), wxx(n, 0.0), wyy(n, 0.0), nx(n, 0.0), ny(n, 0.0);
  std::vector<std::uint8_t> all(n, 1);
  for (int idx : mesh.interior_cells()) {
    gx[idx] = d.grad[idx].x;
    gy[idx] = d.grad[idx].y;
    wxx[idx] = axis_derivative(mesh, v, idx, East, West).d2;
    wyy[idx] = axis_derivative(mesh, v, idx, North, South).d2;
    const double g = std::hypot(gx[idx], gy[idx]);
    d.grad_norm[idx] = g;
    if (g > d.threshold) {
      d.valid[idx] = 1;
      nx[idx] = gx[idx] / g;
      ny[idx] = gy[idx] / g;
    } else {
      ++d.vanishing;
    }
  }
  if (d.vanishing == static_cast<int>(mesh.interior_cells().size()))
    throw Error(ErrorCode::VanishingGradient, "gradient vanishes on every interior cell");

  for (int idx : mesh.interior_cells()) {
    double gxy = 0.0, gyx = 0.0;
    const bool okx = interior_derivative(mesh, gx, all, idx, North, South, gxy);
    const bool oky = interior_derivative(mesh, gy, all, idx, East, West, gyx);
    const double wxy = okx && oky ? 0.5 * (gxy + gyx) : (okx ? gxy : gyx);
    const double g2 = gx[idx] * gx[idx] + gy[idx] * gy[idx];
    d.laplacian[idx] = wxx[idx] + wyy[idx];
    d.inf_lap[idx] = gx[idx] * gx[idx] * wxx[idx] + 2 * gx[idx] * gy[idx] * wxy + gy[idx] * gy[idx] * wyy[idx];
    if (!d.valid[idx]) continue;
    double dnx = 0.0, dny = 0.0;
    interior_derivative(mesh, nx, d.valid, idx, East, West, dnx);
    interior_derivative(mesh, ny, d.valid, idx, North, South, dny);
    d.curvature[idx] = -(dnx + dny);
    d.identity[idx] = d.inf_lap[idx] - d.curvature[idx] * g2 * std::sqrt(g2) - g2 * d.laplacian[idx];
  }
  return d;
}

std::vector<FlowSample> trace_flow_line(const ScalarField& w, const LevelDiagnostics& diag, Point x0,
                                        double threshold) {
  const Mesh& mesh = w.mesh();
  const Grid& grid = mesh.grid();
  const int i0 = static_cast<int>(std::floor((x0.x - grid.x0) / grid.h));
  const int j0 = static_cast<int>(std::floor((x0.y - grid.y0) / grid.h));
  if (i0 < 0 || j0 < 0 || i0 >= grid.nx || j0 >= grid.ny || !mesh.is_interior(grid.index(i0, j0)))
    throw Error(ErrorCode::BadInput, "flow line start is not in an interior cell");

  // Gradient components, linearly extrapolated into the ghost cells.
  std::vector<double> gx(grid.size(), 0.0), gy(grid.size(), 0.0);
  for (int idx : mesh.interior_cells()) {
    gx[idx] = diag.grad[idx].x;
    gy[idx] = diag.grad[idx].y;
  }
  for (int idx : mesh.ghost_cells()) {
    int count = 0;
    for (int dd = 0; dd < 4; ++dd) {
      const Dir dir = static_cast<Dir>(dd);
      const int nb = mesh.neighbor(idx, dir);
      if (nb < 0 || !mesh.is_interior(nb)) continue;
      const int nb2 = mesh.neighbor(nb, dir);
      Point ext = diag.grad[nb];
      if (nb2 >= 0 && mesh.is_interior(nb2)) ext = 2.0 * diag.grad[nb] - diag.grad[nb2];
      gx[idx] += ext.x;
      gy[idx] += ext.y;
      ++count;
    }
    if (count) {
      gx[idx] /= count;
      gy[idx] /= count;
    }
  }
  const ScalarField fx(w.mesh_ptr(), std::move(gx)), fy(w.mesh_ptr(), std::move(gy));

  double w_lo = std::numeric_limits<double>::infinity(), w_hi = -w_lo;
  for (int idx : mesh.ghost_cells()) {
    w_lo = std::min(w_lo, w[idx]);
    w_hi = std::max(w_hi, w[idx]);
  }

  // velocity dx/dw; false when the stencil leaves the mesh
  auto velocity = [&](Point p, Point& out, double& gnorm) {
    double a = 0.0, b = 0.0;
    if (!fx.interpolate(p, a) || !fy.interpolate(p, b)) return false;
    gnorm = std::hypot(a, b);
    if (gnorm < threshold)
      throw Error(ErrorCode::StagnationPoint, "gradient below threshold along the flow line");
    out = {a / (gnorm * gnorm), b / (gnorm * gnorm)};
    return true;
  };

  double w0 = w[grid.index(i0, j0)];
  w.interpolate(x0, w0);
  Point v;
  double g0 = 0.0;
  if (!velocity(x0, v, g0)) throw Error(ErrorCode::BadInput, "flow line start too close to the mesh edge");

  auto trace = [&](double w_end) {
    std::vector<FlowSample> out;
    Point x = x0;
    double wc = w0, g = g0;
    const double sign = w_end > wc ? 1.0 : -1.0;
    for (int step = 0; step < 1000000 && sign * (w_end - wc) > 1e-12; ++step) {
      const double dw = sign * std::min(0.5 * grid.h * g, sign * (w_end - wc));
      Point k1, k2, k3, k4;
      double gg = 0.0;
      if (!velocity(x, k1, gg) || !velocity(x + (0.5 * dw) * k1, k2, gg) ||
          !velocity(x + (0.5 * dw) * k2, k3, gg) || !velocity(x + dw * k3, k4, gg))
        break;
      x = x + (dw / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      wc += dw;
      Point tmp;
      if (!velocity(x, tmp, g)) break;
      out.push_back({wc, g, x});
    }
    return out;
  };

  std::vector<FlowSample> down = trace(w_lo), up = trace(w_hi);
  std::vector<FlowSample> samples(down.rbegin(), down.rend());
  samples.push_back({w0, g0, x0});
  samples.insert(samples.end(), up.begin(), up.end());
  return samples;
}

GradientBounds gradient_bounds(const ScalarField& w, const LevelDiagnostics& diag, double threshold) {
  double c = std::numeric_limits<double>::infinity(), C = 0.0;
  for (int idx : w.mesh().interior_cells()) {
    const double g = norm(diag.grad[idx]);
    c = std::min(c, g);
    C = std::max(C, g);
  }
  if (!(c >= threshold))
    throw Error(ErrorCode::DegenerateGradient, "min |grad w| = " + format_double(c) + " below threshold");
  return {c, C};
}

GradientBounds gradient_bounds(const ScalarField& w, double threshold) {
  LevelDiagnostics d;
  d.grad = gradient_field(w);
  return gradient_bounds(w, d, threshold);
}

} // namespace hlap
