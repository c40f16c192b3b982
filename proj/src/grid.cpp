#include "hlap/grid.hpp"
#include "hlap/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hlap {

double norm(Point p) { return std::hypot(p.x, p.y); }
double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

Grid Grid::square(int n, double lo, double hi) {
  if (n < 3 || !(hi > lo)) throw Error(ErrorCode::BadInput, "square grid needs n >= 3 and hi > lo");
  return Grid{n, n, lo, lo, (hi - lo) / n};
}

bool Grid::operator==(const Grid& o) const {
  auto close = [this](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, h); };
  return nx == o.nx && ny == o.ny && close(x0, o.x0) && close(y0, o.y0) && close(h, o.h);
}

nlohmann::json Grid::to_json() const {
  return {{"nx", nx}, {"ny", ny}, {"origin", {x0, y0}}, {"spacing", h}};
}

Mesh::Mesh(Grid grid, std::vector<CellType> types, std::vector<std::array<double, 4>> theta)
    : grid_(grid), types_(std::move(types)), theta_(std::move(theta)), unknown_(grid_.size(), -1) {
  if (types_.size() != grid_.size() || theta_.size() != grid_.size())
    throw Error(ErrorCode::BadInput, "mesh arrays do not match grid size");
  for (int idx = 0; idx < static_cast<int>(grid_.size()); ++idx) {
    if (types_[idx] == CellType::Interior) {
      unknown_[idx] = static_cast<int>(interior_.size());
      interior_.push_back(idx);
      for (int d = 0; d < 4; ++d) {
        const int nb = neighbor(idx, static_cast<Dir>(d));
        if (nb < 0 || types_[nb] == CellType::Outside)
          throw Error(ErrorCode::BadInput, "interior cell without a ghost or interior neighbour");
      }
    } else if (is_ghost(idx)) {
      ghosts_.push_back(idx);
    }
  }
  if (interior_.empty()) throw Error(ErrorCode::BadInput, "mesh has no interior cells");
}

std::shared_ptr<const Mesh> Mesh::box(const Grid& grid) {
  std::vector<CellType> types(grid.size(), CellType::Interior);
  std::vector<std::array<double, 4>> theta(grid.size(), {1.0, 1.0, 1.0, 1.0});
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1)
        types[grid.index(i, j)] = CellType::OuterBoundary;
  return std::make_shared<const Mesh>(grid, std::move(types), std::move(theta));
}

int Mesh::neighbor(int idx, Dir d) const {
  const int i = grid_.col(idx), j = grid_.row(idx);
  switch (d) {
  case East: return i + 1 < grid_.nx ? idx + 1 : -1;
  case West: return i > 0 ? idx - 1 : -1;
  case North: return j + 1 < grid_.ny ? idx + grid_.nx : -1;
  case South: return j > 0 ? idx - grid_.nx : -1;
  }
  return -1;
}

bool Mesh::is_core(int idx, int layers) const {
  if (!is_interior(idx)) return false;
  const int i = grid_.col(idx), j = grid_.row(idx);
  for (int dj = -layers; dj <= layers; ++dj)
    for (int di = -layers; di <= layers; ++di) {
      const int ii = i + di, jj = j + dj;
      if (ii < 0 || jj < 0 || ii >= grid_.nx || jj >= grid_.ny) return false;
      if (types_[grid_.index(ii, jj)] != CellType::Interior) return false;
    }
  return true;
}

ScalarField::ScalarField(std::shared_ptr<const Mesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_ || values_.size() != mesh_->grid().size())
    throw Error(ErrorCode::BadInput, "field values do not match mesh");
}

ScalarField ScalarField::sample(std::shared_ptr<const Mesh> mesh,
                                const std::function<double(Point)>& fn) {
  std::vector<double> v(mesh->grid().size(), 0.0);
  for (int idx = 0; idx < static_cast<int>(v.size()); ++idx)
    if (mesh->type(idx) != CellType::Outside) v[idx] = fn(mesh->grid().center(idx));
  return ScalarField(std::move(mesh), std::move(v));
}

ScalarField ScalarField::with_boundary_data(std::shared_ptr<const Mesh> mesh, double inner,
                                            double outer, double fill) {
  std::vector<double> v(mesh->grid().size(), 0.0);
  for (int idx = 0; idx < static_cast<int>(v.size()); ++idx) {
    switch (mesh->type(idx)) {
    case CellType::Interior: v[idx] = fill; break;
    case CellType::InnerBoundary: v[idx] = inner; break;
    case CellType::OuterBoundary: v[idx] = outer; break;
    case CellType::Outside: break;
    }
  }
  return ScalarField(std::move(mesh), std::move(v));
}

bool ScalarField::interpolate(Point p, double& out) const {
  const Grid& g = grid();
  const double fx = (p.x - g.x0) / g.h - 0.5;
  const double fy = (p.y - g.y0) / g.h - 0.5;
  const int i = static_cast<int>(std::floor(fx));
  const int j = static_cast<int>(std::floor(fy));
  if (i < 0 || j < 0 || i + 1 >= g.nx || j + 1 >= g.ny) return false;
  const int c00 = g.index(i, j), c10 = c00 + 1, c01 = c00 + g.nx, c11 = c01 + 1;
  for (int c : {c00, c10, c01, c11})
    if (mesh_->type(c) == CellType::Outside) return false;
  const double sx = fx - i, sy = fy - j;
  out = (1 - sx) * (1 - sy) * values_[c00] + sx * (1 - sy) * values_[c10] +
        (1 - sx) * sy * values_[c01] + sx * sy * values_[c11];
  return true;
}

double ScalarField::integrate(const std::function<double(double)>& fn) const {
  double sum = 0.0;
  for (int idx : mesh_->interior_cells()) sum += fn(values_[idx]);
  return sum * mesh_->cell_area();
}

double ScalarField::max_interior() const {
  double m = -std::numeric_limits<double>::infinity();
  for (int idx : mesh_->interior_cells()) m = std::max(m, values_[idx]);
  return m;
}

double ScalarField::min_interior() const {
  double m = std::numeric_limits<double>::infinity();
  for (int idx : mesh_->interior_cells()) m = std::min(m, values_[idx]);
  return m;
}

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size(), 0.0);
  for (int idx = 0; idx < static_cast<int>(v.size()); ++idx)
    if (mesh_->type(idx) != CellType::Outside) v[idx] = fn(values_[idx]);
  return ScalarField(mesh_, std::move(v));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_grid_file(const std::filesystem::path& path, const Grid& grid,
                     const std::vector<double>& values) {
  if (values.size() != grid.size()) throw Error(ErrorCode::BadInput, "grid file size mismatch");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadInput, "cannot open " + path.string());
  out << "# hlap grid v1\n";
  out << "nx " << grid.nx << "\nny " << grid.ny << "\n";
  out << "origin " << format_double(grid.x0) << ' ' << format_double(grid.y0) << "\n";
  out << "spacing " << format_double(grid.h) << "\n";
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (i) out << ' ';
      out << format_double(values[grid.index(i, j)]);
    }
    out << '\n';
  }
}

GridFile read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot read " + path.string());
  GridFile gf;
  std::string line, key;
  std::getline(in, line);
  if (line.rfind("# hlap grid", 0) != 0) throw Error(ErrorCode::ConfigParse, "bad grid header in " + path.string());
  auto expect = [&](const char* name) {
    in >> key;
    if (key != name) throw Error(ErrorCode::ConfigParse, std::string("expected ") + name + " in grid file");
  };
  expect("nx");
  in >> gf.grid.nx;
  expect("ny");
  in >> gf.grid.ny;
  expect("origin");
  in >> gf.grid.x0 >> gf.grid.y0;
  expect("spacing");
  in >> gf.grid.h;
  if (!in || gf.grid.nx <= 0 || gf.grid.ny <= 0) throw Error(ErrorCode::ConfigParse, "bad grid header");
  gf.values.resize(gf.grid.size());
  for (auto& v : gf.values) {
    std::string tok;
    in >> tok;
    if (!in) throw Error(ErrorCode::ConfigParse, "truncated grid file " + path.string());
    v = std::stod(tok);
  }
  return gf;
}

std::vector<double> mask_values(const Mesh& mesh) {
  std::vector<double> out(mesh.grid().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(mesh.types()[i]);
  return out;
}

} // namespace hlap
