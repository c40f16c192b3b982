#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace hlap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
double norm(Point p);
double dot(Point a, Point b);
double cross(Point a, Point b);

/// Uniform cell-centred grid of square cells. Cell (i, j) spans
/// [x0 + i*h, x0 + (i+1)*h] x [y0 + j*h, y0 + (j+1)*h].
struct Grid {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  int index(int i, int j) const { return j * nx + i; }
  int col(int idx) const { return idx % nx; }
  int row(int idx) const { return idx / nx; }
  Point center(int i, int j) const { return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h}; }
  Point center(int idx) const { return center(col(idx), row(idx)); }
  double x1() const { return x0 + nx * h; }
  double y1() const { return y0 + ny * h; }

  /// Square grid of n x n cells covering [lo, hi]^2.
  static Grid square(int n, double lo, double hi);

  bool operator==(const Grid& other) const;
  nlohmann::json to_json() const;
};

enum class CellType : std::uint8_t { Outside = 0, Interior = 1, InnerBoundary = 2, OuterBoundary = 3 };

enum Dir : int { East = 0, West = 1, North = 2, South = 3 };

/// Cell classification plus, for every interior cell, the fraction theta of
/// each link to a ghost neighbour at which the boundary is crossed. Ghost
/// cells store the Dirichlet value of the boundary they represent.
class Mesh {
public:
  Mesh(Grid grid, std::vector<CellType> types, std::vector<std::array<double, 4>> theta);

  /// Rectangle whose outermost cell layer is an outer boundary ghost layer
  /// with the boundary located exactly at the ghost centres.
  static std::shared_ptr<const Mesh> box(const Grid& grid);

  const Grid& grid() const { return grid_; }
  CellType type(int idx) const { return types_[idx]; }
  const std::vector<CellType>& types() const { return types_; }
  bool is_interior(int idx) const { return types_[idx] == CellType::Interior; }
  bool is_ghost(int idx) const {
    return types_[idx] == CellType::InnerBoundary || types_[idx] == CellType::OuterBoundary;
  }
  /// Neighbour cell index in a direction, -1 when off the grid.
  int neighbor(int idx, Dir d) const;
  double theta(int idx, Dir d) const { return theta_[idx][d]; }

  const std::vector<int>& interior_cells() const { return interior_; }
  const std::vector<int>& ghost_cells() const { return ghosts_; }
  /// Position of an interior cell in the unknown vector, -1 otherwise.
  int unknown(int idx) const { return unknown_[idx]; }

  /// Interior cells whose (2k+1)^2 neighbourhood is entirely interior.
  bool is_core(int idx, int layers = 2) const;
  double cell_area() const { return grid_.h * grid_.h; }

private:
  Grid grid_;
  std::vector<CellType> types_;
  std::vector<std::array<double, 4>> theta_;
  std::vector<int> interior_;
  std::vector<int> ghosts_;
  std::vector<int> unknown_;
};

/// Values on a mesh: interior cells carry the unknowns, ghost cells carry
/// boundary data, outside cells are zero.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

  /// Samples fn at the centres of all interior and ghost cells.
  static ScalarField sample(std::shared_ptr<const Mesh> mesh, const std::function<double(Point)>& fn);
  /// Constant boundary data per boundary component, interior initialised to `fill`.
  static ScalarField with_boundary_data(std::shared_ptr<const Mesh> mesh, double inner, double outer,
                                        double fill = 0.0);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const Grid& grid() const { return mesh_->grid(); }
  double operator[](int idx) const { return values_[idx]; }
  double& operator[](int idx) { return values_[idx]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  bool empty() const { return !mesh_; }

  /// Cell-centre bilinear interpolation over interior and ghost cells.
  /// Returns false when a stencil cell is outside.
  bool interpolate(Point p, double& out) const;

  /// Grid quadrature of fn(value) over interior cells.
  double integrate(const std::function<double(double)>& fn) const;
  double max_interior() const;
  double min_interior() const;

  ScalarField map(const std::function<double(double)>& fn) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> values_;
};

/// Portable grid file: a short text header (nx, ny, origin, spacing)
/// followed by row-major cell values, one grid row per line.
struct GridFile {
  Grid grid;
  std::vector<double> values;
};

void write_grid_file(const std::filesystem::path& path, const Grid& grid,
                     const std::vector<double>& values);
GridFile read_grid_file(const std::filesystem::path& path);
std::vector<double> mask_values(const Mesh& mesh);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace hlap
