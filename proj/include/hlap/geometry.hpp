#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "hlap/grid.hpp"

namespace hlap {

// ---------------------------------------------------------------------------
// Moduli of continuity

enum class ModulusKind { Power, LogPower, Table };

/// A modulus of continuity eps(t) on (0, t_cap], increasing with eps -> 0
/// as t -> 0.
///   Power(a):     eps(t) = t^a, 0 < a <= 1
///   LogPower(q):  eps(t) = log(1/t)^-q, t_cap < 1
///   Table:        log-log linear interpolation of samples, power-law
///                 extrapolation below the first sample
class DiniModulus {
public:
  static DiniModulus power(double a, double t_cap = 1.0);
  static DiniModulus log_power(double q, double t_cap = 0.5);
  static DiniModulus table(std::vector<double> t, std::vector<double> eps);

  static DiniModulus from_record(const nlohmann::json& record);
  nlohmann::json to_record() const;

  double operator()(double t) const;
  ModulusKind kind() const { return kind_; }
  double parameter() const { return param_; }
  double t_cap() const { return t_cap_; }
  /// Smallest tabulated abscissa (0 for the closed-form families).
  double table_min() const { return table_t_.empty() ? 0.0 : table_t_.front(); }

private:
  DiniModulus() = default;
  ModulusKind kind_ = ModulusKind::Power;
  double param_ = 1.0;
  double t_cap_ = 1.0;
  std::vector<double> table_t_, table_eps_;
};

struct DiniReport {
  double integral = 0.0;  ///< \int_0^{t1} eps(t)/t dt (partial sum plus tail when convergent)
  bool converges = false;
  bool convex_dini = false;
  int levels = 0;         ///< dyadic levels summed
  double tail_ratio = 0.0;
  double tail_exponent = 0.0;

  nlohmann::json to_json() const;
};

DiniReport dini_report(const DiniModulus& eps, double t1);

/// \int_0^{t1} eps(t)/t dt, throwing NotIntegrable when the dyadic series diverges.
double dini_integral(const DiniModulus& eps, double t1);

// ---------------------------------------------------------------------------
// Convex domains

/// Counter-clockwise convex polygon, star-shaped about `center`, with
/// vertices sorted by angle around it.
class ConvexPolygon {
public:
  ConvexPolygon(std::vector<Point> vertices, Point center);

  bool contains(Point p) const;
  double signed_distance(Point p) const;
  ConvexPolygon reflected() const;
  const std::vector<Point>& vertices() const { return vertices_; }
  Point center() const { return center_; }

private:
  std::size_t sector(Point p) const;
  std::vector<Point> vertices_;
  std::vector<double> angles_;
  Point center_;
};

enum class DomainKind { Disk, DiniCap, Polygon };

struct BoundingBox {
  double xmin, xmax, ymin, ymax;
};

class ConvexDomain {
public:
  static ConvexDomain disk(Point center, double radius);
  static ConvexDomain polygon(std::vector<Point> vertices);

  DomainKind kind() const { return kind_; }
  bool contains(Point p) const;
  /// Negative inside.
  double signed_distance(Point p) const;
  /// Point reflection through the origin.
  ConvexDomain reflected() const;
  BoundingBox bbox() const;
  std::vector<Point> boundary_samples(int n = 720) const;
  nlohmann::json descriptor() const;

  Point center() const { return center_; }
  double radius() const { return radius_; }

private:
  friend ConvexDomain build_dini_cap(double, const DiniModulus&, double);
  ConvexDomain() = default;

  DomainKind kind_ = DomainKind::Disk;
  Point center_;
  double radius_ = 0.0;
  std::shared_ptr<const ConvexPolygon> poly_;
  nlohmann::json params_;
};

/// K = B_r((0, r)) intersected with {y > 2|x| eps(|x|)}, touching the origin
/// with outward normal (0, -1). Junctions between the cap curve and the
/// circle are rounded by circular fillets of radius `fillet_radius`.
ConvexDomain build_dini_cap(double r_D, const DiniModulus& eps, double fillet_radius);

/// Inside mask (1 inside) and signed distance per cell centre.
struct Raster {
  std::vector<std::uint8_t> inside;
  std::vector<double> sdf;
};

Raster rasterize(const ConvexDomain& dom, const Grid& grid);

/// Random-midpoint convexity test on a cell set: every sampled midpoint of
/// two member cells must lie within one cell of a member.
bool midpoint_convex(const Grid& grid, const std::vector<std::uint8_t>& member, int pairs,
                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Convex rings

/// K1 (inner) compactly inside K2 (outer), rasterised on a grid. Cells in
/// K2 \ K1 whose four neighbours lie on the grid are interior; their
/// non-interior neighbours are ghosts. Link fractions come from bisection
/// on the exact membership tests.
class ConvexRing {
public:
  ConvexRing(ConvexDomain inner, ConvexDomain outer, const Grid& grid);

  const ConvexDomain& inner() const { return inner_; }
  const ConvexDomain& outer() const { return outer_; }
  const Grid& grid() const { return mesh_->grid(); }
  const std::shared_ptr<const Mesh>& mesh() const { return mesh_; }
  double gap() const { return gap_; }
  nlohmann::json descriptor() const;

private:
  ConvexDomain inner_;
  ConvexDomain outer_;
  std::shared_ptr<const Mesh> mesh_;
  double gap_ = 0.0;
};

struct RingPair {
  ConvexRing inner_ring;
  ConvexRing outer_ring;
};

/// inner ring: K \ B_{r/2}((0, r)); outer ring: B_{3r}((0, -r)) \ (-K).
RingPair make_rings(const ConvexDomain& K, double r_D, const Grid& grid);

ConvexRing make_annulus(double R1, double R2, const Grid& grid);

} // namespace hlap
